"""Analytic verdict against brute-force price oracles on random catalog surfaces.

    python3 scripts/concordance.py --n 60 --seed 0
"""

from __future__ import annotations

import argparse

import numpy as np

from gsvi.bs import convexity_oracle, monotonicity_oracle
from gsvi.butterfly import check_butterfly
from gsvi.calendar import check_calendar
from gsvi.surface import catalog


def random_config(rng: np.random.Generator, i: int):
    kind = i % 6
    if kind == 0:
        return "nonsvi_sqrt", {"alpha": rng.uniform(0.2, 1.0)}
    if kind == 1:
        return "nonsvi_power", {"nu": rng.uniform(1.5, 8), "alpha": rng.uniform(0.3, 1.3)}
    if kind == 2:
        return "svi", {"rho": rng.uniform(-0.5, 0.5), "alpha": rng.uniform(0.5, 2)}
    if kind == 3:
        name = str(rng.choice(["svi", "nonsvi_sqrt", "nonsvi_power"]))
        return name, {"theta_kind": "decay", "theta_lambda": rng.uniform(0.1, 2)}
    if kind == 4:
        return str(rng.choice(["nonsvi_sqrt", "nonsvi_power"])), {"alpha": rng.uniform(3.5, 5)}
    return "svi", {"rho": rng.uniform(-0.5, 0.5), "phi_kind": "const", "alpha": 3.0}


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--n", type=int, default=30)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    K = np.exp(np.linspace(-5, 5, 2001))
    T = np.linspace(0.01, 10, 101)
    bad = 0
    print("surface,params,analytic,oracle")
    for i in range(args.n):
        name, params = random_config(rng, i)
        s = catalog(name, **params)
        analytic = check_calendar(s).passed and check_butterfly(s).passed
        oracle = all(convexity_oracle(s, t, K).passed() for t in (0.1, 0.5, 1, 2, 5, 10)) and all(
            monotonicity_oracle(s, k, T).passed() for k in (-2, -1, 0, 1, 2)
        )
        bad += analytic != oracle
        p = ";".join(f"{k}={v:.4g}" if isinstance(v, float) else f"{k}={v}" for k, v in params.items())
        print(f"{name},{p},{analytic},{oracle}")
    print(f"# disagreements: {bad} / {args.n}")


if __name__ == "__main__":
    main()

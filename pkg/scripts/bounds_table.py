"""Closed-form against numeric butterfly bounds for symmetric SVI, u in (0, 10].

    python3 scripts/bounds_table.py > results/bounds.csv
"""

from __future__ import annotations

import argparse

import numpy as np

from gsvi.butterfly import butterfly_bound, classify_regions, sym_svi_bound
from gsvi.surface import svi_psi


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--n", type=int, default=60)
    args = ap.parse_args()
    psi = svi_psi(0.0)
    regions = classify_regions(psi)
    print("u,closed_form,numeric,rel_diff,argmin_z")
    for u in np.geomspace(0.01, 10, args.n):
        exact = float(sym_svi_bound(u))
        b = butterfly_bound(psi, float(u), regions=regions)
        print(f"{u:.17g},{exact:.17g},{b.bound:.17g},{abs(b.bound - exact) / exact:.3e},{b.argmin_z:.17g}")


if __name__ == "__main__":
    main()

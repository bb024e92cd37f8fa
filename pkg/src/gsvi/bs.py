"""Black-Scholes primitives, the butterfly operator L, Dupire local variance
and brute-force price-level arbitrage oracles.

Conventions: spot 1, zero rates, log-moneyness k = log K.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr

from .errors import ArbitrageError, DomainError, KnotError
from .surface import GenSurface, _arr, _ret, eval_w, eval_w_partials

ORACLE_TOL = 1e-10
DEFAULT_K_GRID = np.exp(np.linspace(-5.0, 5.0, 2001))
DEFAULT_T_GRID = np.linspace(0.01, 10.0, 101)


def d_pm(k, w):
    """(d_plus, d_minus) = -k/sqrt(w) +- sqrt(w)/2."""
    wa = _arr(w)
    if np.any(wa <= 0):
        raise DomainError("total variance must be positive")
    sw = np.sqrt(wa)
    dp = -_arr(k) / sw + sw / 2
    return _ret(dp, dp), _ret(dp - sw, dp)


def call_bs(K, w):
    """Undiscounted Black-Scholes call with unit forward."""
    Ka, wa = np.broadcast_arrays(_arr(K), _arr(w))
    if np.any(Ka <= 0) or np.any(wa < 0):
        raise DomainError("need K > 0 and w >= 0")
    intrinsic = np.maximum(1 - Ka, 0.0)
    pos = wa > 0
    ws = np.where(pos, wa, 1.0)
    dp, dm = d_pm(np.log(Ka), ws)
    price = ndtr(dp) - Ka * ndtr(dm)
    return _ret(np.where(pos, price, intrinsic), Ka)


def put_bs(K, w):
    Ka, wa = np.broadcast_arrays(_arr(K), _arr(w))
    if np.any(Ka <= 0) or np.any(wa < 0):
        raise DomainError("need K > 0 and w >= 0")
    pos = wa > 0
    ws = np.where(pos, wa, 1.0)
    dp, dm = d_pm(np.log(Ka), ws)
    price = Ka * ndtr(-dm) - ndtr(-dp)
    return _ret(np.where(pos, price, np.maximum(Ka - 1, 0.0)), Ka)


def L_from_derivatives(k, v, dv, d2v):
    """The butterfly operator written on a slice v(k) and its k-derivatives."""
    k, v, dv, d2v = (_arr(x) for x in (k, v, dv, d2v))
    return (1 - k * dv / (2 * v)) ** 2 - dv**2 / 4 * (1 / v + 0.25) + d2v / 2


def L_zform(psi, z, theta_phi, theta, side: int = 0):
    """Same operator in the rescaled variable z, given theta and theta * phi(theta)."""
    z = _arr(z)
    p0, p1, p2 = _arr(psi(z)), _arr(psi.d1(z, side)), _arr(psi.d2(z, side))
    bracket = (p1**2 / p0 - 2 * p2) / (4 * theta) + p1**2 / 16
    return (1 - z * p1 / (2 * p0)) ** 2 - theta_phi**2 * bracket


@dataclass(frozen=True)
class LResult:
    """Pointwise part of L w on a k-array at one maturity, plus atoms.

    ``pointwise`` is nan exactly at knots, where ``left``/``right`` hold the
    one-sided limits. Each atom is ``(k_i, mass_i)``: the Dirac weight of L w
    at the image of a Psi kink.
    """

    k: np.ndarray
    t: float
    pointwise: np.ndarray
    left: np.ndarray
    right: np.ndarray
    atoms: tuple[tuple[float, float], ...]

    @property
    def continuous_min(self) -> float:
        return float(np.nanmin(np.concatenate([self.left, self.right])))


def op_L(surface: GenSurface, k, t: float) -> LResult:
    """Evaluate L w(., t) on ``k`` (pointwise part and kink atoms).

    An atom at k_i = a_i / phi(theta_t) has weight theta_t phi(theta_t) alpha_i / 2,
    alpha_i being the Psi' jump.
    """
    if t <= 0:
        raise DomainError("maturity t must be positive")
    ka = np.atleast_1d(_arr(k))
    th = float(surface.theta(t))
    ph = float(surface.phi(th))
    z = ka * ph
    knot = surface.psi.at_knot(z)

    def side_value(side):
        p = eval_w_partials(surface, ka, np.full_like(ka, t), side=side)
        return L_from_derivatives(ka, p.w, p.w_k, p.w_kk)

    if np.any(knot):
        left, right = side_value(-1), side_value(+1)
        pointwise = np.where(knot, np.nan, right)
    else:
        pointwise = side_value(0)
        left = right = pointwise
    atoms = tuple(
        (a / ph, th * ph * alpha / 2) for a, alpha in zip(surface.psi.knots, surface.psi.jumps)
    )
    return LResult(ka, float(t), pointwise, left, right, atoms)


def op_L_pointwise(surface: GenSurface, k, t: float):
    """Pointwise L w(k, t); raises KnotError on a knot."""
    z = _arr(k) * surface.phi(surface.theta(t))
    if np.any(surface.psi.at_knot(z)):
        raise KnotError("L w is a distribution at a knot; use op_L for one-sided values")
    return _ret(op_L(surface, k, t).pointwise, _arr(k))


def dupire_local_var(surface: GenSurface, k, t, strict: bool = True):
    """Dupire ratio dw/dt / L w.

    With ``strict`` a non-positive denominator raises ArbitrageError;
    otherwise those points come back as nan.
    """
    k_a, t_a = np.broadcast_arrays(_arr(k), _arr(t))
    p = eval_w_partials(surface, k_a, t_a)
    lw = L_from_derivatives(k_a, p.w, p.w_k, p.w_kk)
    bad = lw <= 0
    if strict and np.any(bad):
        i = np.flatnonzero(np.ravel(bad))[0]
        raise ArbitrageError(
            f"L w <= 0 at k={np.ravel(k_a)[i]:g}, t={np.ravel(t_a)[i]:g}: butterfly arbitrage"
        )
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(bad, np.nan, _arr(p.w_t) / lw)
    return _ret(out, k_a)


# ---------------------------------------------------------------------------
# brute-force oracles
# ---------------------------------------------------------------------------


@dataclass
class OracleReport:
    kind: str
    min_margin: float
    witness: tuple[float, float]
    grid: dict = field(default_factory=dict)

    def passed(self, tol: float = ORACLE_TOL) -> bool:
        return self.min_margin >= -tol

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "min_margin": self.min_margin, "grid": self.grid}
        if self.kind == "convexity":
            d["witness_K"], d["witness_t"] = self.witness
        else:
            d["witness_k"], d["witness_t"] = self.witness
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _grid_summary(g: np.ndarray, name: str, log: bool) -> dict:
    return {"name": name, "min": float(g[0]), "max": float(g[-1]), "n": int(g.size), "log": log}


def second_differences(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Second divided differences of y on a non-uniform grid (length n - 2)."""
    dx1 = x[1:-1] - x[:-2]
    dx2 = x[2:] - x[1:-1]
    s1 = (y[1:-1] - y[:-2]) / dx1
    s2 = (y[2:] - y[1:-1]) / dx2
    return 2 * (s2 - s1) / (dx1 + dx2)


def convexity_oracle(surface: GenSurface, t: float, K_grid=None) -> OracleReport:
    """Minimum second divided difference of K -> C(K, t) on a strike grid.

    Each three-point stencil is evaluated on out-of-the-money prices (puts
    below the forward); parity makes this the same convexity test without
    the cancellation of deep in-the-money calls.
    """
    K = DEFAULT_K_GRID if K_grid is None else np.asarray(K_grid, dtype=float)
    if np.any(np.diff(K) <= 0) or K[0] <= 0:
        raise DomainError("strike grid must be positive and strictly increasing")
    w = _arr(eval_w(surface, np.log(K), np.full_like(K, t)))
    calls = _arr(call_bs(K, w))
    puts = _arr(put_bs(K, w))
    use_put = K[1:-1] <= 1.0
    dd_call = second_differences(K, calls)
    dd_put = second_differences(K, puts)
    dd = np.where(use_put, dd_put, dd_call)
    i = int(np.argmin(dd))
    return OracleReport(
        "convexity", float(dd[i]), (float(K[i + 1]), float(t)), _grid_summary(K, "K", True)
    )


def monotonicity_oracle(surface: GenSurface, k: float, t_grid=None) -> OracleReport:
    """Minimum forward difference of t -> w(k, t) on a maturity grid."""
    T = DEFAULT_T_GRID if t_grid is None else np.asarray(t_grid, dtype=float)
    if np.any(np.diff(T) <= 0) or T[0] <= 0:
        raise DomainError("maturity grid must be positive and strictly increasing")
    w = _arr(eval_w(surface, np.full_like(T, k), T))
    dw = np.diff(w)
    i = int(np.argmin(dw))
    return OracleReport(
        "monotonicity", float(dw[i]), (float(k), float(T[i])), _grid_summary(T, "t", False)
    )


def oracle_reports(surface, t_list, k_list, K_grid=None, t_grid=None) -> dict:
    """Both oracles over several slices; ``passed`` is their conjunction."""
    conv = [convexity_oracle(surface, t, K_grid) for t in t_list]
    mono = [monotonicity_oracle(surface, k, t_grid) for k in k_list]
    return {"convexity": conv, "monotonicity": mono}

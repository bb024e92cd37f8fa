"""Calendar-spread checks for generalised SVI surfaces.

A surface theta_t * Psi(k phi(theta_t)) has no calendar arbitrage iff theta
is non-decreasing and 1 + F(z) f(u) >= 0 for every z and every attained
variance level u, with F = z Psi'/Psi and f = u phi'/phi.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .surface import GenSurface, PhiCurve, PsiShape, ThetaCurve, _arr, func_F, func_f

CAL_TOL = 1e-9


def default_z_grid(n: int = 400) -> np.ndarray:
    pos = np.logspace(-3, 4, n)
    return np.concatenate([-pos[::-1], [0.0], pos])


def default_u_grid(theta: ThetaCurve, n: int = 300) -> np.ndarray:
    """Log-spaced variance levels inside the range of theta, capped at 1e3."""
    top = theta.sup_value
    top = 1e3 if not math.isfinite(top) else min(top * (1 - 1e-6), 1e3)
    if top <= 1e-3:
        return np.geomspace(top * 1e-3, top, n)
    return np.logspace(-3, math.log10(top), n)


def default_t_grid(n: int = 301) -> np.ndarray:
    return np.logspace(-3, 3, n)


def _F_values(psi: PsiShape, z: np.ndarray) -> np.ndarray:
    """F on the grid, both one-sided values at knots, and the +-inf limits if linear."""
    z = np.asarray(z, dtype=float)
    vals = [func_F(psi, z, side=-1), func_F(psi, z, side=+1)]
    out = np.concatenate([np.atleast_1d(v) for v in vals])
    if psi.asymptotically_linear:
        out = np.concatenate([out, [1.0, 1.0]])
    return out


@dataclass
class CompactCalendar:
    sup_F_pos: float
    sup_F_neg: float
    sup_f_pos: float
    sup_f_neg: float

    @property
    def margins(self) -> tuple[float, float]:
        return (
            1 - self.sup_F_pos * self.sup_f_neg,
            1 - self.sup_F_neg * self.sup_f_pos,
        )


def compact_calendar(psi: PsiShape, phi: PhiCurve, z_grid=None, u_grid=None) -> CompactCalendar:
    """Suprema of the positive/negative parts of F and f.

    The z-suprema include the limit F(+-inf) = 1 when Psi is asymptotically linear.
    """
    z = default_z_grid() if z_grid is None else np.asarray(z_grid, dtype=float)
    u = np.logspace(-3, 3, 300) if u_grid is None else np.asarray(u_grid, dtype=float)
    F = _F_values(psi, z)
    f = np.atleast_1d(func_f(phi, u))
    return CompactCalendar(
        sup_F_pos=float(max(F.max(), 0.0)),
        sup_F_neg=float(max((-F).max(), 0.0)),
        sup_f_pos=float(max(f.max(), 0.0)),
        sup_f_neg=float(max((-f).max(), 0.0)),
    )


@dataclass
class UphiCheck:
    ok: bool
    min_one_plus_f: float
    min_derivative: float
    witness_u: float


def check_uphi_monotone(phi: PhiCurve, u_grid, tol: float = CAL_TOL) -> UphiCheck:
    """Is u -> u phi(u) non-decreasing on the grid?  Equivalent to 1 + f >= 0."""
    u = np.asarray(u_grid, dtype=float)
    one_f = 1 + np.atleast_1d(func_f(phi, u))
    deriv = np.atleast_1d(phi(u)) * one_f
    i = int(np.argmin(one_f))
    return UphiCheck(bool(one_f[i] >= -tol), float(one_f[i]), float(deriv.min()), float(u[i]))


@dataclass
class CalendarVerdict:
    passed: bool
    theta_monotone: bool
    theta_min_slope: float
    coupling_margin: float
    compact: CompactCalendar
    uphi: UphiCheck | None
    witnesses: list[dict] = field(default_factory=list)

    @property
    def compact_margins(self) -> tuple[float, float]:
        return self.compact.margins

    def to_dict(self) -> dict:
        return {
            "pass": self.passed,
            "theta_monotone": self.theta_monotone,
            "theta_min_slope": self.theta_min_slope,
            "coupling_margin": self.coupling_margin,
            "compact_margins": list(self.compact_margins),
            "uphi_monotone": None if self.uphi is None else self.uphi.ok,
            "witnesses": self.witnesses,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def check_calendar(
    surface: GenSurface, z_grid=None, u_grid=None, t_grid=None, tol: float = CAL_TOL
) -> CalendarVerdict:
    """First coupling condition on grids.

    Passes iff theta is non-decreasing on ``t_grid`` and
    min over (z, u) of 1 + F(z) f(u) >= -tol.
    """
    z = default_z_grid() if z_grid is None else np.asarray(z_grid, dtype=float)
    u = default_u_grid(surface.theta) if u_grid is None else np.asarray(u_grid, dtype=float)
    t = default_t_grid() if t_grid is None else np.asarray(t_grid, dtype=float)
    if u.size and (u.min() <= 0 or u.max() > surface.theta.sup_value):
        raise DomainError("u grid must lie inside (0, sup theta)")

    witnesses = []
    dth = np.atleast_1d(surface.theta.d1(t))
    th = np.atleast_1d(surface.theta(t))
    fwd = np.diff(th)
    slope_min = float(dth.min())
    theta_ok = slope_min >= -tol and (fwd.size == 0 or fwd.min() >= -tol)
    if not theta_ok:
        i = int(np.argmin(dth))
        witnesses.append({"condition": "theta_monotone", "t": float(t[i]), "theta_prime": float(dth[i])})

    F = _F_values(surface.psi, z)
    zz = np.concatenate([z, z, [math.inf, -math.inf]])[: F.size]
    if u.size:
        f = np.atleast_1d(func_f(surface.phi, u))
        prod = 1 + np.outer(F, f)
        i, j = np.unravel_index(int(np.argmin(prod)), prod.shape)
        margin = float(prod[i, j])
        if margin < -tol:
            witnesses.append({"condition": "coupling", "z": float(zz[i]), "u": float(u[j]), "value": margin})
    else:
        margin = 1.0

    compact = compact_calendar(surface.psi, surface.phi, z, u if u.size else None)
    uphi = check_uphi_monotone(surface.phi, u, tol) if surface.psi.asymptotically_linear and u.size else None
    if uphi is not None and not uphi.ok:
        witnesses.append({"condition": "uphi_monotone", "u": uphi.witness_u, "one_plus_f": uphi.min_one_plus_f})
    return CalendarVerdict(
        passed=bool(theta_ok and margin >= -tol),
        theta_monotone=bool(theta_ok),
        theta_min_slope=slope_min,
        coupling_margin=margin,
        compact=compact,
        uphi=uphi,
        witnesses=witnesses,
    )

"""Butterfly-arbitrage checks: the second coupling condition and its corollaries.

Notation used throughout:

    Phi(z)   = Psi'(z)^2 / Psi(z) - 2 Psi''(z)
    D(z, u)  = Phi(z) / (4u) + Psi'(z)^2 / 16
    R(z, u)  = (1 - z Psi'(z) / (2 Psi(z)))^2 / D(z, u)

so that L w = (1 - z Psi'/(2 Psi))^2 - (theta phi(theta))^2 D(z, theta), and the
surface is free of butterfly arbitrage iff (u phi(u))^2 <= inf R(., u) over
{D(., u) > 0} for every attained u, with non-negative Psi' jumps.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError, PreconditionError
from .surface import GenSurface, PhiCurve, PsiShape, ThetaCurve, _arr, _ret
from .calendar import default_u_grid

FLY_TOL = 1e-12
GOLDEN = (math.sqrt(5) - 1) / 2


def default_z_grid(n: int = 2000) -> np.ndarray:
    pos = np.logspace(-4, 4, n)
    return np.concatenate([-pos[::-1], [0.0], pos])


def golden_min(fun, a: float, b: float, tol: float = 1e-10, maxiter: int = 200):
    """Golden-section search for a minimum of ``fun`` on [a, b]."""
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = fun(c), fun(d)
    for _ in range(maxiter):
        if abs(b - a) <= tol * max(1.0, abs(a) + abs(b)):
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = fun(d)
    return (c, fc) if fc <= fd else (d, fd)


def phi_expr(psi: PsiShape, z, side: int = 0):
    """Psi'^2 / Psi - 2 Psi''."""
    za = _arr(z)
    p1 = _arr(psi.d1(za, side))
    return _ret(p1**2 / _arr(psi(za)) - 2 * _arr(psi.d2(za, side)), z)


def denominator(psi: PsiShape, z, u: float, side: int = 0):
    za = _arr(z)
    p1 = _arr(psi.d1(za, side))
    return _ret(_arr(phi_expr(psi, za, side)) / (4 * u) + p1**2 / 16, z)


def bound_ratio(psi: PsiShape, z, u: float, side: int = 0):
    """R(z, u); +inf where the denominator is not positive."""
    za = _arr(z)
    p0, p1 = _arr(psi(za)), _arr(psi.d1(za, side))
    num = (1 - za * p1 / (2 * p0)) ** 2
    den = _arr(denominator(psi, za, u, side))
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(den > 0, num / np.where(den > 0, den, 1.0), np.inf)
    return _ret(out, z)


def tail_limit(psi: PsiShape, sign: int) -> float:
    """lim R(z, u) as z -> sign * inf for an asymptotically linear Psi: 4 / alpha^2."""
    a = psi.asym_slope_pos if sign > 0 else psi.asym_slope_neg
    return 4.0 / a**2


# ---------------------------------------------------------------------------
# regions
# ---------------------------------------------------------------------------


@dataclass
class RegionClassification:
    """Sign structure of Phi (knots excluded from every region).

    ``zbar_plus_boundary`` are the located sign changes of Phi; Zbar_+ is
    {Phi > 0}, Zbar_- its complement (including the knots).
    """

    psi: PsiShape
    zbar_plus_boundary: tuple[float, ...]
    u: float | None = None

    def zbar_plus(self, z) -> np.ndarray:
        za = _arr(z)
        with np.errstate(all="ignore"):
            val = np.nan_to_num(_arr(phi_expr(self.psi, za, 1)), nan=-1.0)
        return (val > 0) & ~self.psi.at_knot(za)

    def zbar_minus(self, z) -> np.ndarray:
        return ~self.zbar_plus(z)

    def zplus(self, u: float, z) -> np.ndarray:
        if u <= 0:
            raise DomainError("Z_+(u) needs u > 0")
        za = _arr(z)
        with np.errstate(all="ignore"):
            den = np.nan_to_num(_arr(denominator(self.psi, za, u, 1)), nan=-1.0)
        return (den > 0) & ~self.psi.at_knot(za)

    def zplus_membership(self, z) -> np.ndarray:
        if self.u is None:
            raise DomainError("classification built without u")
        return self.zplus(self.u, z)


def _sign_change_roots(fun, z: np.ndarray, knots, xtol: float = 1e-13) -> list[float]:
    with np.errstate(all="ignore"):
        vals = _arr(fun(z))
    keep = np.isfinite(vals) & (vals != 0) & ~np.isin(z, knots)
    zs, vs = z[keep], vals[keep]
    roots = []
    kn = np.asarray(knots, dtype=float)
    for i in np.flatnonzero(np.sign(vs[:-1]) != np.sign(vs[1:])):
        a, b = zs[i], zs[i + 1]
        if kn.size and np.any((kn >= a) & (kn <= b)):
            continue
        between = z[(z > a) & (z < b)]
        if between.size:
            roots.append(float(between[0]))
            continue
        roots.append(float(brentq(lambda x: float(fun(x)), a, b, xtol=xtol, rtol=1e-15)))
    return roots


def classify_regions(psi: PsiShape, u: float | None = None, z_grid=None) -> RegionClassification:
    """Locate the boundary of Zbar_+ = {Phi > 0} by bracketing sign changes."""
    z = default_z_grid() if z_grid is None else np.asarray(z_grid, dtype=float)
    roots = _sign_change_roots(lambda x: phi_expr(psi, x, 1), z, psi.knots)
    return RegionClassification(psi, tuple(roots), u)


# ---------------------------------------------------------------------------
# the infimum
# ---------------------------------------------------------------------------

REGIONS = ("zplus", "zbar_plus", "zbar_minus_zplus")


@dataclass
class ButterflyBound:
    u: float
    bound: float
    argmin_z: float | None
    set_kind: str


def _scan_points(psi: PsiShape, regions: RegionClassification, z_grid) -> np.ndarray:
    z = default_z_grid() if z_grid is None else np.asarray(z_grid, dtype=float)
    extra = list(regions.zbar_plus_boundary)
    for a in psi.knots:
        extra += [a - 1e-8, a + 1e-8]
    return np.unique(np.concatenate([z, extra]))


def _region_mask(kind: str, regions: RegionClassification, u: float, z: np.ndarray) -> np.ndarray:
    zp = regions.zplus(u, z)
    if kind == "zplus":
        return zp
    if kind == "zbar_plus":
        return zp & regions.zbar_plus(z)
    return zp & regions.zbar_minus(z)


def butterfly_bound(
    psi: PsiShape, u: float, region: str = "zplus", z_grid=None, regions: RegionClassification | None = None
) -> ButterflyBound:
    """inf of R(., u) over a region, by grid scan plus golden-section refinement.

    For an asymptotically linear Psi whose region reaches +-inf, the tail limit
    4 / alpha_+-^2 is a candidate too (the infimum may only be approached).
    Returns ``bound = inf`` when the region is empty.
    """
    if region not in REGIONS:
        raise ValueError(f"region must be one of {REGIONS}")
    if u <= 0:
        raise DomainError("u must be positive")
    regions = regions or classify_regions(psi, z_grid=z_grid)
    z = _scan_points(psi, regions, z_grid)
    mask = _region_mask(region, regions, u, z)
    if not mask.any():
        return ButterflyBound(u, math.inf, None, region)

    r = np.where(mask, _arr(bound_ratio(psi, z, u, 1)), np.inf)
    i = int(np.argmin(r))
    best_z, best = float(z[i]), float(r[i])

    lo = z[i - 1] if i > 0 and mask[i - 1] else z[i]
    hi = z[i + 1] if i + 1 < z.size and mask[i + 1] else z[i]
    if hi > lo and not np.any(np.isin(psi.knots, [lo, hi])):
        kn = np.asarray(psi.knots)
        if not (kn.size and np.any((kn > lo) & (kn < hi))):

            def obj(x):
                if not _region_mask(region, regions, u, np.array([x]))[0]:
                    return math.inf
                return float(bound_ratio(psi, x, u, 1))

            zr, fr = golden_min(obj, float(lo), float(hi))
            if fr < best:
                best_z, best = zr, fr

    if psi.asymptotically_linear:
        for sgn, end in ((1, -1), (-1, 0)):
            if mask[end] and tail_limit(psi, sgn) < best:
                best, best_z = tail_limit(psi, sgn), sgn * math.inf
    return ButterflyBound(u, best, best_z, region)


# ---------------------------------------------------------------------------
# symmetric SVI closed forms
# ---------------------------------------------------------------------------


def A_func(y, u):
    """16 u y (y + 1) / (8 (y - 2) + u y (y - 1))."""
    y, u = _arr(y), _arr(u)
    return _ret(16 * u * y * (y + 1) / (8 * (y - 2) + u * y * (y - 1)), np.broadcast_arrays(y, u)[0])


def Y_func(u):
    """Minimiser in y = sqrt(1 + z^2) of A(., u) for 0 <= u < 4."""
    ua = _arr(u)
    if np.any((ua < 0) | (ua >= 4)):
        raise DomainError("Y(u) is defined for 0 <= u < 4")
    c = 2 / (1 - ua / 4)
    return _ret(c + np.sqrt(c * c + c), u)


def A_star(u):
    return A_func(Y_func(u), u)


def sym_svi_closed_forms(u):
    """(Y(u), A*(u)) for 0 <= u < 4."""
    return Y_func(u), A_star(u)


def sym_svi_bound(u):
    """Exact butterfly bound on (u phi(u))^2 for symmetric SVI: A*(u) below 4, 16 above."""
    ua = _arr(u)
    out = np.where(ua < 4, 0.0, 16.0)
    small = ua < 4
    if np.any(small):
        out = np.where(small, _arr(A_star(np.where(small, ua, 0.0))), out)
    return _ret(out, u)


# ---------------------------------------------------------------------------
# necessary / sufficient conditions
# ---------------------------------------------------------------------------


def wing_gap(psi: PsiShape, z, side: int = 1):
    """|4 / Psi'(z) - 2 z / Psi(z)|; +inf where Psi' vanishes."""
    za = _arr(z)
    p1 = _arr(psi.d1(za, side))
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(p1 != 0, np.abs(4 / np.where(p1 != 0, p1, 1.0) - 2 * za / _arr(psi(za))), np.inf)
    return _ret(out, z)


@dataclass
class EasyNecessary:
    inf_value: float
    m_infinity: float
    argmin_z: float | None

    @property
    def margin(self) -> float:
        return self.inf_value - self.m_infinity


def easy_necessary(psi: PsiShape, m_infinity: float, region: str = "all", z_grid=None) -> EasyNecessary:
    """inf of |4/Psi' - 2z/Psi| over R (``"all"``) or over Zbar_- (``"zbar_minus"``).

    ``margin`` = infimum - M_infinity; non-negative margin is necessary for
    absence of butterfly arbitrage when theta_infinity is infinite.
    """
    if not psi.asymptotically_linear:
        raise PreconditionError("needs an asymptotically linear Psi")
    regions = classify_regions(psi, z_grid=z_grid)
    z = _scan_points(psi, regions, z_grid)
    kn = np.asarray(psi.knots)
    cand_z, cand_v = [], []
    for side in (-1, 1):
        if region == "all":
            mask = np.ones(z.shape, dtype=bool)
        else:
            mask = regions.zbar_minus(z)
        mask &= ~np.isin(z, kn) | ((z >= 0) if side > 0 else (z <= 0))
        with np.errstate(over="ignore"):
            vals = np.where(mask, _arr(wing_gap(psi, z, side)), np.inf)
        i = int(np.argmin(vals))
        best_z, best = float(z[i]), float(vals[i])
        lo, hi = z[max(i - 1, 0)], z[min(i + 1, z.size - 1)]
        if not (kn.size and np.any((kn > lo) & (kn < hi))):

            def obj(x):
                inside = region == "all" or bool(regions.zbar_minus(np.array([x]))[0])
                return float(wing_gap(psi, x, side)) if inside else math.inf

            zr, fr = golden_min(obj, float(lo), float(hi), tol=1e-13)
            if fr < best:
                best_z, best = zr, fr
        cand_z.append(best_z)
        cand_v.append(best)
    if region == "all":
        cand_z += [math.inf, -math.inf]
        cand_v += [2 / abs(psi.asym_slope_pos), 2 / abs(psi.asym_slope_neg)]
    j = int(np.argmin(cand_v))
    return EasyNecessary(cand_v[j], float(m_infinity), cand_z[j])


def m_infinity_of(phi: PhiCurve) -> float:
    if phi.m_infinity is not None:
        return float(phi.m_infinity)
    return float(1e8 * phi(1e8))


@dataclass
class ButterflyVerdict:
    passed: bool
    per_u: list[dict]
    m_inf_condition: dict
    jumps_ok: bool
    lmb_ok: bool
    lmb_status: str
    lmb_value: float
    witnesses: list[dict] = field(default_factory=list)

    @property
    def min_per_u_margin(self) -> float:
        return min((r["bound"] - r["lhs"] for r in self.per_u), default=math.inf)

    def to_dict(self) -> dict:
        def clean(x):
            if isinstance(x, float) and not math.isfinite(x):
                return str(x)
            return x

        return {
            "pass": self.passed,
            "per_u": [{k: clean(v) for k, v in r.items()} for r in self.per_u],
            "m_inf_condition": {k: clean(v) for k, v in self.m_inf_condition.items()},
            "jumps_ok": self.jumps_ok,
            "lmb_ok": self.lmb_ok,
            "lmb_status": self.lmb_status,
            "lmb_value": clean(self.lmb_value),
            "witnesses": [{k: clean(v) for k, v in w.items()} for w in self.witnesses],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _m_inf_condition(psi: PsiShape, phi: PhiCurve, theta: ThetaCurve, regions, tol) -> dict:
    if not psi.asymptotically_linear:
        return {"applicable": False, "ok": True}
    top = theta.sup_value
    if math.isinf(top):
        m = m_infinity_of(phi)
        en = easy_necessary(psi, 0.0, region="zbar_minus")
        ok = m <= en.inf_value + tol
        return {
            "applicable": True, "branch": "theta_inf_infinite", "M": m,
            "inf_value": en.inf_value, "argmin_z": en.argmin_z,
            "margin": en.inf_value - m, "ok": bool(ok),
        }
    m = float(top * phi(top))
    bb = butterfly_bound(psi, top, "zbar_minus_zplus", regions=regions)
    ok = m * m <= bb.bound + tol
    return {
        "applicable": True, "branch": "theta_inf_finite", "M": m, "u": top,
        "inf_value": bb.bound, "argmin_z": bb.argmin_z,
        "margin": bb.bound - m * m, "ok": bool(ok),
    }


def _lmb(psi: PsiShape, phi: PhiCurve, theta: ThetaCurve, u: np.ndarray, tol: float):
    """LMB via theta phi(theta) alpha_+ < 2 over attained levels (and the limit)."""
    if not psi.asymptotically_linear:
        from .bs import d_pm

        ks = np.array([1e2, 1e3, 1e4])
        worst = -math.inf
        for uu in u[:: max(1, u.size // 10)]:
            w = uu * _arr(psi(ks * phi(uu)))
            dp, _ = d_pm(ks, w)
            worst = max(worst, float(dp[-1]))
            if not (np.all(np.diff(dp) < 0)):
                return "fail", worst
        return ("ok" if worst < -10 else "fail"), worst
    scale = np.atleast_1d(u * _arr(phi(u)))
    val = float(scale.max()) * psi.asym_slope_pos
    top = theta.sup_value
    limit = m_infinity_of(phi) if math.isinf(top) else float(top * phi(top))
    val = max(val, limit * psi.asym_slope_pos)
    if val < 2 - tol:
        return "ok", val
    if val <= 2 + tol:
        return "marginal", val
    return "fail", val


def check_butterfly(surface: GenSurface, u_grid=None, tol: float = FLY_TOL, z_grid=None) -> ButterflyVerdict:
    """Second coupling condition on a grid of variance levels.

    For each u: (u phi(u))^2 <= inf over Z_+(u) of R(., u), knots excluded.
    Added to that: the large-u condition on M_infinity (when Psi is
    asymptotically linear), non-negative Psi' jumps, and the large-moneyness
    condition theta phi(theta) alpha_+ < 2.
    """
    psi, phi, theta = surface.psi, surface.phi, surface.theta
    u = default_u_grid(theta) if u_grid is None else np.asarray(u_grid, dtype=float)
    regions = classify_regions(psi, z_grid=z_grid)
    per_u, witnesses = [], []
    for uu in u:
        uu = float(uu)
        lhs = float((uu * phi(uu)) ** 2)
        bb = butterfly_bound(psi, uu, "zplus", z_grid=z_grid, regions=regions)
        ok = lhs <= bb.bound + tol
        per_u.append({"u": uu, "lhs": lhs, "bound": bb.bound, "argmin_z": bb.argmin_z, "ok": bool(ok)})
        if not ok:
            witnesses.append({"condition": "second_coupling", "u": uu, "lhs": lhs, "bound": bb.bound, "z": bb.argmin_z})

    m_cond = _m_inf_condition(psi, phi, theta, regions, tol)
    if not m_cond["ok"]:
        witnesses.append({"condition": "m_infinity", "M": m_cond["M"], "inf_value": m_cond["inf_value"], "z": m_cond["argmin_z"]})
    jumps_ok = all(a >= -FLY_TOL for a in psi.jumps)
    if not jumps_ok:
        i = int(np.argmin(psi.jumps))
        witnesses.append({"condition": "jump", "z": psi.knots[i], "jump": psi.jumps[i]})
    status, val = _lmb(psi, phi, theta, u, tol)
    if status != "ok":
        witnesses.append({"condition": "lmb", "status": status, "value": val})
    passed = all(r["ok"] for r in per_u) and m_cond["ok"] and jumps_ok and status == "ok"
    return ButterflyVerdict(bool(passed), per_u, m_cond, jumps_ok, status == "ok", status, val, witnesses)


@dataclass
class GJResult:
    conditions: tuple[bool, bool, bool, bool, bool]
    margins: tuple[float, float, float, float, float]

    @property
    def all(self) -> bool:
        return all(self.conditions)


def gj_sufficient(rho: float, phi: PhiCurve, theta: ThetaCurve, u_grid=None, t_grid=None) -> GJResult:
    """The five classical sufficient conditions for SVI surfaces, checked on grids.

    1. theta' >= 0;  2. phi + u phi' >= 0;  3. phi' < 0;
    4. u phi (1 + |rho|) < 4;  5. u phi^2 (1 + |rho|) <= 4.
    """
    if not -1 < rho < 1:
        raise PreconditionError("needs |rho| < 1")
    u = default_u_grid(theta) if u_grid is None else np.asarray(u_grid, dtype=float)
    t = np.logspace(-3, 3, 301) if t_grid is None else np.asarray(t_grid, dtype=float)
    ph, dph = np.atleast_1d(phi(u)), np.atleast_1d(phi.d1(u))
    c = 1 + abs(rho)
    m = (
        float(np.min(theta.d1(t))),
        float(np.min(ph + u * dph)),
        float(-np.max(dph)),
        float(4 - np.max(u * ph * c)),
        float(4 - np.max(u * ph**2 * c)),
    )
    conds = (m[0] >= 0, m[1] >= 0, m[2] > 0, m[3] > 0, m[4] >= 0)
    return GJResult(tuple(bool(x) for x in conds), m)


@dataclass
class UpperBound:
    verdict: bool
    z_plus: float | None
    kappa: float | None
    margin: float
    witness_z: float | None
    literal_margin: float | None = None


def psi_upper_bound(psi: PsiShape, m_infinity: float, z_max: float = 1e4) -> UpperBound:
    """Right-wing upper bound on Psi implied by absence of arbitrage.

    z_plus is the first grid point after which 4/Psi' - 2z/Psi >= M and
    2z/Psi >= M both hold (the latter keeps kappa >= 0); from there
    Psi(z) <= kappa^2 + lam z - kappa sqrt(kappa^2 + 2 lam z), lam = 2 / M.
    """
    if not psi.asymptotically_linear or psi.asym_slope_pos <= 0:
        raise PreconditionError("needs an asymptotically linear Psi with alpha_+ > 0")
    M = float(m_infinity)
    if M <= 0:
        raise PreconditionError("M_infinity must be positive")
    z = np.unique(np.concatenate([np.linspace(0, 10, 2001), np.geomspace(10, z_max, 3000)]))
    p0, p1 = _arr(psi(z)), _arr(psi.d1(z, 1))
    gap = _arr(wing_gap(psi, z, 1))
    cond = (p1 > 0) & (gap >= M) & (2 * z / p0 >= M)
    limit_ok = 2 / psi.asym_slope_pos >= M
    if not cond[-1] or not limit_ok:
        bad = np.flatnonzero(~cond)
        wz = float(z[bad[-1]]) if bad.size else math.inf
        return UpperBound(False, None, None, -math.inf, wz)
    bad = np.flatnonzero(~cond)
    i0 = 0 if bad.size == 0 else int(bad[-1]) + 1
    zp = float(z[i0])
    up = float(psi(zp))
    kl = M / 2
    ks = zp / math.sqrt(up) - kl * math.sqrt(up)
    kappa = ks / (math.sqrt(2) * kl)
    lam = 1 / kl
    zz = z[i0:]
    bound = kappa**2 + lam * zz - kappa * np.sqrt(kappa**2 + 2 * lam * zz)
    literal = kappa**2 + lam * zz - kappa * np.sqrt(kappa**2 + lam * zz)
    gap_b = bound - p0[i0:]
    scale = np.maximum(1.0, np.abs(bound))
    j = int(np.argmin(gap_b / scale))
    ok = bool(gap_b[j] >= -1e-9 * scale[j])
    return UpperBound(
        ok, zp, kappa, float(gap_b[j]), None if ok else float(zz[j]),
        literal_margin=float(np.min(literal - p0[i0:])),
    )


# ---------------------------------------------------------------------------
# constants of the power-shape example
# ---------------------------------------------------------------------------


def g_alpha(u, alpha: float = 1.0):
    """(u phi(u))^2 (1/u + 1/4) for phi(u) = alpha (1 - e^-u) / u."""
    ua = _arr(u)
    return _ret((alpha * -np.expm1(-ua)) ** 2 * (1 / ua + 0.25), u)


def u_star() -> float:
    """The maximiser of g_1 on (0, inf)."""
    from scipy.optimize import minimize_scalar

    res = minimize_scalar(lambda u: -g_alpha(u), bounds=(0.1, 10.0), method="bounded", options={"xatol": 1e-12})
    return float(res.x)


def alpha_bar() -> float:
    """g_1(u*)^(-1/2): below it, g_alpha <= 1 for every u."""
    return float(g_alpha(u_star())) ** -0.5


def z_nu(nu: float) -> float:
    """4 nu (2 nu - 2)^((1 - nu)/nu) (2 nu - 1)^(-1/nu): the M_infinity cap of the power shape."""
    if not nu > 1:
        raise DomainError("needs nu > 1")
    return 4 * nu * (2 * nu - 2) ** ((1 - nu) / nu) * (2 * nu - 1) ** (-1 / nu)


def z_nu_numeric(nu: float, z_grid=None) -> float:
    """Numeric inf of |4/Psi' - 2z/Psi| over Zbar_- for the power shape."""
    from .surface import power_psi

    return easy_necessary(power_psi(nu), 0.0, region="zbar_minus", z_grid=z_grid).inf_value


def z_star_nu(nu: float) -> float:
    """[nu(nu+1) - 2 + sqrt(nu(nu-1)(nu^2 + 3nu - 2))]^(1/nu): maximiser of Phi for the power shape.

    With s = z^nu the stationarity condition is
    s^2 - 2(nu-1)(nu+2) s + 2(nu-1)(nu-2) = 0; this is its larger root.
    """
    return (nu * (nu + 1) - 2 + math.sqrt(nu * (nu - 1) * (nu * nu + 3 * nu - 2))) ** (1 / nu)

"""Risk-neutral densities, inverse-CDF sampling and critical moments of a smile.

A slice v(k) = w(k, t) with L v >= 0 carries the two densities

    p_-(k) = (2 pi v)^(-1/2) exp(-d_-^2 / 2) L v(k)      (law of log S)
    p_+(k) = (2 pi v)^(-1/2) exp(-d_+^2 / 2) L v(k) = e^k p_-(k)

plus point masses where v' jumps. The cumulative distribution of p_- is
1 + D(k) with D(k) = v'/(2 sqrt(2 pi v)) exp(-d_-^2/2) - N(d_-), the
strike-derivative of the call price.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.special import logsumexp, ndtr

from .bs import L_from_derivatives
from .errors import ArbitrageError, DomainError, PreconditionError, TailError
from .surface import GenSurface, _arr, _ret

DENSITY_TOL = 1e-4
L_TOL = 1e-10
K_MAX = 40.0
DEFAULT_N = 16001
SING_WINDOW = 40
LOG_2PI = math.log(2 * math.pi)


@dataclass(frozen=True)
class Smile:
    """One maturity slice v(k) with one-sided derivatives and kinks.

    ``knots`` are log-moneyness points where v' jumps by ``jumps``.
    """

    value: object
    deriv1: object
    deriv2: object
    knots: tuple[float, ...] = ()
    jumps: tuple[float, ...] = ()
    t: float | None = None
    slope_pos: float | None = None
    name: str = "smile"

    def __call__(self, k):
        return self.value(_arr(k))

    def d1(self, k, side: int = 1):
        return self.deriv1(_arr(k), side)

    def d2(self, k, side: int = 1):
        return self.deriv2(_arr(k), side)

    def L(self, k, side: int = 1):
        k = _arr(k)
        return L_from_derivatives(k, self(k), self.d1(k, side), self.d2(k, side))

    @classmethod
    def from_surface(cls, surface: GenSurface, t: float) -> "Smile":
        if t <= 0:
            raise DomainError("maturity t must be positive")
        th = float(surface.theta(t))
        if th <= 0:
            raise DomainError("degenerate slice: theta_t = 0")
        ph = float(surface.phi(th))
        psi = surface.psi
        slope = None if psi.asym_slope_pos is None else th * ph * psi.asym_slope_pos
        return cls(
            value=lambda k: th * _arr(psi(k * ph)),
            deriv1=lambda k, side=1: th * ph * _arr(psi.d1(k * ph, side)),
            deriv2=lambda k, side=1: th * ph**2 * _arr(psi.d2(k * ph, side)),
            knots=tuple(a / ph for a in psi.knots),
            jumps=tuple(th * ph * a for a in psi.jumps),
            t=float(t),
            slope_pos=slope,
            name=psi.name,
        )

    def reflected(self) -> "Smile":
        """The smile k -> v(-k); jumps of v' keep their sign."""
        return Smile(
            value=lambda k: self.value(-_arr(k)),
            deriv1=lambda k, side=1: -_arr(self.deriv1(-_arr(k), -side)),
            deriv2=lambda k, side=1: self.deriv2(-_arr(k), -side),
            knots=tuple(sorted(-a for a in self.knots)),
            jumps=tuple(j for _, j in sorted(zip((-a for a in self.knots), self.jumps))),
            t=self.t,
            name=f"reflected({self.name})",
        )


def _as_smile(source, t) -> Smile:
    if isinstance(source, Smile):
        return source
    if t is None:
        raise DomainError("a maturity t is needed to slice a surface")
    return Smile.from_surface(source, t)


def log_density(smile: Smile, k, side: int = 1, sign: int = -1):
    """log p_- (sign=-1) or log p_+ (sign=+1); -inf where L v <= 0."""
    k = _arr(k)
    v = _arr(smile(k))
    sv = np.sqrt(v)
    d = -k / sv + sign * sv / 2
    lv = _arr(smile.L(k, side))
    with np.errstate(divide="ignore", invalid="ignore"):
        out = -0.5 * (LOG_2PI + np.log(v)) - d**2 / 2 + np.log(np.where(lv > 0, lv, 0.0))
    return out


def p_minus(smile: Smile, k, side: int = 1):
    return _ret(np.exp(log_density(smile, k, side, -1)), k)


def p_plus(smile: Smile, k, side: int = 1):
    return _ret(np.exp(log_density(smile, k, side, +1)), k)


def primitive_D(smile: Smile, k, side: int = 1):
    """D(k) = v'/(2 sqrt(2 pi v)) exp(-d_-^2/2) - N(d_-); 1 + D is the cdf of p_-."""
    k = _arr(k)
    v = _arr(smile(k))
    sv = np.sqrt(v)
    dm = -k / sv - sv / 2
    dv = _arr(smile.d1(k, side))
    return _ret(dv / (2 * np.sqrt(2 * np.pi * v)) * np.exp(-dm**2 / 2) - ndtr(dm), k)


@dataclass
class DensitySlice:
    """p_-/p_+ sampled on a grid, with atoms and the cumulative distribution.

    ``cdf[i]`` includes every atom at or left of ``k[i]``; ``cdf_left`` excludes
    an atom sitting exactly at ``k[i]``. ``p_minus`` at a knot is the mean of
    its one-sided limits.
    """

    k: np.ndarray
    p_minus: np.ndarray
    p_plus: np.ndarray
    cdf: np.ndarray
    cdf_left: np.ndarray
    atoms: tuple[tuple[float, float], ...]
    mass: float
    mean_exp: float
    tail_mass: tuple[float, float]
    t: float | None = None
    min_L: float = field(default=math.inf)

    @property
    def atom_mass(self) -> float:
        return float(sum(m for _, m in self.atoms))

    def normalized(self, tol: float = DENSITY_TOL) -> bool:
        return abs(self.mass - 1) <= tol and abs(self.mean_exp - 1) <= tol

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("k,p_minus,p_plus,cdf\n")
        for row in zip(self.k, self.p_minus, self.p_plus, self.cdf):
            buf.write(",".join(f"{x:.17g}" for x in row) + "\n")
        buf.write("# atom,k,mass\n")
        for k0, m in self.atoms:
            buf.write(f"# atom,{k0:.17g},{m:.17g}\n")
        return buf.getvalue()


def default_k_grid(n: int = DEFAULT_N, k_max: float = K_MAX) -> np.ndarray:
    return np.linspace(-k_max, k_max, n)


def _cell_integrals(smile: Smile, k: np.ndarray, sign: int) -> np.ndarray:
    """Simpson's rule on each cell with one-sided values at its ends.

    A cell whose end value is not finite (an integrable singularity at a
    knot) is integrated with adaptive quadrature instead.
    """
    right = np.exp(log_density(smile, k, +1, sign))
    left = np.exp(log_density(smile, k, -1, sign))
    mid = np.exp(log_density(smile, 0.5 * (k[:-1] + k[1:]), +1, sign))
    a, b = right[:-1], left[1:]
    cells = (a + 4 * mid + b) / 6 * np.diff(k)
    bad = np.flatnonzero(~(np.isfinite(a) & np.isfinite(b)))
    if bad.size == 0:
        return cells
    # the trapezoid is poor next to a singular knot too: integrate a window around it
    f = lambda x: float(np.exp(log_density(smile, x, 1, sign)))
    win = np.unique(np.clip(np.concatenate([bad + d for d in range(-SING_WINDOW, SING_WINDOW + 1)]), 0, cells.size - 1))
    for i in win:
        cells[i] = quad(f, k[i], k[i + 1], limit=200)[0]
    return cells


def _tail(smile: Smile, lo: float, hi: float, sign: int) -> float:
    f = lambda x: float(np.exp(log_density(smile, x, 1, sign)))
    val, err = quad(f, lo, hi, limit=200)
    if not math.isfinite(val):
        raise TailError(f"tail integral on [{lo}, {hi}] did not converge")
    return val


def _check_slice(smile: Smile, k: np.ndarray, tol: float) -> float:
    v = _arr(smile(k))
    if np.any(~(v > 0)):
        raise ArbitrageError("total variance must be positive on the slice")
    kn = np.asarray(smile.knots, dtype=float)
    off = ~np.isin(k, kn)
    lv = _arr(smile.L(k[off], 1))
    finite = lv[np.isfinite(lv)]
    lmin = float(finite.min()) if finite.size else math.inf
    if lmin < -tol:
        i = int(np.nanargmin(np.where(np.isfinite(lv), lv, np.inf)))
        raise ArbitrageError(f"L v = {lv[i]:.3g} < 0 at k = {k[off][i]:.6g}: butterfly arbitrage")
    if any(j < -tol for j in smile.jumps):
        raise ArbitrageError("negative jump of v' at a knot: butterfly arbitrage")
    return lmin


def density(source, t: float | None = None, k_grid=None, tol: float = L_TOL) -> DensitySlice:
    """Density slice of a surface at maturity ``t`` (or of a :class:`Smile`).

    Mass and mean of e^k are cellwise Simpson sums on the grid, plus
    quadrature of the two tails beyond it, plus the atoms. Raises ArbitrageError when L v < -tol
    at a grid point or a v' jump is negative.
    """
    smile = _as_smile(source, t)
    k = default_k_grid() if k_grid is None else np.asarray(k_grid, dtype=float)
    if k.ndim != 1 or k.size < 3 or np.any(np.diff(k) <= 0):
        raise DomainError("k grid must be strictly increasing with at least 3 points")
    inside = [a for a in smile.knots if k[0] < a < k[-1]]
    k = np.unique(np.concatenate([k, inside]))
    lmin = _check_slice(smile, k, tol)

    pm_cells = _cell_integrals(smile, k, -1)
    pp_cells = _cell_integrals(smile, k, +1)
    lo_m = _tail(smile, -np.inf, k[0], -1)
    hi_m = _tail(smile, k[-1], np.inf, -1)
    lo_p = _tail(smile, -np.inf, k[0], +1)
    hi_p = _tail(smile, k[-1], np.inf, +1)

    atoms = []
    for a, j in zip(smile.knots, smile.jumps):
        if j == 0:
            continue
        v = float(smile(a))
        dm = -a / math.sqrt(v) - math.sqrt(v) / 2
        atoms.append((float(a), float(j / 2 * math.exp(-dm * dm / 2) / math.sqrt(2 * math.pi * v))))

    step = np.zeros(k.size)
    for a, m in atoms:
        step[k >= a] += m
    cont = lo_m + np.concatenate([[0.0], np.cumsum(pm_cells)])
    cdf = cont + step
    at_atom = np.zeros(k.size)
    for a, m in atoms:
        at_atom[k == a] += m
    cdf_left = cdf - at_atom

    def pointwise(sign):
        r = np.exp(log_density(smile, k, +1, sign))
        l = np.exp(log_density(smile, k, -1, sign))
        return np.where(np.isin(k, smile.knots), 0.5 * (r + l), r)

    mass = float(cont[-1] + hi_m + sum(m for _, m in atoms))
    mean_exp = float(lo_p + pp_cells.sum() + hi_p + sum(math.exp(a) * m for a, m in atoms))
    if not (math.isfinite(mass) and math.isfinite(mean_exp)):
        raise TailError("density integrals are not finite")
    return DensitySlice(
        k=k, p_minus=pointwise(-1), p_plus=pointwise(+1),
        cdf=cdf, cdf_left=cdf_left, atoms=tuple(atoms),
        mass=mass, mean_exp=mean_exp, tail_mass=(float(lo_m), float(hi_m)),
        t=smile.t, min_L=lmin,
    )


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------


def _inverse_table(ds: DensitySlice) -> tuple[np.ndarray, np.ndarray]:
    """(F, k) nodes for inversion, with a vertical step at each atom."""
    ks, fs = [], []
    for i, kk in enumerate(ds.k):
        if ds.cdf_left[i] != ds.cdf[i]:
            ks.append(kk)
            fs.append(ds.cdf_left[i])
        ks.append(kk)
        fs.append(ds.cdf[i])
    f = np.maximum.accumulate(np.asarray(fs)) / ds.mass
    return f, np.asarray(ks)


def cdf_inverse_sample(ds: DensitySlice, uniforms, tol: float = DENSITY_TOL):
    """Quantiles k = F^{-1}(u) by monotone interpolation of the cdf.

    A uniform falling inside an atom's step maps exactly to the atom.
    """
    u = _arr(uniforms)
    if np.any((u <= 0) | (u >= 1)):
        raise DomainError("uniforms must lie in (0, 1)")
    if abs(ds.mass - 1) > tol:
        raise PreconditionError(f"slice mass {ds.mass:.6g} is not within {tol:g} of 1")
    f, ks = _inverse_table(ds)
    out = np.interp(u, f, ks)
    for a, m in ds.atoms:
        j = int(np.searchsorted(ds.k, a))
        lo, hi = ds.cdf_left[j] / ds.mass, ds.cdf[j] / ds.mass
        out = np.where((u >= lo) & (u <= hi), a, out)
    return _ret(out, uniforms)


def antithetic_uniforms(n: int, seed: int | None = 0) -> np.ndarray:
    """n uniforms (n even) as u, 1 - u pairs from a seeded generator."""
    rng = np.random.default_rng(seed)
    half = rng.random((n + 1) // 2)
    half = np.clip(half, 1e-16, 1 - 1e-16)
    return np.concatenate([half, 1 - half])[:n]


def sample(ds: DensitySlice, n: int, seed: int | None = 0, antithetic: bool = True) -> np.ndarray:
    """Log-moneyness samples from the slice."""
    if antithetic:
        u = antithetic_uniforms(n, seed)
    else:
        u = np.clip(np.random.default_rng(seed).random(n), 1e-16, 1 - 1e-16)
    return cdf_inverse_sample(ds, u)


# ---------------------------------------------------------------------------
# diagnostics
# ---------------------------------------------------------------------------


@dataclass
class TailDiagnostics:
    k_neg: tuple[float, ...]
    d_minus_neg: tuple[float, ...]
    k_pos: tuple[float, ...]
    d_plus_pos: tuple[float, ...]
    boundary_neg: tuple[float, ...]
    boundary_pos: tuple[float, ...]

    @property
    def smb_trend(self) -> bool:
        """d_- increasing as k -> -inf (towards +inf)."""
        return bool(np.all(np.diff(self.d_minus_neg) > 0))

    @property
    def lmb_trend(self) -> bool:
        """d_+ decreasing as k -> +inf (towards -inf)."""
        return bool(np.all(np.diff(self.d_plus_pos) < 0))

    @property
    def boundary_max(self) -> float:
        return float(max(np.abs(self.boundary_neg[-1]), np.abs(self.boundary_pos[-1])))


def smb_lmb_diagnostics(source, t: float | None = None, scales=(1e2, 1e3, 1e4)) -> TailDiagnostics:
    """d_- at k = -scales, d_+ at k = +scales and the boundary term of D at both ends."""
    smile = _as_smile(source, t)
    kp = np.asarray(scales, dtype=float)
    kn = -kp

    def d(k, sign):
        sv = np.sqrt(_arr(smile(k)))
        return -k / sv + sign * sv / 2

    def boundary(k):
        v = _arr(smile(k))
        dm = d(k, -1)
        with np.errstate(under="ignore"):
            return _arr(smile.d1(k)) / (2 * np.sqrt(2 * np.pi * v)) * np.exp(-dm**2 / 2)

    t_ = lambda a: tuple(float(x) for x in a)
    return TailDiagnostics(
        t_(kn), t_(d(kn, -1)), t_(kp), t_(d(kp, +1)), t_(boundary(kn)), t_(boundary(kp))
    )


@dataclass
class SlopeBounds:
    upper_margin: float
    lower_margin: float

    @property
    def ok(self) -> bool:
        return self.upper_margin > 0 and self.lower_margin > 0


def slope_bounds(source, t: float | None = None, k_grid=None) -> SlopeBounds:
    """Margins in v'(k) < sqrt(2 v / k) (k > 0) and v'(k) > -4."""
    smile = _as_smile(source, t)
    k = np.linspace(-20, 20, 4001) if k_grid is None else np.asarray(k_grid, dtype=float)
    dv = _arr(smile.d1(k, 1))
    pos = k > 0
    up = np.sqrt(2 * _arr(smile(k[pos])) / k[pos]) - dv[pos]
    return SlopeBounds(float(up.min()) if up.size else math.inf, float((dv + 4).min()))


# ---------------------------------------------------------------------------
# critical moment
# ---------------------------------------------------------------------------


def critical_moment(alpha: float) -> float:
    """sup{m >= 0 : E X^(1+m) < inf} = (alpha/4 - 1 + 1/alpha) / 2 for right-wing slope alpha."""
    if not 0 < alpha <= 2:
        raise PreconditionError(f"right-wing slope {alpha:g} outside (0, 2]")
    return 0.5 * (alpha / 4 - 1 + 1 / alpha)


def tail_polynomial(m: float, alpha: float) -> float:
    """P_m(alpha) / alpha = ((alpha - 2)^2 - 8 m alpha) / (8 alpha); positive iff m < m*."""
    return ((alpha - 2) ** 2 - 8 * m * alpha) / (8 * alpha)


def estimate_slope(smile: Smile, k_lo: float = 50.0, k_hi: float = 200.0, n: int = 301) -> float:
    k = np.linspace(k_lo, k_hi, n)
    return float(np.polyfit(k, _arr(smile(k)), 1)[0])


def _log_moment_integral(smile: Smile, m: float, k_hi: float, base: np.ndarray) -> float:
    k = np.concatenate([base, np.linspace(base[-1], k_hi, max(2, int(k_hi - base[-1]) * 4 + 1))[1:]])
    lg = (1 + m) * k + log_density(smile, k, 1, -1)
    dk = np.diff(k)
    cell = np.logaddexp(lg[:-1], lg[1:]) + np.log(dk / 2)
    return float(logsumexp(cell))


@dataclass
class MomentReport:
    alpha: float
    alpha_fit: float
    m_star: float
    bracket: tuple[float, float]
    tail_rate: float

    def contains(self, value: float, slack: float = 0.0) -> bool:
        return self.bracket[0] - slack <= value <= self.bracket[1] + slack


def moment_bracket(
    smile: Smile, m_grid=None, k0: float = K_MAX, doublings: int = 8, growth: float = 0.10
) -> tuple[float, float]:
    """Largest m with a convergent and smallest with a divergent moment integral.

    The integral of e^((1+m) k) p_- over [-k0, k0 2^i] counts as divergent
    when the last doubling grows it by more than ``growth``.
    """
    m = np.arange(0.0, 1.0 + 1e-12, 0.005) if m_grid is None else np.asarray(m_grid, dtype=float)
    base = np.linspace(-k0, k0, 16001)
    kn = np.asarray(smile.knots)
    base = base[~np.isin(base, kn)]
    lo, hi = -math.inf, math.inf
    for mm in m:
        a = _log_moment_integral(smile, mm, k0 * 2 ** (doublings - 1), base)
        b = _log_moment_integral(smile, mm, k0 * 2**doublings, base)
        if b - a > math.log1p(growth):
            hi = float(mm)
            break
        lo = float(mm)
    return lo, hi


def critical_moment_from_slice(source, t: float | None = None, m_grid=None) -> MomentReport:
    """Closed-form m* from the analytic right-wing slope, plus numerical evidence.

    ``alpha_fit`` is the least-squares slope of v on [50, 200]; ``tail_rate``
    is the fitted slope of log(e^((1+m*) k) p_-) there, which tends to 0.
    """
    smile = _as_smile(source, t)
    fit = estimate_slope(smile)
    alpha = smile.slope_pos if smile.slope_pos is not None else fit
    if not 0 < fit < 2 + 1e-6:
        raise PreconditionError(f"estimated right-wing slope {fit:g} outside (0, 2)")
    ms = critical_moment(alpha)
    k = np.linspace(50, 200, 301)
    rate = float(np.polyfit(k, (1 + ms) * k + log_density(smile, k, 1, -1), 1)[0])
    return MomentReport(float(alpha), fit, ms, moment_bracket(smile, m_grid), rate)

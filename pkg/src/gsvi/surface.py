"""Generalised SVI surfaces w(k, t) = theta_t * Psi(k * phi(theta_t)).

The three building blocks are plain frozen dataclasses holding vectorised
callables:

* :class:`PsiShape`  -- smile shape Psi in the rescaled variable z = k * phi(theta),
  possibly with kinks (knots) where Psi' jumps;
* :class:`PhiCurve`  -- the scale function phi(u);
* :class:`ThetaCurve` -- the ATM total-variance term structure theta_t.

Catalog families (SVI, the two non-SVI shapes, and a handful of phi/theta
families) carry analytic derivatives. User-supplied shapes may omit
derivatives, in which case central differences are used.
"""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass, field, fields

import numpy as np

from .errors import ConfigError, DomainError, KnotError, ParameterError

ArrayFn = Callable[..., np.ndarray]

FD_STEP = 1e-5
FD_STEP2 = 1e-4


def _arr(x) -> np.ndarray:
    return np.asarray(x, dtype=float)


def _ret(x, like):
    """Return a float for scalar input, an array otherwise."""
    out = np.asarray(x, dtype=float)
    if np.ndim(like) == 0:
        return float(out)
    return out


def _side_sign(z: np.ndarray, side: int) -> np.ndarray:
    """sign(z), replaced by ``side`` at z == 0 (nan when side == 0)."""
    s = np.sign(z)
    at0 = z == 0
    if np.any(at0):
        s = np.where(at0, float(side) if side else np.nan, s)
    return s


# ---------------------------------------------------------------------------
# finite-difference fallbacks
# ---------------------------------------------------------------------------


def _near_knot(z: np.ndarray, knots: tuple[float, ...], h: np.ndarray):
    """Signed offset to the closest knot, and a mask of points within 2h of one."""
    if not knots:
        return np.zeros_like(z), np.zeros(z.shape, dtype=bool)
    kn = np.asarray(knots, dtype=float)
    idx = np.abs(z[..., None] - kn).argmin(axis=-1)
    off = z - kn[idx]
    return off, np.abs(off) < 2 * h


def _fd_first(fun, z, side: int, knots, rel_step: float) -> np.ndarray:
    z = _arr(z)
    h = rel_step * np.maximum(1.0, np.abs(z))
    central = (fun(z + h) - fun(z - h)) / (2 * h)
    off, near = _near_knot(z, knots, h)
    if not np.any(near):
        return central
    fwd = (-3 * fun(z) + 4 * fun(z + h) - fun(z + 2 * h)) / (2 * h)
    bwd = (3 * fun(z) - 4 * fun(z - h) + fun(z - 2 * h)) / (2 * h)
    use_fwd = near & ((off > 0) | ((off == 0) & (side > 0)))
    use_bwd = near & ((off < 0) | ((off == 0) & (side < 0)))
    out = np.where(use_fwd, fwd, np.where(use_bwd, bwd, central))
    return np.where(near & (off == 0) & (side == 0), np.nan, out)


def _fd_second(fun, z, side: int, knots, rel_step: float) -> np.ndarray:
    z = _arr(z)
    h = rel_step * np.maximum(1.0, np.abs(z))
    f0 = fun(z)
    central = (fun(z + h) - 2 * f0 + fun(z - h)) / h**2
    off, near = _near_knot(z, knots, 1.5 * h)
    if not np.any(near):
        return central
    fwd = (2 * f0 - 5 * fun(z + h) + 4 * fun(z + 2 * h) - fun(z + 3 * h)) / h**2
    bwd = (2 * f0 - 5 * fun(z - h) + 4 * fun(z - 2 * h) - fun(z - 3 * h)) / h**2
    use_fwd = near & ((off > 0) | ((off == 0) & (side > 0)))
    use_bwd = near & ((off < 0) | ((off == 0) & (side < 0)))
    out = np.where(use_fwd, fwd, np.where(use_bwd, bwd, central))
    return np.where(near & (off == 0) & (side == 0), np.nan, out)


# ---------------------------------------------------------------------------
# the three building blocks
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PsiShape:
    """Smile shape Psi: R -> (0, inf) with Psi(0) = 1.

    ``deriv1`` and ``deriv2`` take ``(z, side)``; ``side`` only matters at a
    knot, where -1/+1 select the one-sided limit and 0 yields nan.
    ``jumps[i]`` is Psi'(knots[i]+) - Psi'(knots[i]-).
    """

    value: ArrayFn
    deriv1: ArrayFn | None = None
    deriv2: ArrayFn | None = None
    knots: tuple[float, ...] = ()
    jumps: tuple[float, ...] = ()
    asym_slope_pos: float | None = None
    asym_slope_neg: float | None = None
    name: str = "custom"

    def __post_init__(self):
        object.__setattr__(self, "knots", tuple(float(a) for a in self.knots))
        object.__setattr__(self, "jumps", tuple(float(a) for a in self.jumps))
        if len(self.knots) != len(self.jumps):
            raise ParameterError("knots and jumps must have the same length")
        if list(self.knots) != sorted(set(self.knots)):
            raise ParameterError("knots must be strictly increasing")

    def __call__(self, z):
        return _ret(self.value(_arr(z)), z)

    def d1(self, z, side: int = 0):
        za = _arr(z)
        if self.deriv1 is not None:
            return _ret(self.deriv1(za, side), z)
        return _ret(_fd_first(self.value, za, side, self.knots, FD_STEP), z)

    def d2(self, z, side: int = 0):
        za = _arr(z)
        if self.deriv2 is not None:
            return _ret(self.deriv2(za, side), z)
        if self.deriv1 is not None:
            return _ret(
                _fd_first(lambda x: self.deriv1(x, side), za, side, self.knots, FD_STEP), z
            )
        return _ret(_fd_second(self.value, za, side, self.knots, FD_STEP2), z)

    def at_knot(self, z) -> np.ndarray:
        za = _arr(z)
        if not self.knots:
            return np.zeros(za.shape, dtype=bool)
        return np.isin(za, np.asarray(self.knots))

    @property
    def asymptotically_linear(self) -> bool:
        return (
            self.asym_slope_pos is not None
            and self.asym_slope_neg is not None
            and self.asym_slope_pos != 0
            and self.asym_slope_neg != 0
        )


@dataclass(frozen=True)
class PhiCurve:
    """Scale function phi: (0, inf) -> (0, inf).

    ``m_infinity`` is the limit of u * phi(u) as u grows (math.inf if it diverges).
    """

    value: ArrayFn
    deriv: ArrayFn | None = None
    limit_at_zero: float | None = None
    m_infinity: float | None = None
    name: str = "custom"

    def __call__(self, u):
        return _ret(self.value(_arr(u)), u)

    def d1(self, u):
        ua = _arr(u)
        if self.deriv is not None:
            return _ret(self.deriv(ua), u)
        h = FD_STEP * ua
        return _ret((self.value(ua + h) - self.value(ua - h)) / (2 * h), u)


@dataclass(frozen=True)
class ThetaCurve:
    """ATM total variance theta_t (total-variance units).

    ``theta_infinity`` is the limit at t -> inf; ``sup_value`` is the supremum
    of theta over t > 0, which differs from it only for non-monotone curves.
    """

    value: ArrayFn
    deriv: ArrayFn | None = None
    theta_infinity: float = math.inf
    sup_value: float | None = None
    name: str = "custom"

    def __post_init__(self):
        if self.sup_value is None:
            object.__setattr__(self, "sup_value", self.theta_infinity)

    def __call__(self, t):
        return _ret(self.value(_arr(t)), t)

    def d1(self, t):
        ta = _arr(t)
        if self.deriv is not None:
            return _ret(self.deriv(ta), t)
        h = FD_STEP * ta
        return _ret((self.value(ta + h) - self.value(ta - h)) / (2 * h), t)


@dataclass(frozen=True)
class GenSurface:
    psi: PsiShape
    phi: PhiCurve
    theta: ThetaCurve
    config: SurfaceConfig | None = field(default=None, compare=False)

    def z(self, k, t):
        th = self.theta(t)
        return _arr(k) * self.phi(th)

    def w(self, k, t):
        return eval_w(self, k, t)


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------


def _check_t(t):
    if np.any(_arr(t) <= 0):
        raise DomainError("maturity t must be positive")


def eval_w(surface: GenSurface, k, t):
    """Total implied variance theta_t * Psi(k * phi(theta_t))."""
    _check_t(t)
    th = _arr(surface.theta(t))
    z = _arr(k) * _arr(surface.phi(th))
    out = th * _arr(surface.psi(z))
    return _ret(out, np.broadcast_arrays(_arr(k), _arr(t))[0])


@dataclass(frozen=True)
class Partials:
    w: float | np.ndarray
    w_k: float | np.ndarray
    w_kk: float | np.ndarray
    w_t: float | np.ndarray


def eval_w_partials(surface: GenSurface, k, t, side: int = 0) -> Partials:
    """Analytic (w, dw/dk, d2w/dk2, dw/dt) via the chain rule.

    The second derivative is the classical one; atoms from kinks in Psi
    are reported by :func:`gsvi.bs.op_L`, not here.
    """
    _check_t(t)
    k_a, t_a = np.broadcast_arrays(_arr(k), _arr(t))
    th = _arr(surface.theta(t_a))
    dth = _arr(surface.theta.d1(t_a))
    ph = _arr(surface.phi(th))
    dph = _arr(surface.phi.d1(th))
    z = k_a * ph
    if side == 0 and np.any(surface.psi.at_knot(z)):
        raise KnotError("k * phi(theta_t) lies on a knot of Psi; pass side=-1 or +1")
    p0 = _arr(surface.psi(z))
    p1 = _arr(surface.psi.d1(z, side))
    p2 = _arr(surface.psi.d2(z, side))
    w = th * p0
    w_k = th * p1 * ph
    w_kk = th * p2 * ph**2
    w_t = dth * p0 + th * p1 * k_a * dph * dth
    return Partials(*(_ret(x, k_a) for x in (w, w_k, w_kk, w_t)))


def func_F(psi: PsiShape, z, side: int = 0):
    """z * Psi'(z) / Psi(z); zero at the origin even when 0 is a knot."""
    za = _arr(z)
    bad = psi.at_knot(za) & (za != 0)
    if side == 0 and np.any(bad):
        raise KnotError("F evaluated at a knot of Psi without a side")
    with np.errstate(invalid="ignore"):
        out = za * _arr(psi.d1(za, side if side else 1)) / _arr(psi(za))
    out = np.where(za == 0, 0.0, out)
    return _ret(out, z)


def func_f(phi: PhiCurve, u):
    """u * phi'(u) / phi(u) for u > 0."""
    ua = _arr(u)
    if np.any(ua <= 0):
        raise DomainError("f(u) needs u > 0")
    return _ret(ua * _arr(phi.d1(ua)) / _arr(phi(ua)), u)


@dataclass(frozen=True)
class SlopeEstimate:
    neg: float
    pos: float
    linear: bool


def _aitken_limit(seq: np.ndarray) -> tuple[float, float]:
    """Aitken-extrapolated limit of a sequence and the change of the last two estimates."""
    est = []
    for i in range(len(seq) - 2):
        s0, s1, s2 = seq[i : i + 3]
        den = s2 - 2 * s1 + s0
        if abs(den) < 1e-300 or not np.isfinite(den):
            est.append(s2)
        else:
            est.append(s2 - (s2 - s1) ** 2 / den)
    est = np.asarray(est)
    return float(est[-1]), float(abs(est[-1] - est[-2]))


def asymptotic_slopes(psi: PsiShape, tol: float = 1e-6) -> SlopeEstimate:
    """Numerical limits of Psi' at -inf and +inf from a geometric z-grid.

    The sequence Psi'(10**j), j = 1..6, is accelerated with Aitken's
    delta-squared process, which is exact for errors decaying like a power of z.
    """
    zs = 10.0 ** np.arange(1, 7)
    out = []
    ok = True
    for sgn in (-1.0, 1.0):
        with np.errstate(all="ignore"):
            seq = _arr(psi.d1(sgn * zs, 1))
        if not np.all(np.isfinite(seq)):
            out.append(math.nan)
            ok = False
            continue
        lim, change = _aitken_limit(seq)
        out.append(lim)
        if not (np.isfinite(lim) and change <= tol * max(1.0, abs(lim)) and abs(lim) > tol):
            ok = False
    return SlopeEstimate(neg=out[0], pos=out[1], linear=ok)


# ---------------------------------------------------------------------------
# catalog families
# ---------------------------------------------------------------------------


def svi_psi(rho: float = 0.0) -> PsiShape:
    """Normalised SVI: (1 + rho z + sqrt(z^2 + 2 rho z + 1)) / 2."""
    if not -1 < rho < 1:
        raise ParameterError("SVI needs rho in (-1, 1)")

    def value(z):
        return 0.5 * (1 + rho * z + np.sqrt(z * z + 2 * rho * z + 1))

    def d1(z, side=0):
        return 0.5 * (rho + (z + rho) / np.sqrt(z * z + 2 * rho * z + 1))

    def d2(z, side=0):
        return 0.5 * (1 - rho**2) / (z * z + 2 * rho * z + 1) ** 1.5

    return PsiShape(
        value, d1, d2,
        asym_slope_pos=0.5 * (1 + rho),
        asym_slope_neg=0.5 * (rho - 1),
        name=f"svi(rho={rho:g})",
    )


def sqrt_psi() -> PsiShape:
    """|z| + (1 + sqrt(1 + |z|)) / 2, kinked at 0 with Psi' jump 5/2."""

    def value(z):
        a = np.abs(z)
        return a + 0.5 * (1 + np.sqrt(1 + a))

    def d1(z, side=0):
        s = _side_sign(z, side)
        return s * (1 + 0.25 / np.sqrt(1 + np.abs(z)))

    def d2(z, side=0):
        out = -0.125 / (1 + np.abs(z)) ** 1.5
        if side == 0:
            out = np.where(z == 0, np.nan, out)
        return out

    return PsiShape(
        value, d1, d2,
        knots=(0.0,), jumps=(2.5,),
        asym_slope_pos=1.0, asym_slope_neg=-1.0,
        name="nonsvi_sqrt",
    )


def power_psi(nu: float) -> PsiShape:
    """(1 + |z|^nu)^(1/nu) for nu > 1.

    Psi' is continuous at 0 (both one-sided values vanish), so the declared
    jump is 0; for nu < 2 Psi'' blows up at 0 and the origin is declared a
    knot, for nu >= 2 the shape is C^2 and has no knot.
    """
    if not nu > 1:
        raise ParameterError("power shape needs nu > 1")

    # log-space forms keep large nu and large |z| finite
    def logs(z):
        a = np.abs(z)
        with np.errstate(divide="ignore"):
            la = np.log(a)
        return a, la, np.logaddexp(0.0, nu * la)

    def value(z):
        _, _, lg = logs(z)
        return np.exp(lg / nu)

    def d1(z, side=0):
        a, la, lg = logs(z)
        with np.errstate(invalid="ignore"):
            out = np.exp((nu - 1) * la + (1 / nu - 1) * lg)
        return np.sign(z) * np.where(a == 0, 0.0, out)

    def d2(z, side=0):
        a, la, lg = logs(z)
        with np.errstate(invalid="ignore", over="ignore"):
            out = (nu - 1) * np.exp((nu - 2) * la + (1 / nu - 2) * lg)
        at0 = 0.0 if nu > 2 else ((nu - 1) if nu == 2 else np.inf)
        out = np.where(a == 0, at0, out)
        if nu < 2 and side == 0:
            out = np.where(z == 0, np.nan, out)
        return out

    singular = nu < 2
    return PsiShape(
        value, d1, d2,
        knots=(0.0,) if singular else (),
        jumps=(0.0,) if singular else (),
        asym_slope_pos=1.0, asym_slope_neg=-1.0,
        name=f"nonsvi_power(nu={nu:g})",
    )


def exp_phi(alpha: float = 1.0) -> PhiCurve:
    """alpha * (1 - exp(-u)) / u, so that u * phi(u) increases to alpha."""
    if not alpha > 0:
        raise ParameterError("phi alpha must be positive")

    def value(u):
        return alpha * np.where(u > 0, -np.expm1(-u) / np.where(u > 0, u, 1), 1.0)

    def deriv(u):
        us = np.where(u > 1e-4, u, 1.0)
        big = (us * np.exp(-us) + np.expm1(-us)) / us**2
        small = -0.5 + u / 3 - u * u / 8
        return alpha * np.where(u > 1e-4, big, small)

    return PhiCurve(value, deriv, limit_at_zero=alpha, m_infinity=alpha, name=f"exp(alpha={alpha:g})")


def power_phi(gamma: float) -> PhiCurve:
    """u^(-gamma); u * phi(u) is monotone iff gamma <= 1."""
    if not gamma > 0:
        raise ParameterError("phi power exponent must be positive")
    if gamma < 1:
        m_inf = math.inf
    elif gamma == 1:
        m_inf = 1.0
    else:
        m_inf = 0.0
    return PhiCurve(
        lambda u: u ** (-gamma),
        lambda u: -gamma * u ** (-gamma - 1),
        limit_at_zero=None,
        m_infinity=m_inf,
        name=f"power(gamma={gamma:g})",
    )


def const_phi(c: float) -> PhiCurve:
    if not c > 0:
        raise ParameterError("constant phi must be positive")
    return PhiCurve(
        lambda u: np.full_like(u, c, dtype=float),
        lambda u: np.zeros_like(u, dtype=float),
        limit_at_zero=c,
        m_infinity=math.inf,
        name=f"const({c:g})",
    )


def heston_phi(lam: float) -> PhiCurve:
    """Heston-like scale (1/(lam u)) * (1 - (1 - exp(-lam u)) / (lam u))."""
    if not lam > 0:
        raise ParameterError("heston phi needs lambda > 0")

    def h(x):
        xs = np.where(x > 1e-4, x, 1.0)
        big = (xs + np.expm1(-xs)) / xs**2
        small = 0.5 - x / 6 + x * x / 24
        return np.where(x > 1e-4, big, small)

    def dh(x):
        xs = np.where(x > 1e-4, x, 1.0)
        big = -(1 + np.exp(-xs)) / xs**2 - 2 * np.expm1(-xs) / xs**3
        small = -1 / 6 + x / 12 - x * x / 40
        return np.where(x > 1e-4, big, small)

    return PhiCurve(
        lambda u: h(lam * u),
        lambda u: lam * dh(lam * u),
        limit_at_zero=0.5,
        m_infinity=1 / lam,
        name=f"heston(lambda={lam:g})",
    )


def linear_theta(a: float = 1.0) -> ThetaCurve:
    if not a > 0:
        raise ParameterError("theta slope must be positive")
    return ThetaCurve(lambda t: a * t, lambda t: np.full_like(t, a, dtype=float), name=f"linear(a={a:g})")


def power_theta(a: float = 1.0, p: float = 0.5) -> ThetaCurve:
    if not (a > 0 and 0 < p <= 1):
        raise ParameterError("power theta needs a > 0 and p in (0, 1]")
    return ThetaCurve(lambda t: a * t**p, lambda t: a * p * t ** (p - 1), name=f"power(a={a:g},p={p:g})")


def saturating_theta(inf: float = 1.0, lam: float = 1.0) -> ThetaCurve:
    if not (inf > 0 and lam > 0):
        raise ParameterError("saturating theta needs positive limit and rate")
    return ThetaCurve(
        lambda t: -inf * np.expm1(-lam * t),
        lambda t: inf * lam * np.exp(-lam * t),
        theta_infinity=inf,
        name=f"saturating(inf={inf:g},lambda={lam:g})",
    )


def decay_theta(a: float = 1.0, lam: float = 1.0) -> ThetaCurve:
    """a * exp(-lam t): decreasing, so it always carries calendar arbitrage."""
    if not (a > 0 and lam > 0):
        raise ParameterError("decay theta needs positive level and rate")
    return ThetaCurve(
        lambda t: a * np.exp(-lam * t),
        lambda t: -a * lam * np.exp(-lam * t),
        theta_infinity=0.0,
        sup_value=a,
        name=f"decay(a={a:g},lambda={lam:g})",
    )


# ---------------------------------------------------------------------------
# configuration (key=value text)
# ---------------------------------------------------------------------------

PSI_KINDS = ("svi", "nonsvi_sqrt", "nonsvi_power")
PHI_KINDS = ("exp", "power", "const", "heston")
THETA_KINDS = ("linear", "power", "saturating", "decay")

_KEYS = {
    "psi.kind": "psi_kind",
    "psi.rho": "rho",
    "psi.nu": "nu",
    "phi.kind": "phi_kind",
    "phi.alpha": "phi_alpha",
    "theta.kind": "theta_kind",
    "theta.a": "theta_a",
    "theta.p": "theta_p",
    "theta.lambda": "theta_lambda",
    "theta.inf": "theta_inf",
}

_USED = {
    ("psi", "svi"): ("psi.rho",),
    ("psi", "nonsvi_sqrt"): (),
    ("psi", "nonsvi_power"): ("psi.nu",),
    ("theta", "linear"): ("theta.a",),
    ("theta", "power"): ("theta.a", "theta.p"),
    ("theta", "saturating"): ("theta.inf", "theta.lambda"),
    ("theta", "decay"): ("theta.a", "theta.lambda"),
}


@dataclass(frozen=True)
class SurfaceConfig:
    """Serializable description of a catalog surface."""

    psi_kind: str = "nonsvi_sqrt"
    rho: float = 0.0
    nu: float = 3.5
    phi_kind: str = "exp"
    phi_alpha: float = 1.0
    theta_kind: str = "linear"
    theta_a: float = 1.0
    theta_p: float = 0.5
    theta_lambda: float = 1.0
    theta_inf: float = 1.0

    def __post_init__(self):
        if self.psi_kind not in PSI_KINDS:
            raise ConfigError(f"unknown psi.kind {self.psi_kind!r}")
        if self.phi_kind not in PHI_KINDS:
            raise ConfigError(f"unknown phi.kind {self.phi_kind!r}")
        if self.theta_kind not in THETA_KINDS:
            raise ConfigError(f"unknown theta.kind {self.theta_kind!r}")

    def keys(self) -> list[str]:
        out = ["psi.kind", *_USED[("psi", self.psi_kind)], "phi.kind", "phi.alpha", "theta.kind"]
        return out + list(_USED[("theta", self.theta_kind)])

    def to_text(self) -> str:
        lines = []
        for key in self.keys():
            val = getattr(self, _KEYS[key])
            lines.append(f"{key}={val if isinstance(val, str) else repr(float(val))}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> SurfaceConfig:
        kw = {}
        for n, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {n}: expected key=value, got {raw!r}")
            key, val = (s.strip() for s in line.split("=", 1))
            if key not in _KEYS:
                raise ConfigError(f"line {n}: unknown key {key!r}")
            attr = _KEYS[key]
            if attr.endswith("kind"):
                kw[attr] = val
            else:
                try:
                    kw[attr] = float(val)
                except ValueError:
                    raise ConfigError(f"line {n}: {key} is not a number: {val!r}") from None
        return cls(**kw)

    def replace(self, **changes) -> SurfaceConfig:
        names = {f.name for f in fields(self)}
        bad = set(changes) - names
        if bad:
            raise ConfigError(f"unknown config fields {sorted(bad)}")
        return SurfaceConfig(**{**{n: getattr(self, n) for n in names}, **changes})


def build_psi(cfg: SurfaceConfig) -> PsiShape:
    if cfg.psi_kind == "svi":
        return svi_psi(cfg.rho)
    if cfg.psi_kind == "nonsvi_sqrt":
        return sqrt_psi()
    return power_psi(cfg.nu)


def build_phi(cfg: SurfaceConfig) -> PhiCurve:
    return {"exp": exp_phi, "power": power_phi, "const": const_phi, "heston": heston_phi}[
        cfg.phi_kind
    ](cfg.phi_alpha)


def build_theta(cfg: SurfaceConfig) -> ThetaCurve:
    if cfg.theta_kind == "linear":
        return linear_theta(cfg.theta_a)
    if cfg.theta_kind == "power":
        return power_theta(cfg.theta_a, cfg.theta_p)
    if cfg.theta_kind == "saturating":
        return saturating_theta(cfg.theta_inf, cfg.theta_lambda)
    return decay_theta(cfg.theta_a, cfg.theta_lambda)


def build_surface(cfg: SurfaceConfig) -> GenSurface:
    return GenSurface(build_psi(cfg), build_phi(cfg), build_theta(cfg), config=cfg)


def load_surface(path) -> GenSurface:
    with open(path) as fh:
        return build_surface(SurfaceConfig.from_text(fh.read()))


_PRESETS = {
    "svi": dict(psi_kind="svi", phi_kind="heston", phi_alpha=1.0),
    "nonsvi_sqrt": dict(psi_kind="nonsvi_sqrt", phi_kind="exp", phi_alpha=1.0),
    "nonsvi_power": dict(psi_kind="nonsvi_power", phi_kind="exp", nu=3.5, phi_alpha=1.0),
}


def catalog(name: str, **params) -> GenSurface:
    """Named surfaces with theta_t = t by default.

    ``catalog("nonsvi_sqrt")`` and ``catalog("nonsvi_power", nu=..., alpha=...)``
    are the two non-SVI examples; ``catalog("svi", rho=...)`` uses a
    Heston-like phi unless ``phi_kind``/``alpha`` say otherwise.
    Any :class:`SurfaceConfig` field may be overridden; ``alpha`` is an alias
    for ``phi_alpha``.
    """
    if name not in _PRESETS:
        raise ConfigError(f"unknown surface {name!r}; choose from {sorted(_PRESETS)}")
    if "alpha" in params:
        params["phi_alpha"] = params.pop("alpha")
    return build_surface(SurfaceConfig().replace(**{**_PRESETS[name], **params}))

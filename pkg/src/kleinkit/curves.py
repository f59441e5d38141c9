"""Planar directrix curves, tube radius profiles and the end-closure checker.

Every evaluator is vectorised: ``t`` may be a float or any numpy array, and
points come back with a trailing axis of length 2.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import (
    DegenerateVelocity,
    DerivativeUnbounded,
    DomainMismatch,
    NonpositiveRadiusBase,
    OutOfDomain,
    RadiusNotPositive,
    ZeroParameter,
)

TWO_PI = 2.0 * math.pi
SPEED_TOLERANCE = 1e-9


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float
    lo_open: bool = False
    hi_open: bool = False

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @property
    def length(self) -> float:
        return self.hi - self.lo

    def check(self, t, allow_ends: bool = False) -> None:
        """Raise OutOfDomain unless every ``t`` lies in the interval.

        Open ends reject the endpoint itself unless ``allow_ends``.
        """
        t = np.asarray(t, dtype=float)
        if not np.all(np.isfinite(t)):
            raise OutOfDomain("non-finite parameter")
        lo_bad = t < self.lo if (allow_ends or not self.lo_open) else t <= self.lo
        hi_bad = t > self.hi if (allow_ends or not self.hi_open) else t >= self.hi
        if np.any(lo_bad) or np.any(hi_bad):
            bad = t[lo_bad | hi_bad] if t.ndim else t
            raise OutOfDomain(
                f"parameter {np.ravel(bad)[0]!r} outside {self.describe()}"
            )

    def clipped(self, margin: float) -> tuple[float, float]:
        """Closed sub-interval obtained by moving open ends inward by
        ``margin * length``; closed ends stay put."""
        m = margin * self.length
        lo = self.lo + m if self.lo_open else self.lo
        hi = self.hi - m if self.hi_open else self.hi
        return lo, hi

    def describe(self) -> str:
        return (
            f"{'(' if self.lo_open else '['}{self.lo:g}, "
            f"{self.hi:g}{')' if self.hi_open else ']'}"
        )

    def to_dict(self) -> dict:
        return {
            "lo": self.lo,
            "hi": self.hi,
            "lo_open": self.lo_open,
            "hi_open": self.hi_open,
        }


def _stack(x, y) -> np.ndarray:
    return np.stack(np.broadcast_arrays(x, y), axis=-1)


def rotate90(v) -> np.ndarray:
    """Quarter turn in the plane: (x, y) -> (-y, x)."""
    v = np.asarray(v, dtype=float)
    return _stack(-v[..., 1], v[..., 0])


# --------------------------------------------------------------------------
# curve families
# --------------------------------------------------------------------------


class CurveFamily(str, enum.Enum):
    PIRIFORM = "Piriform"
    CUSP_PIRIFORM = "CuspPiriform"
    DICKSON_PIRIFORM = "DicksonPiriform"
    DUMBBELL = "Dumbbell"
    TROTT_RATIONAL = "TrottRational"
    CIRCLE = "Circle"


def _piriform(p, t):
    a, b = p["a"], p["b"]
    s, c, s2, c2 = np.sin(t), np.cos(t), np.sin(2 * t), np.cos(2 * t)
    pos = _stack(a * (1 + s), b * (c + 0.5 * s2))
    vel = _stack(a * c, b * (-s + c2))
    acc = _stack(-a * s, b * (-c - 2 * s2))
    return pos, vel, acc


def _cusp_piriform(p, t):
    a, b = p["a"], p["b"]
    s, c, s2, c2 = np.sin(t), np.cos(t), np.sin(2 * t), np.cos(2 * t)
    pos = _stack(a * (1 - c), b * s * (1 - c))
    vel = _stack(a * s, b * (c - c2))
    acc = _stack(a * c, b * (-s + 2 * s2))
    return pos, vel, acc


def _dickson_piriform(p, t):
    a, b = p["a"], p["b"]
    s, c, s2, c2 = np.sin(t), np.cos(t), np.sin(2 * t), np.cos(2 * t)
    pos = _stack(a * c * (1 + s), b * s)
    vel = _stack(a * (-s + c2), b * c)
    acc = _stack(a * (-c - 2 * s2), -b * s)
    return pos, vel, acc


def _dumbbell(p, t):
    sx, sy = p["sx"], p["sy"]
    s, c = np.sin(t), np.cos(t)
    pos = _stack(sx * s, sy * s * s * c)
    vel = _stack(sx * c, sy * (2 * s * c * c - s**3))
    acc = _stack(-sx * s, sy * (2 * c**3 - 7 * s * s * c))
    return pos, vel, acc


def _trott(p, t):
    t = np.asarray(t, dtype=float)
    q = t**4 + 1
    dq = 4 * t**3
    ddq = 12 * t**2
    num = t**2 + t + 1
    dnum = 2 * t + 1
    x = 1 / q
    dx = -dq / q**2
    ddx = (2 * dq**2 - ddq * q) / q**3
    y = num / q
    w = dnum * q - num * dq
    dy = w / q**2
    ddy = (2 * q - num * ddq) / q**2 - 2 * dq * w / q**3
    return _stack(x, y), _stack(dx, dy), _stack(ddx, ddy)


def _circle(p, t):
    R = p["R"]
    s, c = np.sin(t), np.cos(t)
    return _stack(R * c, R * s), _stack(-R * s, R * c), _stack(-R * c, -R * s)


_CURVE_EVAL: dict[CurveFamily, Callable] = {
    CurveFamily.PIRIFORM: _piriform,
    CurveFamily.CUSP_PIRIFORM: _cusp_piriform,
    CurveFamily.DICKSON_PIRIFORM: _dickson_piriform,
    CurveFamily.DUMBBELL: _dumbbell,
    CurveFamily.TROTT_RATIONAL: _trott,
    CurveFamily.CIRCLE: _circle,
}


@dataclass(frozen=True)
class PlanarCurve:
    family: CurveFamily
    params: tuple[tuple[str, float], ...]
    domain: Interval
    # the truncated ends stand in for t -> -inf / +inf
    ends_at_infinity: bool = False

    @property
    def p(self) -> dict[str, float]:
        return dict(self.params)


@dataclass(frozen=True)
class CurveJet:
    position: np.ndarray
    velocity: np.ndarray
    acceleration: np.ndarray


def _nonzero(**kw):
    for name, value in kw.items():
        if value == 0:
            raise ZeroParameter(f"{name} must be nonzero")


def make_piriform(a: float, b: float) -> PlanarCurve:
    _nonzero(a=a, b=b)
    return PlanarCurve(
        CurveFamily.PIRIFORM, (("a", float(a)), ("b", float(b))), Interval(0.0, TWO_PI)
    )


def make_cusp_piriform(a: float, b: float) -> PlanarCurve:
    """Piriform re-parametrised to start and end at its cusp (open domain)."""
    _nonzero(a=a, b=b)
    return PlanarCurve(
        CurveFamily.CUSP_PIRIFORM,
        (("a", float(a)), ("b", float(b))),
        Interval(0.0, TWO_PI, lo_open=True, hi_open=True),
    )


def make_dickson_piriform(a: float = 6.0, b: float = 16.0) -> PlanarCurve:
    """Central curve of Dickson's bottle: (a cos t (1 + sin t), b sin t)."""
    _nonzero(a=a, b=b)
    return PlanarCurve(
        CurveFamily.DICKSON_PIRIFORM,
        (("a", float(a)), ("b", float(b))),
        Interval(0.0, TWO_PI),
    )


def make_dumbbell(sx: float, sy: float) -> PlanarCurve:
    _nonzero(sx=sx, sy=sy)
    return PlanarCurve(
        CurveFamily.DUMBBELL, (("sx", float(sx)), ("sy", float(sy))), Interval(0.0, math.pi)
    )


def make_trott_directrix(truncation: float = 20.0) -> PlanarCurve:
    if truncation <= 0:
        raise ValueError("truncation must be positive")
    T = float(truncation)
    return PlanarCurve(
        CurveFamily.TROTT_RATIONAL, (("T", T),), Interval(-T, T), ends_at_infinity=True
    )


def make_circle(R: float) -> PlanarCurve:
    _nonzero(R=R)
    return PlanarCurve(CurveFamily.CIRCLE, (("R", float(R)),), Interval(0.0, TWO_PI))


def _raw_jet(curve: PlanarCurve, t):
    return _CURVE_EVAL[curve.family](curve.p, np.asarray(t, dtype=float))


def eval_jet(curve: PlanarCurve, t) -> CurveJet:
    curve.domain.check(t)
    return CurveJet(*_raw_jet(curve, t))


def position(curve: PlanarCurve, t) -> np.ndarray:
    curve.domain.check(t)
    return _raw_jet(curve, t)[0]


def end_position(curve: PlanarCurve, end: str) -> np.ndarray:
    """Limit position at ``"start"`` or ``"end"`` (formulas are continuous there)."""
    t = curve.domain.lo if end == "start" else curve.domain.hi
    return _raw_jet(curve, t)[0]


def unit_tangent(curve: PlanarCurve, t, speed_tolerance: float = SPEED_TOLERANCE) -> np.ndarray:
    curve.domain.check(t, allow_ends=True)
    vel = _raw_jet(curve, t)[1]
    speed = np.linalg.norm(vel, axis=-1)
    if np.any(speed <= speed_tolerance):
        raise DegenerateVelocity(
            f"speed {float(np.min(speed)):.3g} at or below tolerance {speed_tolerance:g}"
        )
    return vel / speed[..., None]


def signed_curvature(curve: PlanarCurve, t) -> np.ndarray:
    _, v, a = _raw_jet(curve, t)
    speed = np.linalg.norm(v, axis=-1)
    return (v[..., 0] * a[..., 1] - v[..., 1] * a[..., 0]) / speed**3


# --------------------------------------------------------------------------
# radius profiles
# --------------------------------------------------------------------------


class RadiusFamily(str, enum.Enum):
    SQRT_CUSP = "SqrtCusp"
    SQRT_CUSP_HALF = "SqrtCuspHalf"
    TROTT = "TrottRationalRadius"
    CONSTANT = "Constant"


class EndBehavior(str, enum.Enum):
    FINITE = "finite_derivative"
    PLUS_INF = "derivative_plus_infinity"
    MINUS_INF = "derivative_minus_infinity"


def _sqrt_cusp(c, d, t):
    # c - d (t - pi) sqrt(t (2 pi - t)); value and derivative
    t = np.asarray(t, dtype=float)
    S2 = np.clip(t * (TWO_PI - t), 0.0, None)
    S = np.sqrt(S2)
    value = c - d * (t - math.pi) * S
    with np.errstate(divide="ignore", invalid="ignore"):
        deriv = -d * (S2 - (t - math.pi) ** 2) / S
    return value, deriv


def _r_sqrt_cusp(p, t):
    return _sqrt_cusp(p["c"], p["d"], t)


def _r_sqrt_cusp_half(p, t):
    value, deriv = _sqrt_cusp(p["c"], p["d"], 2 * np.asarray(t, dtype=float))
    return value, 2 * deriv


def _r_trott(p, t):
    t = np.asarray(t, dtype=float)
    num = 84 * t**4 + 56 * t**3 + 21 * t**2 + 21 * t + 24
    dnum = 336 * t**3 + 168 * t**2 + 42 * t + 21
    den = 672 * (1 + t**4)
    dden = 672 * 4 * t**3
    return num / den, (dnum * den - num * dden) / den**2


def _r_constant(p, t):
    t = np.asarray(t, dtype=float)
    return np.full_like(t, p["rho"]), np.zeros_like(t)


_RADIUS_EVAL: dict[RadiusFamily, Callable] = {
    RadiusFamily.SQRT_CUSP: _r_sqrt_cusp,
    RadiusFamily.SQRT_CUSP_HALF: _r_sqrt_cusp_half,
    RadiusFamily.TROTT: _r_trott,
    RadiusFamily.CONSTANT: _r_constant,
}


@dataclass(frozen=True)
class RadiusFunction:
    family: RadiusFamily
    params: tuple[tuple[str, float], ...]
    domain: Interval
    end_behavior: tuple[EndBehavior, EndBehavior] = (EndBehavior.FINITE, EndBehavior.FINITE)

    @property
    def p(self) -> dict[str, float]:
        return dict(self.params)


def _validated(r: RadiusFunction, samples: int = 4097) -> RadiusFunction:
    t = np.linspace(r.domain.lo, r.domain.hi, samples)
    values = _RADIUS_EVAL[r.family](r.p, t)[0]
    if not np.all(values > 0):
        i = int(np.argmin(values))
        raise RadiusNotPositive(f"radius {values[i]:.6g} <= 0 at t = {t[i]:.6g}")
    return r


def _positive_base(c):
    if not c > 0:
        raise NonpositiveRadiusBase(f"base radius c must be positive, got {c}")


def make_radius_sqrt_cusp(c: float, d: float) -> RadiusFunction:
    _positive_base(c)
    inf = EndBehavior.PLUS_INF if d > 0 else EndBehavior.MINUS_INF
    ends = (inf, inf) if d != 0 else (EndBehavior.FINITE, EndBehavior.FINITE)
    return _validated(
        RadiusFunction(
            RadiusFamily.SQRT_CUSP, (("c", float(c)), ("d", float(d))), Interval(0.0, TWO_PI), ends
        )
    )


def make_radius_dumbbell(c: float, d: float) -> RadiusFunction:
    """Square-root profile compressed onto [0, pi]: c - d (2t - pi) sqrt(2t (2 pi - 2t))."""
    _positive_base(c)
    inf = EndBehavior.PLUS_INF if d > 0 else EndBehavior.MINUS_INF
    ends = (inf, inf) if d != 0 else (EndBehavior.FINITE, EndBehavior.FINITE)
    return _validated(
        RadiusFunction(
            RadiusFamily.SQRT_CUSP_HALF,
            (("c", float(c)), ("d", float(d))),
            Interval(0.0, math.pi),
            ends,
        )
    )


def make_radius_trott(truncation: float = 20.0) -> RadiusFunction:
    T = float(truncation)
    return _validated(RadiusFunction(RadiusFamily.TROTT, (("T", T),), Interval(-T, T)))


def make_radius_constant(rho: float, domain: Interval = Interval(0.0, TWO_PI)) -> RadiusFunction:
    _positive_base(rho)
    return RadiusFunction(RadiusFamily.CONSTANT, (("rho", float(rho)),), domain)


def _raw_radius(r: RadiusFunction, t):
    return _RADIUS_EVAL[r.family](r.p, t)


def eval_radius(r: RadiusFunction, t) -> np.ndarray:
    r.domain.check(t)
    return _raw_radius(r, t)[0]


def eval_radius_derivative(r: RadiusFunction, t) -> np.ndarray:
    r.domain.check(t)
    deriv = _raw_radius(r, t)[1]
    if not np.all(np.isfinite(deriv)):
        raise DerivativeUnbounded(f"{r.family.value} derivative is unbounded at the domain ends")
    return deriv


# --------------------------------------------------------------------------
# end-closure conditions
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ToleranceConfig:
    speed_tolerance: float = SPEED_TOLERANCE
    position_tol: float = 1e-9
    radius_tol: float = 1e-9
    tangent_tol: float = 1e-3
    eps_base: float = 0.1
    eps_count: int = 11
    exponent_band: tuple[float, float] = (0.4, 0.6)

    def eps_sequence(self) -> np.ndarray:
        return self.eps_base * 2.0 ** -np.arange(self.eps_count)


@dataclass(frozen=True)
class ClosureReport:
    cond_i_residual: float
    cond_ii_residual: float
    cond_iii_residual: float
    cond_iv_exponent: float
    cond_iv_pass: bool
    cond_i_pass: bool = False
    cond_ii_pass: bool = False
    cond_iii_pass: bool = False
    cond_iv_exponents: tuple[float, float] = (math.nan, math.nan)
    cond_iv_same_sign: bool = False
    eps: tuple[float, ...] = ()
    end_circle_eps: tuple[float, ...] = ()
    end_circle_residuals: tuple[float, ...] = field(default=())

    @property
    def passed(self) -> bool:
        return self.cond_i_pass and self.cond_ii_pass and self.cond_iii_pass and self.cond_iv_pass

    def to_dict(self) -> dict:
        return {
            "cond_i": {"residual": self.cond_i_residual, "pass": self.cond_i_pass},
            "cond_ii": {"residual": self.cond_ii_residual, "pass": self.cond_ii_pass},
            "cond_iii": {"residual": self.cond_iii_residual, "pass": self.cond_iii_pass},
            "cond_iv": {
                "exponent": _finite_or_none(self.cond_iv_exponent),
                "exponents": [_finite_or_none(p) for p in self.cond_iv_exponents],
                "same_sign": self.cond_iv_same_sign,
                "pass": self.cond_iv_pass,
            },
            "eps": list(self.eps),
            "end_circle_eps": list(self.end_circle_eps),
            "end_circle_residuals": list(self.end_circle_residuals),
            "pass": self.passed,
        }


def _finite_or_none(x: float):
    return float(x) if math.isfinite(x) else None


def fit_exponent(eps: np.ndarray, increments: np.ndarray) -> float:
    """Least-squares slope of log|increment| against log(eps).

    Returns +inf when every increment is exactly zero (locally constant).
    """
    inc = np.abs(np.asarray(increments, dtype=float))
    keep = inc > 0
    if not np.any(keep):
        return math.inf
    if keep.sum() < 2:
        return math.nan
    slope, _ = np.polyfit(np.log(eps[keep]), np.log(inc[keep]), 1)
    return float(slope)


def check_closure_conditions(
    curve: PlanarCurve, r: RadiusFunction, cfg: ToleranceConfig = ToleranceConfig()
) -> ClosureReport:
    """Evaluate the four end-closure conditions of a tube directrix/radius pair.

    Positions and radii are compared at the endpoints themselves (the closed
    forms stay continuous there); tangents are compared on limit samples
    ``a + eps_k`` and ``b - eps_k``; the radius blow-up at each end is
    characterised by a fitted power law ``|r(end +- eps) - r(end)| ~ K eps^p``.
    """
    lo, hi = curve.domain.lo, curve.domain.hi
    if not (math.isclose(lo, r.domain.lo) and math.isclose(hi, r.domain.hi)):
        raise DomainMismatch("curve and radius domains differ")
    eps = cfg.eps_sequence()

    cond_i = float(np.linalg.norm(end_position(curve, "start") - end_position(curve, "end")))

    vel_a = _raw_jet(curve, lo + eps)[1]
    vel_b = _raw_jet(curve, hi - eps)[1]
    ta = vel_a / np.linalg.norm(vel_a, axis=-1)[:, None]
    tb = vel_b / np.linalg.norm(vel_b, axis=-1)[:, None]
    tangent_sums = np.linalg.norm(ta + tb, axis=-1)
    cond_ii = float(tangent_sums[-1])

    r_lo = float(_raw_radius(r, lo)[0])
    r_hi = float(_raw_radius(r, hi)[0])
    cond_iii = abs(r_lo - r_hi)

    inc_a = _raw_radius(r, lo + eps)[0] - r_lo
    inc_b = r_hi - _raw_radius(r, hi - eps)[0]
    p_a = fit_exponent(eps, inc_a)
    p_b = fit_exponent(eps, inc_b)
    # both one-sided derivatives must blow up with the same sign
    same_sign = bool(np.all(np.sign(inc_a) == np.sign(inc_b)) and np.all(inc_a != 0))
    band_lo, band_hi = cfg.exponent_band
    in_band = [band_lo <= p <= band_hi for p in (p_a, p_b)]
    worst = max((p_a, p_b), key=lambda p: abs(p - 0.5) if math.isfinite(p) else math.inf)

    return ClosureReport(
        cond_i_residual=cond_i,
        cond_ii_residual=cond_ii,
        cond_iii_residual=cond_iii,
        cond_iv_exponent=worst,
        cond_iv_pass=bool(all(in_band) and same_sign),
        cond_i_pass=cond_i <= cfg.position_tol,
        cond_ii_pass=cond_ii <= cfg.tangent_tol,
        cond_iii_pass=cond_iii <= cfg.radius_tol,
        cond_iv_exponents=(p_a, p_b),
        cond_iv_same_sign=same_sign,
        eps=tuple(float(e) for e in eps),
    )

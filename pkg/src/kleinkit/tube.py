"""Circular tubes swept along a planar directrix.

The directrix lives in the z = 0 plane; the cross-section circle at parameter
``t`` is spanned by the in-plane normal ``J(T)`` (tangent turned a quarter
turn) and the vertical unit vector ``k``:

    tube(t, theta) = (alpha(t), 0) + r(t) (cos theta J(T), 0) + (0, 0, r(t) sin theta)
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .curves import (
    SPEED_TOLERANCE,
    TWO_PI,
    Interval,
    PlanarCurve,
    RadiusFunction,
    ToleranceConfig,
    _raw_jet,
    _raw_radius,
    rotate90,
)
from .errors import DegenerateDirectrix, DomainMismatch, NotAntipodalTangents, OutOfDomain


@dataclass(frozen=True)
class AngleMap:
    """theta -> sigma * theta + tau (mod 2 pi)."""

    sigma: int
    tau: float

    def __call__(self, theta):
        return np.mod(self.sigma * np.asarray(theta, dtype=float) + self.tau, TWO_PI)


@dataclass(frozen=True)
class TubeSurface:
    directrix: PlanarCurve
    radius: RadiusFunction
    domain_t: Interval
    domain_theta: Interval = Interval(0.0, TWO_PI)


def make_tube(curve: PlanarCurve, r: RadiusFunction, samples: int = 4097) -> TubeSurface:
    if not (
        math.isclose(curve.domain.lo, r.domain.lo, abs_tol=1e-12)
        and math.isclose(curve.domain.hi, r.domain.hi, abs_tol=1e-12)
    ):
        raise DomainMismatch(
            f"directrix domain {curve.domain.describe()} != radius domain {r.domain.describe()}"
        )
    t = np.linspace(curve.domain.lo, curve.domain.hi, samples)[1:-1]
    speed = np.linalg.norm(_raw_jet(curve, t)[1], axis=-1)
    if np.any(speed <= SPEED_TOLERANCE):
        i = int(np.argmin(speed))
        raise DegenerateDirectrix(f"directrix speed {speed[i]:.3g} at t = {t[i]:.6g}")
    return TubeSurface(curve, r, curve.domain)


def _frame(tube: TubeSurface, t):
    pos, vel, acc = _raw_jet(tube.directrix, t)
    speed = np.linalg.norm(vel, axis=-1)
    T = vel / speed[..., None]
    return pos, vel, acc, speed, T, rotate90(T)


def tube_point(tube: TubeSurface, t, theta) -> np.ndarray:
    """Vectorised tube evaluation; ``t`` and ``theta`` broadcast together."""
    tube.domain_t.check(t)
    t, theta = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(theta, dtype=float))
    pos, _, _, speed, _, JT = _frame(tube, t)
    if np.any(speed <= SPEED_TOLERANCE):
        raise OutOfDomain("tube frame undefined where the directrix velocity vanishes")
    r = _raw_radius(tube.radius, t)[0]
    c, s = np.cos(theta), np.sin(theta)
    xy = pos + (r * c)[..., None] * JT
    return np.concatenate([xy, (r * s)[..., None]], axis=-1)


def tube_partials(tube: TubeSurface, t, theta) -> tuple[np.ndarray, np.ndarray]:
    """Analytic (d/dt, d/dtheta) of the tube.

    d/dt = (|a'| - r cos(theta) kappa |a'|) T + r' N, with N the circle
    direction; d/dtheta = r (-sin(theta) J(T) + cos(theta) k).
    """
    tube.domain_t.check(t)
    t, theta = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(theta, dtype=float))
    _, vel, acc, speed, T, JT = _frame(tube, t)
    r, dr = _raw_radius(tube.radius, t)
    c, s = np.cos(theta), np.sin(theta)
    cross = vel[..., 0] * acc[..., 1] - vel[..., 1] * acc[..., 0]
    along = speed - r * c * cross / speed**2
    ft_xy = along[..., None] * T + (dr * c)[..., None] * JT
    ft = np.concatenate([ft_xy, (dr * s)[..., None]], axis=-1)
    fth = np.concatenate([(-r * s)[..., None] * JT, (r * c)[..., None]], axis=-1)
    return ft, fth


def end_circle(tube: TubeSurface, end: str, eps: float, theta) -> np.ndarray:
    """Points of the cross-section circle ``eps`` inside the given end."""
    dom = tube.domain_t
    if not 0 <= eps < dom.length / 2:
        raise OutOfDomain(f"eps {eps} not in [0, {dom.length / 2})")
    if end not in ("start", "end"):
        raise ValueError("end must be 'start' or 'end'")
    t = dom.lo + eps if end == "start" else dom.hi - eps
    return tube_point(tube, np.full(np.shape(theta), t), theta)


def end_tangent_sum(tube: TubeSurface, cfg: ToleranceConfig = ToleranceConfig()) -> float:
    """|T(a+) + T(b-)| on the smallest limit sample."""
    eps = cfg.eps_sequence()[-1]
    dom = tube.domain_t
    a = _frame(tube, dom.lo + eps)[4]
    b = _frame(tube, dom.hi - eps)[4]
    return float(np.linalg.norm(a + b))


def end_correspondence(tube: TubeSurface, cfg: ToleranceConfig = ToleranceConfig()) -> AngleMap:
    """Angular gluing of the start circle onto the end circle.

    With antipodal end tangents J(T) flips sign while k does not, so the
    start point at theta meets the end point at pi - theta.
    """
    residual = end_tangent_sum(tube, cfg)
    if residual > cfg.tangent_tol:
        raise NotAntipodalTangents(f"|T(a) + T(b)| = {residual:.3g} > {cfg.tangent_tol:g}")
    return AngleMap(sigma=-1, tau=math.pi)

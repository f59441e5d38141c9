"""Catalog of Klein bottle surfaces behind one evaluation interface.

Six surfaces are registered: the figure-eight bottle (``kb1``), the
stereographic circle-family bottle (``kb2``), Dickson's two-piece tube
(``kb3``), Trott's rational tube, the cusp-piriform tube and the dumbbell
tube.  A plain torus is available as an orientable control.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import curves
from .curves import TWO_PI, Interval
from .errors import OutOfDomain, ParameterOutOfRange, StepTooLarge, UnknownParameter
from .tube import TubeSurface, make_tube, tube_partials, tube_point

SQRT2 = math.sqrt(2.0)


class SurfaceKind(str, enum.Enum):
    KB1 = "Kb1"
    KB2 = "Kb2"
    KB3_DICKSON = "Kb3Dickson"
    TUBE_BASED = "TubeBased"
    CUSTOM = "Custom"


@dataclass(frozen=True)
class IdentificationMap:
    """Seam gluing f(u + u_period, v_sigma * v + v_tau) = f(u, v).

    ``exact`` is False when the seam is only reached as a limit (open or
    truncated parameter ends).
    """

    u_period: float
    v_sigma: int
    v_tau: float
    description: str = ""
    exact: bool = True

    def target(self, u, v):
        return np.asarray(u) + self.u_period, self.v_sigma * np.asarray(v) + self.v_tau

    def to_dict(self) -> dict:
        return {
            "u_period": self.u_period,
            "v_sigma": self.v_sigma,
            "v_tau": self.v_tau,
            "exact": self.exact,
            "description": self.description,
        }


@dataclass(frozen=True)
class ParametricSurface:
    name: str
    kind: SurfaceKind
    params: tuple[tuple[str, float], ...]
    domain_u: Interval
    domain_v: Interval = Interval(0.0, TWO_PI)
    identification: IdentificationMap | None = None
    tube: TubeSurface | None = None
    # u-values where a piecewise formula switches branch
    breaks: tuple[float, ...] = ()
    # closed form defined for every real u (no domain check on u)
    entire: bool = False
    known_non_immersion: bool = False
    source: str = ""
    func: Callable | None = None

    @property
    def p(self) -> dict[str, float]:
        return dict(self.params)

    @property
    def has_analytic_partials(self) -> bool:
        return self.kind is not SurfaceKind.CUSTOM

    @property
    def has_open_ends(self) -> bool:
        return self.domain_u.lo_open or self.domain_u.hi_open or (
            self.tube is not None and self.tube.directrix.ends_at_infinity
        )


@dataclass(frozen=True)
class SurfaceSample:
    position: np.ndarray
    du: np.ndarray
    dv: np.ndarray
    analytic_partials: bool
    h: float | None = None


# --------------------------------------------------------------------------
# closed forms
# --------------------------------------------------------------------------


def _kb1(p, u, v):
    a = p["a"]
    ch, sh = np.cos(u / 2), np.sin(u / 2)
    sv, s2v = np.sin(v), np.sin(2 * v)
    bracket = a + ch * sv - sh * s2v
    return np.stack(
        [bracket * np.cos(u), bracket * np.sin(u), sh * sv + ch * s2v], axis=-1
    )


def _kb1_partials(p, u, v):
    a = p["a"]
    ch, sh = np.cos(u / 2), np.sin(u / 2)
    sv, cv, s2v, c2v = np.sin(v), np.cos(v), np.sin(2 * v), np.cos(2 * v)
    cu, su = np.cos(u), np.sin(u)
    bracket = a + ch * sv - sh * s2v
    z = sh * sv + ch * s2v
    b_u = -0.5 * z
    b_v = ch * cv - 2 * sh * c2v
    fu = np.stack(
        [b_u * cu - bracket * su, b_u * su + bracket * cu, 0.5 * (bracket - a)], axis=-1
    )
    fv = np.stack([b_v * cu, b_v * su, sh * cv + 2 * ch * c2v], axis=-1)
    return fu, fv


def _kb2_parts(u, v):
    su, cu, s2u, c2u = np.sin(u), np.cos(u), np.sin(2 * u), np.cos(2 * u)
    sv, cv = np.sin(v), np.cos(v)
    num = np.stack(
        [c2u * sv, (s2u * sv - su * cv) / SQRT2, cu * cv], axis=-1
    )
    w = (su * cv + s2u * sv) / SQRT2
    return su, cu, s2u, c2u, sv, cv, num, 1.0 - w


def _kb2(p, u, v):
    *_, num, den = _kb2_parts(u, v)
    return num / den[..., None]


def _kb2_partials(p, u, v):
    su, cu, s2u, c2u, sv, cv, num, den = _kb2_parts(u, v)
    num_u = np.stack(
        [-2 * s2u * sv, (2 * c2u * sv - cu * cv) / SQRT2, -su * cv], axis=-1
    )
    num_v = np.stack(
        [c2u * cv, (s2u * cv + su * sv) / SQRT2, -cu * sv], axis=-1
    )
    den_u = -(cu * cv + 2 * c2u * sv) / SQRT2
    den_v = -(-su * sv + s2u * cv) / SQRT2
    d = den[..., None]
    fu = (num_u * d - num * den_u[..., None]) / d**2
    fv = (num_v * d - num * den_v[..., None]) / d**2
    return fu, fv


def kb2_denominator(u, v) -> np.ndarray:
    return _kb2_parts(np.asarray(u, dtype=float), np.asarray(v, dtype=float))[-1]


def _kb3_center(u):
    return 6 * np.cos(u) * (1 + np.sin(u)), 16 * np.sin(u)


def _kb3(p, u, v):
    cx, cy = _kb3_center(u)
    R = 4 * (1 - 0.5 * np.cos(u))
    cv, sv = np.cos(v), np.sin(v)
    first = u <= math.pi
    x = np.where(first, cx + R * np.cos(u) * cv, cx + R * np.cos(v + math.pi))
    y = np.where(first, cy + R * np.sin(u) * cv, cy)
    return np.stack([x, y, R * sv], axis=-1)


def _kb3_partials(p, u, v):
    su, cu = np.sin(u), np.cos(u)
    cv, sv = np.cos(v), np.sin(v)
    dcx = 6 * (-su + np.cos(2 * u))
    dcy = 16 * cu
    R = 4 * (1 - 0.5 * cu)
    dR = 2 * su
    first = u <= math.pi
    zero = np.zeros_like(u)
    fu = np.stack(
        [
            np.where(first, dcx + (dR * cu - R * su) * cv, dcx - dR * cv),
            np.where(first, dcy + (dR * su + R * cu) * cv, dcy),
            dR * sv,
        ],
        axis=-1,
    )
    fv = np.stack(
        [
            np.where(first, -R * cu * sv, R * sv),
            np.where(first, -R * su * sv, zero),
            R * cv,
        ],
        axis=-1,
    )
    return fu, fv


_CLOSED_FORMS: dict[SurfaceKind, tuple[Callable, Callable]] = {
    SurfaceKind.KB1: (_kb1, _kb1_partials),
    SurfaceKind.KB2: (_kb2, _kb2_partials),
    SurfaceKind.KB3_DICKSON: (_kb3, _kb3_partials),
}


# --------------------------------------------------------------------------
# constructors
# --------------------------------------------------------------------------


def kb1(a: float = 3.0) -> ParametricSurface:
    if not a > 2:
        raise ParameterOutOfRange(f"kb1 needs a > 2, got {a}")
    return ParametricSurface(
        name="kb1",
        kind=SurfaceKind.KB1,
        params=(("a", float(a)),),
        domain_u=Interval(0.0, TWO_PI),
        identification=IdentificationMap(TWO_PI, -1, TWO_PI, "(u, v) ~ (u + 2pi, 2pi - v)"),
        entire=True,
        source="figure-eight bottle: lemniscate swept around a circle with a half twist",
    )


def kb2() -> ParametricSurface:
    return ParametricSurface(
        name="kb2",
        kind=SurfaceKind.KB2,
        params=(),
        domain_u=Interval(0.0, math.pi),
        identification=IdentificationMap(math.pi, -1, math.pi, "(u, v) ~ (u + pi, pi - v)"),
        entire=True,
        source="circle-family bottle, stereographic image of a bottle in S^3",
    )


def kb3_dickson() -> ParametricSurface:
    return ParametricSurface(
        name="kb3",
        kind=SurfaceKind.KB3_DICKSON,
        params=(),
        domain_u=Interval(0.0, TWO_PI),
        identification=IdentificationMap(TWO_PI, -1, math.pi, "(u, v) ~ (u + 2pi, pi - v)"),
        breaks=(math.pi,),
        known_non_immersion=True,
        source="Dickson: two tubes over a piriform joined along circles",
    )


def tube_surface(
    name: str,
    tube: TubeSurface,
    params: dict[str, float],
    identification: IdentificationMap | None,
    source: str = "",
) -> ParametricSurface:
    return ParametricSurface(
        name=name,
        kind=SurfaceKind.TUBE_BASED,
        params=tuple((k, float(v)) for k, v in params.items()),
        domain_u=tube.domain_t,
        identification=identification,
        tube=tube,
        source=source,
    )


def _antipodal_seam(length: float, exact: bool) -> IdentificationMap:
    return IdentificationMap(
        length, -1, math.pi, "end circles glued by theta -> pi - theta", exact=exact
    )


def piriform_tube(
    a: float = 20.0, b: float = 8.0, c: float = 5.5, d: float = 0.4
) -> ParametricSurface:
    tube = make_tube(curves.make_cusp_piriform(a, b), curves.make_radius_sqrt_cusp(c, d))
    return tube_surface(
        "piriform-tube",
        tube,
        {"a": a, "b": b, "c": c, "d": d},
        _antipodal_seam(TWO_PI, exact=False),
        "tube over a piriform starting and ending at its cusp",
    )


def dumbbell_tube(
    sx: float = 5.0, sy: float = 2.0, c: float = 0.5, d: float = 1.0 / 30.0
) -> ParametricSurface:
    tube = make_tube(curves.make_dumbbell(sx, sy), curves.make_radius_dumbbell(c, d))
    return tube_surface(
        "dumbbell-tube",
        tube,
        {"sx": sx, "sy": sy, "c": c, "d": d},
        _antipodal_seam(math.pi, exact=True),
        "tube over half a stretched dumbbell curve, closed parameter rectangle",
    )


def trott_tube(truncation: float = 20.0) -> ParametricSurface:
    tube = make_tube(
        curves.make_trott_directrix(truncation), curves.make_radius_trott(truncation)
    )
    return tube_surface(
        "trott-tube",
        tube,
        {"T": truncation},
        _antipodal_seam(2 * truncation, exact=False),
        "Trott: rational directrix and radius, parameter line truncated to [-T, T]",
    )


def custom_surface(
    name: str, func: Callable, domain_u: Interval = Interval(0.0, TWO_PI)
) -> ParametricSurface:
    """Wrap an arbitrary vectorised map ``func(u, v) -> (..., 3)``; partials
    are always by central differences."""
    return ParametricSurface(
        name=name, kind=SurfaceKind.CUSTOM, params=(), domain_u=domain_u, entire=True, func=func
    )


def torus(R: float = 2.0, rho: float = 0.5) -> ParametricSurface:
    """Orientable control: constant-radius tube around a circle."""
    if not 0 < rho < R:
        raise ParameterOutOfRange("torus needs 0 < rho < R")
    tube = make_tube(curves.make_circle(R), curves.make_radius_constant(rho))
    return tube_surface(
        "torus",
        tube,
        {"R": R, "rho": rho},
        IdentificationMap(TWO_PI, 1, 0.0, "periodic in both directions"),
        "control surface",
    )


# --------------------------------------------------------------------------
# evaluation
# --------------------------------------------------------------------------


def _check_u(s: ParametricSurface, u) -> None:
    if not s.entire:
        s.domain_u.check(u)


def surface_eval(s: ParametricSurface, u, v) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    _check_u(s, u)
    if s.kind is SurfaceKind.TUBE_BASED:
        return tube_point(s.tube, u, v)
    u, v = np.broadcast_arrays(u, v)
    if s.kind is SurfaceKind.CUSTOM:
        return np.asarray(s.func(u, v), dtype=float)
    return _CLOSED_FORMS[s.kind][0](s.p, u, v)


def analytic_partials(s: ParametricSurface, u, v) -> tuple[np.ndarray, np.ndarray]:
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    _check_u(s, u)
    if s.kind is SurfaceKind.CUSTOM:
        raise NotImplementedError("custom surfaces have no analytic partials")
    if s.kind is SurfaceKind.TUBE_BASED:
        return tube_partials(s.tube, u, v)
    u, v = np.broadcast_arrays(u, v)
    return _CLOSED_FORMS[s.kind][1](s.p, u, v)


def central_partials(s: ParametricSurface, u, v, h: float) -> tuple[np.ndarray, np.ndarray]:
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    fu = (surface_eval(s, u + h, v) - surface_eval(s, u - h, v)) / (2 * h)
    fv = (surface_eval(s, u, v + h) - surface_eval(s, u, v - h)) / (2 * h)
    return fu, fv


def surface_partials(
    s: ParametricSurface, u, v, h: float = 1e-5, method: str = "analytic"
) -> SurfaceSample:
    """Position plus partials, analytic by default or by central differences."""
    if method not in ("analytic", "central"):
        raise ValueError(f"unknown method {method!r}")
    if not 0 < h <= 0.1 * s.domain_u.length:
        raise StepTooLarge(f"step {h} outside (0, {0.1 * s.domain_u.length:g}]")
    pos = surface_eval(s, u, v)
    if method == "analytic" and s.has_analytic_partials:
        fu, fv = analytic_partials(s, u, v)
        return SurfaceSample(pos, fu, fv, True)
    fu, fv = central_partials(s, u, v, h)
    return SurfaceSample(pos, fu, fv, False, h)


# --------------------------------------------------------------------------
# registry
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    builder: Callable[..., ParametricSurface]
    defaults: dict
    source: str
    known_non_immersion: bool = False
    listed: bool = True


CATALOG: dict[str, CatalogEntry] = {
    e.name: e
    for e in [
        CatalogEntry("kb1", kb1, {"a": 3.0}, "closed-form figure-eight immersion"),
        CatalogEntry("kb2", kb2, {}, "closed-form circle-family immersion"),
        CatalogEntry(
            "kb3", kb3_dickson, {}, "Dickson's piecewise tube", known_non_immersion=True
        ),
        CatalogEntry("trott-tube", trott_tube, {"truncation": 20.0}, "Trott's rational tube"),
        CatalogEntry(
            "piriform-tube",
            piriform_tube,
            {"a": 20.0, "b": 8.0, "c": 5.5, "d": 0.4},
            "tube over the cusp-parametrised piriform",
        ),
        CatalogEntry(
            "dumbbell-tube",
            dumbbell_tube,
            {"sx": 5.0, "sy": 2.0, "c": 0.5, "d": 1.0 / 30.0},
            "tube over half of the stretched dumbbell curve",
        ),
        CatalogEntry("torus", torus, {"R": 2.0, "rho": 0.5}, "orientable control", listed=False),
    ]
}


def build_surface(name: str, **overrides: float) -> ParametricSurface:
    try:
        entry = CATALOG[name]
    except KeyError:
        raise UnknownParameter(
            f"unknown surface {name!r}; choose from {', '.join(CATALOG)}"
        ) from None
    unknown = set(overrides) - set(entry.defaults)
    if unknown:
        raise UnknownParameter(f"{name} has no parameter(s) {sorted(unknown)}")
    return entry.builder(**{**entry.defaults, **overrides})


def catalog_list() -> list[dict]:
    out = []
    for entry in CATALOG.values():
        if not entry.listed:
            continue
        s = build_surface(entry.name)
        out.append(
            {
                "name": entry.name,
                "defaults": dict(entry.defaults),
                "source": entry.source,
                "domain_u": s.domain_u.to_dict(),
                "domain_v": s.domain_v.to_dict(),
                "identification": s.identification.to_dict() if s.identification else None,
                "known_non_immersion": entry.known_non_immersion,
            }
        )
    return out


def seam_points(s: ParametricSurface, v) -> tuple[np.ndarray, np.ndarray]:
    """Both sides of the identification seam at u = domain start, for exact seams."""
    ident = s.identification
    u0 = s.domain_u.lo
    u1, v1 = ident.target(u0, v)
    return surface_eval(s, u0, v), surface_eval(s, np.full(np.shape(v1), u1), v1)


__all__ = [
    "CATALOG",
    "IdentificationMap",
    "OutOfDomain",
    "ParametricSurface",
    "SurfaceKind",
    "SurfaceSample",
    "analytic_partials",
    "build_surface",
    "catalog_list",
    "central_partials",
    "custom_surface",
    "dumbbell_tube",
    "kb1",
    "kb2",
    "kb3_dickson",
    "piriform_tube",
    "surface_eval",
    "surface_partials",
    "torus",
    "trott_tube",
]

"""Numerical checks of immersion, gluing, end closure and seam tangency.

All reductions run over arrays in a fixed order, so reports are
bit-identical for identical inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .curves import ClosureReport, ToleranceConfig, check_closure_conditions, _raw_jet, _raw_radius
from .errors import DegenerateNormal, KleinError, NoIdentification
from .surfaces import (
    ParametricSurface,
    SurfaceKind,
    analytic_partials,
    central_partials,
    surface_eval,
    surface_partials,
)


@dataclass(frozen=True)
class VerifyConfig:
    nu: int = 256
    nv: int = 64
    margin: float = 1e-3
    h: float = 1e-5
    gluing_tol: float = 1e-9
    gluing_samples: int = 64
    regularity_rel: float = 1e-6
    seam_tol: float = 1e-3
    seam_samples: int = 64
    # seam normals are taken at depth h * L * 10**-k for k < seam_depths
    seam_depths: int = 7
    closure: ToleranceConfig = field(default_factory=ToleranceConfig)


@dataclass(frozen=True)
class FundamentalFormSample:
    u: np.ndarray
    v: np.ndarray
    E: np.ndarray
    F: np.ndarray
    G: np.ndarray
    det: np.ndarray


def fundamental_form(fu: np.ndarray, fv: np.ndarray):
    E = np.einsum("...i,...i->...", fu, fu)
    F = np.einsum("...i,...i->...", fu, fv)
    G = np.einsum("...i,...i->...", fv, fv)
    return E, F, G, E * G - F * F


def first_fundamental_form(
    s: ParametricSurface, u, v, h: float = 1e-5, method: str = "analytic"
) -> FundamentalFormSample:
    sample = surface_partials(s, u, v, h=h, method=method)
    E, F, G, det = fundamental_form(sample.du, sample.dv)
    return FundamentalFormSample(np.asarray(u), np.asarray(v), E, F, G, det)


# --------------------------------------------------------------------------
# regularity
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class RegularityResult:
    min_det: float
    argmin: tuple[float, float]
    median_det: float
    threshold: float
    passed: bool
    dets: np.ndarray = field(repr=False, compare=False, default=None)

    def to_dict(self) -> dict:
        return {
            "min_det": self.min_det,
            "argmin": list(self.argmin),
            "median_det": self.median_det,
            "threshold": self.threshold,
            "pass": self.passed,
        }


def _scan_pieces(s: ParametricSurface, nu: int, margin: float) -> list[np.ndarray]:
    """u-samples per smooth piece, each piece clipped by margin * L at both ends."""
    L = s.domain_u.length
    cuts = [s.domain_u.lo, *s.breaks, s.domain_u.hi]
    pieces = []
    n_piece = max(8, nu // (len(cuts) - 1))
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        pieces.append(np.linspace(lo + margin * L, hi - margin * L, n_piece))
    return pieces


def regularity_scan(
    s: ParametricSurface,
    nu: int = 256,
    nv: int = 64,
    margin: float = 1e-3,
    h: float = 1e-5,
    method: str = "analytic",
    rel_threshold: float = 1e-6,
) -> RegularityResult:
    """Minimum of EG - F^2 over a grid of the margin-clipped domain."""
    if nu < 8 or nv < 8:
        raise ValueError("regularity_scan needs nu, nv >= 8")
    u = np.concatenate(_scan_pieces(s, nu, margin))
    v = np.linspace(0.0, 2 * math.pi, nv, endpoint=False)
    uu, vv = np.meshgrid(u, v, indexing="ij")
    det = first_fundamental_form(s, uu, vv, h=h, method=method).det
    i, j = np.unravel_index(int(np.argmin(det)), det.shape)
    min_det = float(det[i, j])
    median = float(np.median(det))
    threshold = rel_threshold * median
    return RegularityResult(
        min_det=min_det,
        argmin=(float(uu[i, j]), float(vv[i, j])),
        median_det=median,
        threshold=threshold,
        passed=bool(min_det > 0 and min_det > threshold),
        dets=det,
    )


# --------------------------------------------------------------------------
# gluing
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class GluingResult:
    max_residual: float
    passed: bool
    mode: str  # "exact", "limit" or "truncated"
    enforced: bool = True
    eps: tuple[float, ...] = ()
    sequence: tuple[float, ...] = ()
    exponent: float | None = None

    def to_dict(self) -> dict:
        return {
            "max_residual": self.max_residual,
            "mode": self.mode,
            "enforced": self.enforced,
            "eps": list(self.eps),
            "sequence": list(self.sequence),
            "exponent": self.exponent,
            "pass": self.passed,
        }


def _seam_residual(s: ParametricSurface, u0, v) -> np.ndarray:
    ident = s.identification
    u1, v1 = ident.target(u0, v)
    a = surface_eval(s, u0, v)
    b = surface_eval(s, u1, v1)
    return np.linalg.norm(a - b, axis=-1)


def _tail_decreasing(seq: np.ndarray) -> bool:
    # strictly decreasing over the second half of the sequence
    tail = seq[len(seq) // 2 :]
    return bool(np.all(np.diff(tail) < 0))


def gluing_residual(
    s: ParametricSurface, n_samples: int = 64, cfg: VerifyConfig = VerifyConfig()
) -> GluingResult:
    """max |f(u0 + U, sigma v + tau) - f(u0, v)| along the identification seam.

    Closed-form surfaces are sampled on an n x n grid of (u0, v); exact tube
    seams at u0 = domain start; open-ended tubes as a limit over eps_k.
    """
    ident = s.identification
    if ident is None:
        raise NoIdentification(f"{s.name} has no identification map")
    v = np.linspace(0.0, 2 * math.pi, n_samples, endpoint=False)
    if ident.exact:
        if s.entire:
            u0 = np.linspace(s.domain_u.lo, s.domain_u.hi, n_samples, endpoint=False)
            uu, vv = np.meshgrid(u0, v, indexing="ij")
            res = float(np.max(_seam_residual(s, uu, vv)))
        else:
            res = float(np.max(_seam_residual(s, np.full_like(v, s.domain_u.lo), v)))
        return GluingResult(res, res < cfg.gluing_tol, "exact")

    eps = cfg.closure.eps_sequence()
    lo, hi = s.domain_u.lo, s.domain_u.hi
    seq = []
    for e in eps:
        a = surface_eval(s, np.full_like(v, lo + e), v)
        b = surface_eval(s, np.full_like(v, hi - e), ident.v_sigma * v + ident.v_tau)
        seq.append(float(np.max(np.linalg.norm(a - b, axis=-1))))
    seq = np.array(seq)
    if s.tube is not None and s.tube.directrix.ends_at_infinity:
        # the seam sits at t = +-infinity; a finite truncation leaves a gap
        return GluingResult(
            float(seq[-1]), False, "truncated", enforced=False,
            eps=tuple(eps.tolist()), sequence=tuple(seq.tolist()),
        )
    slope = float(np.polyfit(np.log(eps), np.log(seq), 1)[0])
    ok = _tail_decreasing(seq) and slope > 0.25
    return GluingResult(
        float(seq[-1]), ok, "limit", eps=tuple(eps.tolist()),
        sequence=tuple(seq.tolist()), exponent=slope,
    )


# --------------------------------------------------------------------------
# seam tangency
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class SeamResult:
    seam_u: float
    max_angle: float
    location: tuple[float, float]
    passed: bool
    depths: tuple[float, ...] = ()
    angles: tuple[float, ...] = ()
    enforced: bool = True

    def to_dict(self) -> dict:
        return {
            "seam_u": self.seam_u,
            "max_angle_radians": self.max_angle,
            "location": list(self.location),
            "depths": list(self.depths),
            "angles": list(self.angles),
            "enforced": self.enforced,
            "pass": self.passed,
        }


def _unit_normals(s: ParametricSurface, u, v, method: str, side: int, h: float) -> np.ndarray:
    if method == "analytic" and s.has_analytic_partials:
        fu, fv = analytic_partials(s, u, v)
    else:
        # second-order one-sided difference in u pointing away from the seam
        f0 = surface_eval(s, u, v)
        f1 = surface_eval(s, u + side * h, v)
        f2 = surface_eval(s, u + 2 * side * h, v)
        fu = side * (-3 * f0 + 4 * f1 - f2) / (2 * h)
        fv = (surface_eval(s, u, v + h) - surface_eval(s, u, v - h)) / (2 * h)
    n = np.cross(fu, fv)
    norm = np.linalg.norm(n, axis=-1)
    scale = np.linalg.norm(fu, axis=-1) * np.linalg.norm(fv, axis=-1)
    if np.any(norm <= 1e-14 * np.maximum(scale, 1e-300)):
        raise DegenerateNormal(f"normal vanishes near u = {float(np.ravel(u)[0]):.6g}")
    return n / norm[..., None]


def _angles(na: np.ndarray, nb: np.ndarray, unsigned: bool) -> np.ndarray:
    # atan2 keeps full precision for nearly parallel normals, where arccos
    # bottoms out near 1e-8
    cos = np.einsum("...i,...i->...", na, nb)
    sin = np.linalg.norm(np.cross(na, nb), axis=-1)
    if unsigned:
        cos = np.abs(cos)
    return np.arctan2(sin, cos)


def seam_tangency(
    s: ParametricSurface,
    seam_u: float,
    n_samples: int = 64,
    h: float = 1e-5,
    depths: int = 7,
    method: str = "analytic",
    tol: float = 1e-3,
    swap: bool = False,
) -> SeamResult:
    """Angle between unit normals on the two sides of a seam.

    Normals are taken at depth delta_k = h * L * 10**-k inside each side and
    the angle at the deepest level is reported, so seams where a partial
    blows up are measured in the limit.  At the identification seam
    (``seam_u`` = domain start) the far side is mapped through the
    identification; with sigma = -1 normals are compared up to sign.
    """
    L = s.domain_u.length
    v = np.linspace(0.0, 2 * math.pi, n_samples, endpoint=False)
    boundary = math.isclose(seam_u, s.domain_u.lo) or math.isclose(seam_u, s.domain_u.hi)
    if boundary:
        ident = s.identification
        if ident is None:
            raise NoIdentification(f"{s.name} has no identification map")
        ua, ub = s.domain_u.lo, s.domain_u.hi
        va, vb = v, ident.v_sigma * v + ident.v_tau
        side_a, side_b = 1, -1
        unsigned = ident.v_sigma == -1
    else:
        ua = ub = seam_u
        va = vb = v
        side_a, side_b = -1, 1
        unsigned = False
    deltas = h * L * 10.0 ** -np.arange(depths)
    angles, last = [], None
    for d in deltas:
        step = d / 4
        na = _unit_normals(s, np.full_like(va, ua + side_a * d), va, method, side_a, step)
        nb = _unit_normals(s, np.full_like(vb, ub + side_b * d), vb, method, side_b, step)
        if swap:
            na, nb = nb, na
        last = _angles(na, nb, unsigned)
        angles.append(float(np.max(last)))
    j = int(np.argmax(last))
    return SeamResult(
        seam_u=float(seam_u),
        max_angle=angles[-1],
        location=(float(seam_u), float(v[j])),
        passed=angles[-1] < tol,
        depths=tuple(deltas.tolist()),
        angles=tuple(angles),
    )


# --------------------------------------------------------------------------
# closure
# --------------------------------------------------------------------------


def _circle_distance(points: np.ndarray, center: np.ndarray, normal: np.ndarray, radius: float):
    """Exact distance from points to a circle in 3-space."""
    d = points - center
    along = d @ normal
    inplane = d - along[:, None] * normal
    return np.sqrt(along**2 + (np.linalg.norm(inplane, axis=-1) - radius) ** 2)


def _end_circle(s: ParametricSurface, t: float):
    pos, vel, *_ = _raw_jet(s.tube.directrix, t)
    T = vel / np.linalg.norm(vel)
    center = np.array([pos[0], pos[1], 0.0])
    normal = np.array([T[0], T[1], 0.0])
    return center, normal, float(_raw_radius(s.tube.radius, t)[0])


def end_circle_residual(s: ParametricSurface, eps: float, n_theta: int = 128) -> float:
    """Symmetric Hausdorff-style distance between the two end circles at depth eps."""
    theta = np.linspace(0.0, 2 * math.pi, n_theta, endpoint=False)
    lo, hi = s.domain_u.lo + eps, s.domain_u.hi - eps
    pa = surface_eval(s, np.full_like(theta, lo), theta)
    pb = surface_eval(s, np.full_like(theta, hi), theta)
    da = _circle_distance(pa, *_end_circle(s, hi))
    db = _circle_distance(pb, *_end_circle(s, lo))
    return float(max(da.max(), db.max()))


def closure_limit_check(
    s: ParametricSurface, eps_sequence=None, cfg: ToleranceConfig = ToleranceConfig()
) -> ClosureReport:
    if s.kind is not SurfaceKind.TUBE_BASED:
        raise ValueError(f"{s.name} is not a tube surface")
    report = check_closure_conditions(s.tube.directrix, s.tube.radius, cfg)
    eps = list(cfg.eps_sequence() if eps_sequence is None else eps_sequence)
    if not s.has_open_ends and 0.0 not in eps:
        eps = [0.0, *eps]
    residuals = tuple(end_circle_residual(s, e) for e in eps)
    return replace(report, end_circle_eps=tuple(float(e) for e in eps), end_circle_residuals=residuals)


# --------------------------------------------------------------------------
# orchestration
# --------------------------------------------------------------------------


@dataclass
class VerificationReport:
    surface_name: str
    regularity: RegularityResult | None = None
    gluing: GluingResult | None = None
    closure: ClosureReport | None = None
    closure_enforced: bool = True
    seam_tangency: list[SeamResult] = field(default_factory=list)
    self_intersection_expected: bool = True
    errors: dict[str, str] = field(default_factory=dict)

    @property
    def worst_seam(self) -> SeamResult | None:
        enforced = [r for r in self.seam_tangency if r.enforced] or self.seam_tangency
        return max(enforced, key=lambda r: r.max_angle) if enforced else None

    @property
    def passed(self) -> bool:
        if self.errors:
            return False
        checks = []
        if self.regularity is not None:
            checks.append(self.regularity.passed)
        if self.gluing is not None and self.gluing.enforced:
            checks.append(self.gluing.passed)
        if self.closure is not None and self.closure_enforced:
            checks.append(self.closure.passed)
        checks.extend(r.passed for r in self.seam_tangency if r.enforced)
        return all(checks)

    def to_dict(self) -> dict:
        worst = self.worst_seam
        seam = None
        if worst is not None:
            seam = {
                "max_angle_radians": worst.max_angle,
                "location": list(worst.location),
                "pass": all(r.passed for r in self.seam_tangency if r.enforced),
                "seams": [r.to_dict() for r in self.seam_tangency],
            }
        closure = None
        if self.closure is not None:
            closure = {**self.closure.to_dict(), "enforced": self.closure_enforced}
        return {
            "surface_name": self.surface_name,
            "regularity": self.regularity.to_dict() if self.regularity else None,
            "gluing": self.gluing.to_dict() if self.gluing else None,
            "closure": closure,
            "seam_tangency": seam,
            "self_intersection_expected": self.self_intersection_expected,
            "errors": dict(self.errors),
            "pass": self.passed,
        }


def full_verify(s: ParametricSurface, cfg: VerifyConfig = VerifyConfig()) -> VerificationReport:
    report = VerificationReport(
        surface_name=s.name,
        self_intersection_expected=not (
            s.identification is not None and s.identification.v_sigma == 1
        ),
    )
    truncated = s.tube is not None and s.tube.directrix.ends_at_infinity

    def attempt(key, fn):
        try:
            return fn()
        except KleinError as exc:
            report.errors[key] = f"{type(exc).__name__}: {exc}"
            return None

    report.regularity = attempt(
        "regularity",
        lambda: regularity_scan(
            s, cfg.nu, cfg.nv, cfg.margin, cfg.h, rel_threshold=cfg.regularity_rel
        ),
    )
    if s.identification is not None:
        report.gluing = attempt("gluing", lambda: gluing_residual(s, cfg.gluing_samples, cfg))
    if s.kind is SurfaceKind.TUBE_BASED:
        report.closure = attempt("closure", lambda: closure_limit_check(s, cfg=cfg.closure))
        # Klein-style end conditions only apply to orientation-reversing gluing
        report.closure_enforced = not truncated and (
            s.identification is not None and s.identification.v_sigma == -1
        )
    seams = list(s.breaks)
    if s.identification is not None:
        seams.append(s.domain_u.lo)
    for seam_u in seams:
        res = attempt(
            f"seam_tangency@{seam_u:.6g}",
            lambda: seam_tangency(
                s, seam_u, cfg.seam_samples, cfg.h, cfg.seam_depths, tol=cfg.seam_tol
            ),
        )
        if res is not None:
            if truncated:
                res = replace(res, enforced=False)
            report.seam_tangency.append(res)
    return report


__all__ = [
    "FundamentalFormSample",
    "GluingResult",
    "RegularityResult",
    "SeamResult",
    "VerificationReport",
    "VerifyConfig",
    "central_partials",
    "closure_limit_check",
    "end_circle_residual",
    "first_fundamental_form",
    "full_verify",
    "gluing_residual",
    "regularity_scan",
    "seam_tangency",
]

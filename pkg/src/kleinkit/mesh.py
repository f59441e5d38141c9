"""Grid tessellation, seam welding and mesh topology."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.spatial import cKDTree

from .errors import InconsistentSeam, NotWatertight
from .surfaces import ParametricSurface, surface_eval


@dataclass(frozen=True)
class TriangleMesh:
    vertices: np.ndarray  # (V, 3) float64
    triangles: np.ndarray  # (F, 3) int64
    normals: np.ndarray | None = None
    provenance: dict = field(default_factory=dict)
    # parameter coordinates and grid indices of each vertex, kept until welding
    uv: np.ndarray | None = field(default=None, repr=False)
    grid_index: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        tri = self.triangles
        if tri.size and (tri.min() < 0 or tri.max() >= len(self.vertices)):
            raise ValueError("triangle index out of range")

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        return self.vertices.min(axis=0), self.vertices.max(axis=0)


def grid_nv(s: ParametricSurface, nv: int) -> int:
    """Smallest nv' >= nv whose v-grid contains the seam shift tau."""
    ident = s.identification
    if ident is None:
        return nv
    step = 2 * math.pi / nv
    while True:
        k = ident.v_tau / (2 * math.pi / nv)
        if abs(k - round(k)) < 1e-9:
            return nv
        nv += 1
        if 2 * math.pi / nv < step / 4:
            raise ValueError(f"no grid size lands tau = {ident.v_tau} on a node")


def tessellate(
    s: ParametricSurface, nu: int, nv: int, margin: float = 1e-3, stagger: bool = True
) -> TriangleMesh:
    """(nu+1) x (nv+1) parameter grid, two triangles per cell, no welding.

    Open u-ends are pulled inward by ``margin`` times the domain length;
    ``nv`` is raised to the next size that puts the seam shift on a node.
    With ``stagger`` the v-nodes sit at half-steps, (j + 1/2) dv, which
    keeps double curves along constant-v lines (kb1 at v = 0, pi) off the
    mesh edges; the seam pairing stays exact because sigma = -1 maps
    half-steps onto half-steps.
    """
    if nu < 3 or nv < 3:
        raise ValueError("tessellate needs nu, nv >= 3")
    nv_used = grid_nv(s, nv)
    u_lo, u_hi = s.domain_u.clipped(margin)
    u = np.linspace(u_lo, u_hi, nu + 1)
    v = np.linspace(s.domain_v.lo, s.domain_v.hi, nv_used + 1)
    if stagger:
        v = v + 0.5 * (v[1] - v[0])
    uu, vv = np.meshgrid(u, v, indexing="ij")
    vertices = surface_eval(s, uu, vv).reshape(-1, 3)

    idx = np.arange((nu + 1) * (nv_used + 1)).reshape(nu + 1, nv_used + 1)
    a = idx[:-1, :-1].ravel()
    b = idx[1:, :-1].ravel()
    c = idx[1:, 1:].ravel()
    d = idx[:-1, 1:].ravel()
    triangles = np.stack([np.stack([a, b, c], 1), np.stack([a, c, d], 1)], 1).reshape(-1, 3)

    ii, jj = np.meshgrid(np.arange(nu + 1), np.arange(nv_used + 1), indexing="ij")
    provenance = {
        "surface": s.name,
        "params": dict(s.params),
        "nu": nu,
        "nv": nv_used,
        "nv_requested": nv,
        "margin": margin,
        "v_offset": 0.5 if stagger else 0.0,
        "u_range": [float(u_lo), float(u_hi)],
        "welded": False,
    }
    return TriangleMesh(
        vertices=vertices,
        triangles=triangles.astype(np.int64),
        provenance=provenance,
        uv=np.stack([uu.ravel(), vv.ravel()], 1),
        grid_index=np.stack([ii.ravel(), jj.ravel()], 1),
    )


def _find(parent: np.ndarray, i: int) -> int:
    while parent[i] != i:
        parent[i] = parent[parent[i]]
        i = parent[i]
    return i


def _union(parent: np.ndarray, a: int, b: int) -> None:
    ra, rb = _find(parent, a), _find(parent, b)
    if ra != rb:
        # smaller index wins so the compacted order is deterministic
        if ra < rb:
            parent[rb] = ra
        else:
            parent[ra] = rb


def weld(m: TriangleMesh, s: ParametricSurface, tol: float = 1e-9) -> TriangleMesh:
    """Merge vertices that are the same point of the surface.

    Seam partners are paired in parameter space: (i, nv) with (i, 0) by
    v-periodicity, and (nu, sigma j + tau/dv) with (0, j) across an exact,
    unclipped identification seam.  Distance-based merging within ``tol`` is
    used only for open-ended surfaces or surfaces without identification,
    because closed-form immersions carry genuine double points that must not
    be fused.
    """
    if m.grid_index is None:
        raise ValueError("weld needs a mesh produced by tessellate")
    nu, nv = m.provenance["nu"], m.provenance["nv"]
    V = m.n_vertices
    idx = np.arange(V).reshape(nu + 1, nv + 1)
    pairs = [np.stack([idx[:, nv], idx[:, 0]], 1)]

    ident = s.identification
    u_lo, u_hi = m.provenance["u_range"]
    seam_closed = (
        ident is not None
        and ident.exact
        and math.isclose(u_lo, s.domain_u.lo)
        and math.isclose(u_hi, s.domain_u.hi)
        and math.isclose(u_hi - u_lo, ident.u_period)
    )
    if seam_closed:
        shift = int(round(ident.v_tau / (2 * math.pi / nv)))
        j = np.arange(nv + 1)
        # node j sits at (j + off) dv; its image sigma (j + off) + shift must be a node
        off = m.provenance.get("v_offset", 0.0)
        image = ident.v_sigma * (j + off) + shift - off
        partner = np.mod(np.rint(image).astype(np.int64), nv)
        pairs.append(np.stack([idx[nu, partner], idx[0, j]], 1))
    pairs = np.concatenate(pairs)

    gap = np.linalg.norm(m.vertices[pairs[:, 0]] - m.vertices[pairs[:, 1]], axis=1)
    if gap.size and gap.max() > 1e3 * tol:
        k = int(np.argmax(gap))
        raise InconsistentSeam(
            f"seam partners {tuple(pairs[k])} are {gap[k]:.3g} apart (limit {1e3 * tol:g})"
        )

    parent = np.arange(V)
    for a, b in pairs:
        _union(parent, int(a), int(b))
    use_distance = ident is None or not seam_closed and s.has_open_ends
    if use_distance and tol > 0:
        for a, b in sorted(cKDTree(m.vertices).query_pairs(tol)):
            _union(parent, a, b)

    roots = np.array([_find(parent, i) for i in range(V)])
    keep = np.unique(roots)
    new_index = np.full(V, -1)
    new_index[keep] = np.arange(len(keep))
    tri = new_index[roots[m.triangles]]
    ok = (tri[:, 0] != tri[:, 1]) & (tri[:, 1] != tri[:, 2]) & (tri[:, 0] != tri[:, 2])
    provenance = {
        **m.provenance,
        "welded": True,
        "seam_welded": bool(seam_closed),
        "distance_weld_tol": tol if use_distance else None,
        "dropped_degenerate": int((~ok).sum()),
    }
    return TriangleMesh(
        vertices=m.vertices[keep],
        triangles=tri[ok],
        provenance=provenance,
        uv=m.uv[keep] if m.uv is not None else None,
    )


# --------------------------------------------------------------------------
# topology
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class MeshTopologyReport:
    V: int
    E: int
    F: int
    euler_characteristic: int
    boundary_edge_count: int
    boundary_loops: int
    watertight: bool
    manifold: bool
    orientable: bool | None

    def to_dict(self) -> dict:
        return {
            "V": self.V,
            "E": self.E,
            "F": self.F,
            "euler_characteristic": self.euler_characteristic,
            "boundary_edge_count": self.boundary_edge_count,
            "boundary_loops": self.boundary_loops,
            "watertight": self.watertight,
            "manifold": self.manifold,
            "orientable": self.orientable,
        }


def _edges(triangles: np.ndarray):
    """Undirected edges, their incidence counts and per-triangle edge ids."""
    directed = np.concatenate(
        [triangles[:, [0, 1]], triangles[:, [1, 2]], triangles[:, [2, 0]]]
    )
    undirected = np.sort(directed, axis=1)
    edges, inverse, counts = np.unique(
        undirected, axis=0, return_inverse=True, return_counts=True
    )
    return edges, counts, inverse.reshape(3, -1).T, directed


def _count_loops(boundary: np.ndarray) -> int:
    if len(boundary) == 0:
        return 0
    from scipy.sparse import coo_matrix
    from scipy.sparse.csgraph import connected_components

    nodes, inv = np.unique(boundary, return_inverse=True)
    inv = inv.reshape(-1, 2)
    g = coo_matrix((np.ones(len(inv)), (inv[:, 0], inv[:, 1])), shape=(len(nodes),) * 2)
    return int(connected_components(g, directed=False)[0])


def _propagate_orientation(triangles: np.ndarray) -> bool:
    """Breadth-first flip assignment across shared edges; False on conflict."""
    F = len(triangles)
    if F == 0:
        return True
    _, counts, tri_edges, directed = _edges(triangles)
    # +1 when the triangle traverses its edge from the smaller vertex
    forward = (directed[:, 0] < directed[:, 1]).reshape(3, -1).T
    incident: dict[int, list[tuple[int, bool]]] = {}
    for t in range(F):
        for k in range(3):
            incident.setdefault(int(tri_edges[t, k]), []).append((t, bool(forward[t, k])))
    flip = np.full(F, -1, dtype=np.int8)
    for seed in range(F):
        if flip[seed] >= 0:
            continue
        flip[seed] = 0
        queue = deque([seed])
        while queue:
            t = queue.popleft()
            for k in range(3):
                users = incident[int(tri_edges[t, k])]
                if len(users) != 2:
                    continue
                (t1, f1), (t2, f2) = users
                other, same_dir = (t2, f1 == f2) if t1 == t else (t1, f1 == f2)
                # consistent neighbours traverse the shared edge in opposite directions
                want = flip[t] ^ int(same_dir)
                if flip[other] < 0:
                    flip[other] = want
                    queue.append(other)
                elif flip[other] != want:
                    return False
    return True


def orientability(m: TriangleMesh) -> bool:
    _, counts, _, _ = _edges(m.triangles)
    if not np.all(counts == 2):
        raise NotWatertight(f"{int((counts != 2).sum())} edges without exactly two triangles")
    return _propagate_orientation(m.triangles)


def euler_characteristic(m: TriangleMesh) -> MeshTopologyReport:
    edges, counts, _, _ = _edges(m.triangles)
    V = len(np.unique(m.triangles)) if m.n_triangles else m.n_vertices
    E = len(edges)
    F = m.n_triangles
    boundary = edges[counts == 1]
    manifold = bool(np.all(counts <= 2))
    watertight = bool(np.all(counts == 2))
    return MeshTopologyReport(
        V=V,
        E=E,
        F=F,
        euler_characteristic=V - E + F,
        boundary_edge_count=len(boundary),
        boundary_loops=_count_loops(boundary),
        watertight=watertight,
        manifold=manifold,
        orientable=_propagate_orientation(m.triangles) if manifold else None,
    )


def compute_normals(m: TriangleMesh) -> TriangleMesh:
    """Area-weighted unit vertex normals.

    Face contributions are first aligned with one reference face per vertex,
    so vertices on an orientation-reversing seam still get a well-defined
    average instead of a cancelled one.
    """
    v = m.vertices
    tri = m.triangles
    face = np.cross(v[tri[:, 1]] - v[tri[:, 0]], v[tri[:, 2]] - v[tri[:, 0]])
    vid = tri.ravel()
    contrib = np.repeat(face, 3, axis=0)
    first = np.full(len(v), len(tri), dtype=np.int64)
    np.minimum.at(first, vid, np.repeat(np.arange(len(tri)), 3))
    has_face = first < len(tri)
    ref = np.zeros_like(v)
    ref[has_face] = face[first[has_face]]
    sign = np.where(np.einsum("ij,ij->i", contrib, ref[vid]) < 0, -1.0, 1.0)
    acc = np.zeros_like(v)
    np.add.at(acc, vid, contrib * sign[:, None])
    norm = np.linalg.norm(acc, axis=1)
    normals = np.zeros_like(v)
    good = norm > 0
    normals[good] = acc[good] / norm[good, None]
    normals[~good] = (0.0, 0.0, 1.0)
    provenance = {**m.provenance, "normal_orientation_conflict": bool(np.any(sign < 0))}
    return replace(m, normals=normals, provenance=provenance)

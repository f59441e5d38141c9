"""Triangle-triangle self-intersection detection over a uniform spatial hash."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .mesh import TriangleMesh

CHUNK = 200_000


@dataclass(frozen=True)
class IntersectionReport:
    intersecting_pairs: int
    pairs_tested: int
    sample_segments: list = field(default_factory=list)
    pairs: np.ndarray = field(default=None, repr=False, compare=False)

    def to_dict(self) -> dict:
        return {
            "intersecting_pairs": self.intersecting_pairs,
            "pairs_tested": self.pairs_tested,
            "sample_segments": [[list(map(float, a)), list(map(float, b))] for a, b in self.sample_segments],
        }


def _dot(a, b):
    return np.einsum("...i,...i->...", a, b)


def _coplanar_overlap(A: np.ndarray, B: np.ndarray, n: np.ndarray, eps: float) -> np.ndarray:
    """Positive-area overlap of coplanar triangle pairs (separating axis test)."""
    overlap = np.ones(len(A), dtype=bool)
    for T in (A, B):
        for k in range(3):
            axis = np.cross(n, T[:, (k + 1) % 3] - T[:, k])
            pa = np.einsum("nij,nj->ni", A, axis)
            pb = np.einsum("nij,nj->ni", B, axis)
            scale = np.linalg.norm(axis, axis=1)
            gap = np.minimum(pa.max(1), pb.max(1)) - np.maximum(pa.min(1), pb.min(1))
            overlap &= gap > eps * scale
    return overlap


def _edge_hits(P: np.ndarray, Q: np.ndarray, eps: float):
    """Crossings of the edges of P through the interior of Q.

    Returns (hit mask (n, 3), crossing points (n, 3, 3)).  An edge counts
    only when its endpoints lie strictly on opposite sides of Q's plane, so
    touching contacts are ignored.
    """
    q0 = Q[:, 0]
    n = np.cross(Q[:, 1] - q0, Q[:, 2] - q0)
    nn = np.linalg.norm(n, axis=1)
    nn = np.where(nn > 0, nn, 1.0)
    n_hat = n / nn[:, None]
    d = np.einsum("nij,nj->ni", P - q0[:, None, :], n_hat)
    hits = np.zeros((len(P), 3), dtype=bool)
    points = np.zeros((len(P), 3, 3))
    for k in range(3):
        d0, d1 = d[:, k], d[:, (k + 1) % 3]
        cross = ((d0 < -eps) & (d1 > eps)) | ((d0 > eps) & (d1 < -eps))
        with np.errstate(divide="ignore", invalid="ignore"):
            s = np.where(cross, d0 / (d0 - d1), 0.0)
        x = P[:, k] + s[:, None] * (P[:, (k + 1) % 3] - P[:, k])
        inside = cross.copy()
        for e in range(3):
            a, b = Q[:, e], Q[:, (e + 1) % 3]
            edge = b - a
            el = np.linalg.norm(edge, axis=1)
            side = _dot(np.cross(edge, x - a), n_hat) / np.where(el > 0, el, 1.0)
            inside &= side >= -eps
        hits[:, k] = inside
        points[:, k] = x
    return hits, points, d


def triangle_pairs_intersect(A: np.ndarray, B: np.ndarray, eps: float):
    """Vectorised intersection predicate for triangle pairs A[i], B[i].

    Returns (mask, segment start, segment end).
    """
    hit_a, pts_a, dA = _edge_hits(A, B, eps)
    hit_b, pts_b, dB = _edge_hits(B, A, eps)
    hits = np.concatenate([hit_a, hit_b], axis=1)
    pts = np.concatenate([pts_a, pts_b], axis=1)
    mask = hits.any(axis=1)

    coplanar = np.all(np.abs(dA) <= eps, axis=1) & np.all(np.abs(dB) <= eps, axis=1)
    if np.any(coplanar):
        idx = np.nonzero(coplanar)[0]
        n = np.cross(B[idx, 1] - B[idx, 0], B[idx, 2] - B[idx, 0])
        n /= np.linalg.norm(n, axis=1)[:, None]
        mask[idx] = _coplanar_overlap(A[idx], B[idx], n, eps)

    first = np.argmax(hits, axis=1)
    start = pts[np.arange(len(pts)), first]
    dist = np.linalg.norm(pts - start[:, None, :], axis=2)
    dist[~hits] = -1.0
    end = pts[np.arange(len(pts)), np.argmax(dist, axis=1)]
    if np.any(coplanar):
        start[coplanar] = A[coplanar].mean(axis=1)
        end[coplanar] = B[coplanar].mean(axis=1)
    return mask, start, end


def _filter_adjacent(tri: np.ndarray, i: np.ndarray, j: np.ndarray) -> np.ndarray:
    a, b = tri[i], tri[j]
    shared = np.zeros(len(i), dtype=bool)
    for p in range(3):
        for q in range(3):
            shared |= a[:, p] == b[:, q]
    return ~shared


def _test_pairs(m: TriangleMesh, i: np.ndarray, j: np.ndarray, eps: float, max_segments: int):
    V = m.vertices
    tri = m.triangles
    found_i, found_j, segs = [], [], []
    for lo in range(0, len(i), CHUNK):
        ci, cj = i[lo : lo + CHUNK], j[lo : lo + CHUNK]
        mask, s0, s1 = triangle_pairs_intersect(V[tri[ci]], V[tri[cj]], eps)
        found_i.append(ci[mask])
        found_j.append(cj[mask])
        if len(segs) < max_segments:
            for a, b in zip(s0[mask], s1[mask]):
                if len(segs) >= max_segments:
                    break
                segs.append((a.copy(), b.copy()))
    pairs = np.stack([np.concatenate(found_i or [np.empty(0, int)]),
                      np.concatenate(found_j or [np.empty(0, int)])], 1)
    return pairs, segs


def _tolerance(m: TriangleMesh) -> float:
    lo, hi = m.bounding_box()
    return 1e-10 * float(np.linalg.norm(hi - lo))


def default_cell_size(m: TriangleMesh) -> float:
    """Twice the median triangle bounding-box diagonal."""
    corners = m.vertices[m.triangles]
    diag = np.linalg.norm(corners.max(axis=1) - corners.min(axis=1), axis=1)
    return 2.0 * float(np.median(diag))


def candidate_pairs(m: TriangleMesh, cell_size: float, pad: float = 0.0):
    """Unique (i < j) triangle pairs whose padded boxes share a hash cell and overlap."""
    corners = m.vertices[m.triangles]
    bmin = corners.min(axis=1) - pad
    bmax = corners.max(axis=1) + pad
    origin = bmin.min(axis=0)
    cmin = np.floor((bmin - origin) / cell_size).astype(np.int64)
    cmax = np.floor((bmax - origin) / cell_size).astype(np.int64)
    span = cmax - cmin + 1
    total = span.prod(axis=1)
    tri_id = np.repeat(np.arange(len(corners)), total)
    # local offset of every (triangle, cell) entry inside its triangle's box
    local = np.arange(total.sum()) - np.repeat(np.cumsum(total) - total, total)
    sy, sz = span[tri_id, 1], span[tri_id, 2]
    ox = local // (sy * sz)
    oy = (local // sz) % sy
    oz = local % sz
    cells = cmin[tri_id] + np.stack([ox, oy, oz], 1)
    dims = cmax.max(axis=0) + 1
    key = (cells[:, 0] * dims[1] + cells[:, 1]) * dims[2] + cells[:, 2]

    order = np.lexsort((tri_id, key))
    key, tri_id = key[order], tri_id[order]
    starts = np.flatnonzero(np.r_[True, key[1:] != key[:-1]])
    ends = np.r_[starts[1:], len(key)]
    group_end = np.repeat(ends, ends - starts)
    counts = group_end - np.arange(len(key)) - 1
    first = np.repeat(np.arange(len(key)), counts)
    offset = np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts, counts)
    second = first + 1 + offset
    i, j = tri_id[first], tri_id[second]
    lo_ij, hi_ij = np.minimum(i, j), np.maximum(i, j)
    packed = np.unique(lo_ij * len(corners) + hi_ij)
    i, j = packed // len(corners), packed % len(corners)
    overlap = np.all((bmin[i] <= bmax[j]) & (bmin[j] <= bmax[i]), axis=1)
    return i[overlap], j[overlap]


def self_intersections(
    m: TriangleMesh, cell_size: float | None = None, max_segments: int = 64
) -> IntersectionReport:
    """Count intersecting triangle pairs, excluding pairs that share a vertex."""
    if m.n_triangles < 2:
        return IntersectionReport(0, 0, [], np.empty((0, 2), int))
    eps = _tolerance(m)
    cs = cell_size or default_cell_size(m)
    i, j = candidate_pairs(m, cs, pad=eps)
    keep = _filter_adjacent(m.triangles, i, j)
    i, j = i[keep], j[keep]
    pairs, segs = _test_pairs(m, i, j, eps, max_segments)
    return IntersectionReport(len(pairs), len(i), segs, pairs)


def brute_force_intersections(m: TriangleMesh) -> IntersectionReport:
    """All-pairs reference used to validate the hash; quadratic.

    Every pair is enumerated; pairs whose padded bounding boxes are disjoint
    cannot intersect and skip the triangle test.
    """
    F = m.n_triangles
    eps = _tolerance(m)
    corners = m.vertices[m.triangles]
    bmin, bmax = corners.min(axis=1) - eps, corners.max(axis=1) + eps
    i, j = np.triu_indices(F, k=1)
    boxes = np.all((bmin[i] <= bmax[j]) & (bmin[j] <= bmax[i]), axis=1)
    i, j = i[boxes], j[boxes]
    keep = _filter_adjacent(m.triangles, i, j)
    i, j = i[keep], j[keep]
    pairs, segs = _test_pairs(m, i, j, eps, 64)
    return IntersectionReport(len(pairs), len(i), segs, pairs)

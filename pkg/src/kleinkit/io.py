"""Mesh exporters (OBJ, binary STL, ASCII PLY) and the JSON report writer.

ASCII formats write floats with ``repr``, the shortest string that reads
back to the same 64-bit value.  STL stores 32-bit floats as the format
requires, so it does not round-trip exactly.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import asdict, dataclass, field
from typing import BinaryIO

import numpy as np

from . import __version__
from .errors import SinkFailure, TooManyTriangles, UnknownParameter
from .mesh import TriangleMesh

STL_HEADER = b"kleinkit binary STL"
REPORT_SCHEMA = 1


def _write(sink: BinaryIO, data: bytes) -> None:
    try:
        sink.write(data)
    except (OSError, ValueError) as exc:
        raise SinkFailure(str(exc)) from exc


def _fmt(x: float) -> str:
    return repr(float(x))


def write_obj(m: TriangleMesh, sink: BinaryIO) -> None:
    lines = [f"v {_fmt(x)} {_fmt(y)} {_fmt(z)}" for x, y, z in m.vertices]
    if m.normals is not None:
        lines += [f"vn {_fmt(x)} {_fmt(y)} {_fmt(z)}" for x, y, z in m.normals]
        lines += [f"f {a}//{a} {b}//{b} {c}//{c}" for a, b, c in m.triangles + 1]
    else:
        lines += [f"f {a} {b} {c}" for a, b, c in m.triangles + 1]
    _write(sink, ("\n".join(lines) + "\n").encode("ascii"))


def face_normals(m: TriangleMesh) -> np.ndarray:
    v = m.vertices[m.triangles]
    n = np.cross(v[:, 1] - v[:, 0], v[:, 2] - v[:, 0])
    norm = np.linalg.norm(n, axis=1)
    out = np.zeros_like(n)
    good = norm > 0
    out[good] = n[good] / norm[good, None]
    return out


def write_stl_binary(m: TriangleMesh, sink: BinaryIO) -> None:
    count = m.n_triangles
    if count > 0xFFFFFFFF:
        raise TooManyTriangles(f"{count} triangles exceed the 32-bit STL count")
    header = STL_HEADER.ljust(80, b"\0")
    records = np.zeros(
        count, dtype=[("normal", "<f4", 3), ("v", "<f4", (3, 3)), ("attr", "<u2")]
    )
    if count:
        records["normal"] = face_normals(m)
        records["v"] = m.vertices[m.triangles]
    _write(sink, header + struct.pack("<I", count) + records.tobytes())


def write_ply_ascii(m: TriangleMesh, sink: BinaryIO) -> None:
    header = [
        "ply",
        "format ascii 1.0",
        "comment kleinkit",
        f"element vertex {m.n_vertices}",
        "property double x",
        "property double y",
        "property double z",
    ]
    if m.normals is not None:
        header += ["property double nx", "property double ny", "property double nz"]
    header += [
        f"element face {m.n_triangles}",
        "property list uchar int vertex_indices",
        "end_header",
    ]
    rows = []
    if m.normals is not None:
        for p, n in zip(m.vertices, m.normals):
            rows.append(" ".join(_fmt(x) for x in (*p, *n)))
    else:
        rows = [" ".join(_fmt(x) for x in p) for p in m.vertices]
    rows += [f"3 {a} {b} {c}" for a, b, c in m.triangles]
    _write(sink, ("\n".join(header + rows) + "\n").encode("ascii"))


WRITERS = {"obj": write_obj, "stl": write_stl_binary, "ply": write_ply_ascii}


# --------------------------------------------------------------------------
# run configuration and report
# --------------------------------------------------------------------------


@dataclass
class RunConfig:
    surface: str
    params: dict = field(default_factory=dict)
    nu: int = 256
    nv: int = 64
    margin: float = 1e-3
    verify: dict = field(default_factory=dict)
    out: str | None = None
    format: str | None = None

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise UnknownParameter(f"unknown run-config keys {sorted(unknown)}")
        return cls(**data)


def _clean(obj):
    """Make a report JSON-safe: numpy scalars to Python, non-finite floats to null."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def build_report(
    config: RunConfig | None = None,
    verification=None,
    topology=None,
    intersections=None,
) -> dict:
    doc = {
        "schema": REPORT_SCHEMA,
        "tool": {"name": "kleinkit", "version": __version__},
        "config": config.to_dict() if config else None,
    }
    if verification is not None:
        doc.update(verification.to_dict())
    if topology is not None:
        doc["topology"] = topology.to_dict()
    if intersections is not None:
        doc["self_intersections"] = intersections.to_dict()
    return _clean(doc)


def write_report(report: dict, sink: BinaryIO) -> None:
    text = json.dumps(_clean(report), indent=2, allow_nan=False)
    _write(sink, (text + "\n").encode("utf-8"))

import sys
from functools import lru_cache
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from kleinkit.mesh import TriangleMesh, tessellate, weld  # noqa: E402
from kleinkit.surfaces import build_surface  # noqa: E402


@lru_cache(maxsize=None)
def welded(name: str, nu: int, nv: int) -> TriangleMesh:
    s = build_surface(name)
    return weld(tessellate(s, nu, nv), s)


def octahedron() -> TriangleMesh:
    v = np.array(
        [[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]], dtype=float
    )
    t = np.array(
        [[0, 2, 4], [2, 1, 4], [1, 3, 4], [3, 0, 4], [2, 0, 5], [1, 2, 5], [3, 1, 5], [0, 3, 5]]
    )
    return TriangleMesh(v, t)


@pytest.fixture
def rng():
    return np.random.default_rng(20260416)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])

"""Exit criteria, one test per criterion.

Each test prints a single ``criterion N: PASS|FAIL`` line; the lines are
repeated in the terminal summary.  Run on its own with

    pytest tests/test_acceptance.py -v -s
"""

import hashlib
import json
import math
import os
import subprocess
import sys
import time

import numpy as np
import pytest

from conftest import octahedron
from kleinkit import curves
from kleinkit.intersect import brute_force_intersections, self_intersections
from kleinkit.mesh import euler_characteristic, tessellate, weld
from kleinkit.surfaces import analytic_partials, build_surface, central_partials, surface_eval
from kleinkit.verify import regularity_scan

pytestmark = pytest.mark.acceptance

TWO_PI = 2 * math.pi
RESULTS: dict[int, str] = {}


def record(n: int, ok: bool, detail: str) -> None:
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS[n] = line
    print(line)
    assert ok, line


def cli(*args, env=None):
    t0 = time.perf_counter()
    proc = subprocess.run(
        [sys.executable, "-m", "kleinkit", *args], capture_output=True, text=True, env=env
    )
    return proc, time.perf_counter() - t0


def test_criterion_1_new_immersions_verify():
    notes, ok = [], True
    for name in ("piriform-tube", "dumbbell-tube"):
        proc, dt = cli("verify", name)
        reg = regularity_scan(build_surface(name), 256, 64, 1e-3)
        good = proc.returncode == 0 and reg.min_det > 0 and dt < 5.0
        ok &= good
        notes.append(f"{name} exit={proc.returncode} min_det={reg.min_det:.3g} {dt:.2f}s")
    record(1, ok, "; ".join(notes))


def test_criterion_2_kb3_fails_at_seam(tmp_path):
    report = tmp_path / "kb3.json"
    proc, dt = cli("verify", "kb3", "--report", str(report))
    seam = json.loads(report.read_text())["seam_tangency"]
    ok = (
        proc.returncode == 2
        and not seam["pass"]
        and seam["location"][0] == pytest.approx(math.pi)
        and seam["max_angle_radians"] > 1e-3
        and dt < 5.0
    )
    record(2, ok, f"exit={proc.returncode} angle={seam['max_angle_radians']:.5f} rad at u={seam['location'][0]:.6f} {dt:.2f}s")


def test_criterion_3_gluing_identities():
    rng = np.random.default_rng(3)
    u, v = TWO_PI * rng.random(10_000), TWO_PI * rng.random(10_000)
    k1 = build_surface("kb1")
    r1 = np.linalg.norm(surface_eval(k1, u + TWO_PI, TWO_PI - v) - surface_eval(k1, u, v), axis=1).max()
    k2 = build_surface("kb2")
    r2 = np.linalg.norm(surface_eval(k2, u + math.pi, math.pi - v) - surface_eval(k2, u, v), axis=1).max()
    record(3, r1 < 1e-9 and r2 < 1e-9, f"kb1 max={r1:.2e} kb2 max={r2:.2e}")


def test_criterion_4_topology():
    t0 = time.perf_counter()
    ok, notes = True, []
    for name in ("kb1", "kb2", "dumbbell-tube"):
        s = build_surface(name)
        topo = euler_characteristic(weld(tessellate(s, 128, 64), s))
        good = topo.watertight and topo.euler_characteristic == 0 and topo.orientable is False
        ok &= good
        notes.append(f"{name} chi={topo.euler_characteristic} orientable={topo.orientable}")
    tor = build_surface("torus")
    topo = euler_characteristic(weld(tessellate(tor, 128, 64), tor))
    ok &= topo.euler_characteristic == 0 and topo.orientable is True
    notes.append(f"torus chi={topo.euler_characteristic} orientable={topo.orientable}")
    octa = euler_characteristic(octahedron())
    ok &= octa.euler_characteristic == 2
    dt = time.perf_counter() - t0
    ok &= dt < 10.0
    record(4, ok, "; ".join(notes) + f"; octahedron chi={octa.euler_characteristic}; {dt:.2f}s")


def test_criterion_5_self_intersections():
    ok, notes = True, []
    for name in ("kb1", "kb2", "kb3", "dumbbell-tube"):
        s = build_surface(name)
        n = self_intersections(weld(tessellate(s, 128, 64), s)).intersecting_pairs
        ok &= n > 0
        notes.append(f"{name}={n}")
    tor = build_surface("torus")
    n_tor = self_intersections(weld(tessellate(tor, 128, 64), tor)).intersecting_pairs
    ok &= n_tor == 0
    notes.append(f"torus={n_tor}")
    for name, nu, nv in (("kb1", 40, 24), ("kb2", 30, 32), ("dumbbell-tube", 40, 24)):
        s = build_surface(name)
        m = weld(tessellate(s, nu, nv), s)
        fast, slow = self_intersections(m), brute_force_intersections(m)
        same = m.n_triangles <= 2000 and np.array_equal(fast.pairs, slow.pairs)
        ok &= same
        notes.append(f"{name} {m.n_triangles} tris hash={fast.intersecting_pairs} brute={slow.intersecting_pairs}")
    record(5, ok, "; ".join(notes))


def test_criterion_6_closure_conditions():
    pir = curves.check_closure_conditions(
        curves.make_cusp_piriform(20, 8), curves.make_radius_sqrt_cusp(5.5, 0.4)
    )
    db = curves.check_closure_conditions(
        curves.make_dumbbell(5, 2), curves.make_radius_dumbbell(0.5, 1 / 30)
    )
    circle = curves.check_closure_conditions(
        curves.make_circle(1.0), curves.make_radius_constant(0.5)
    )
    ok = (
        pir.passed
        and db.passed
        and 0.4 <= pir.cond_iv_exponent <= 0.6
        and 0.4 <= db.cond_iv_exponent <= 0.6
        and not circle.cond_iv_pass
    )
    record(
        6,
        ok,
        f"piriform p={pir.cond_iv_exponent:.4f} dumbbell p={db.cond_iv_exponent:.4f} "
        f"circle iv pass={circle.cond_iv_pass}",
    )


def test_criterion_7_open_boundaries():
    loops = {}
    for name in ("piriform-tube", "trott-tube"):
        s = build_surface(name)
        loops[name] = euler_characteristic(weld(tessellate(s, 256, 64), s)).boundary_loops
    record(7, all(v == 2 for v in loops.values()), " ".join(f"{k}={v}" for k, v in loops.items()))


def _orders(errors):
    return [math.log2(a / b) for a, b in zip(errors, errors[1:])]


def test_criterion_8_convergence_order():
    rng = np.random.default_rng(8)
    steps = [4e-3, 2e-3, 1e-3, 5e-4]
    ok, notes = True, []
    for name in ("kb2", "dumbbell-tube"):
        s = build_surface(name)
        lo, hi = s.domain_u.lo, s.domain_u.hi
        u = lo + (hi - lo) * (0.02 + 0.96 * rng.random(100))
        v = TWO_PI * rng.random(100)
        fu, fv = analytic_partials(s, u, v)
        errs = []
        for h in steps:
            cu, cv = central_partials(s, u, v, h)
            errs.append(max(np.abs(cu - fu).max(), np.abs(cv - fv).max()))
        orders = _orders(errs)
        ok &= all(1.5 <= p <= 2.5 for p in orders)
        notes.append(f"{name} orders={[round(p, 3) for p in orders]}")
    # curve and radius jets of the dumbbell construction
    t = 0.02 + (math.pi - 0.04) * rng.random(100)
    curve, radius = curves.make_dumbbell(5, 2), curves.make_radius_dumbbell(0.5, 1 / 30)
    vel, dr = curves.eval_jet(curve, t).velocity, curves.eval_radius_derivative(radius, t)
    errs_c, errs_r = [], []
    for h in steps:
        errs_c.append(np.abs((curves.position(curve, t + h) - curves.position(curve, t - h)) / (2 * h) - vel).max())
        errs_r.append(np.abs((curves.eval_radius(radius, t + h) - curves.eval_radius(radius, t - h)) / (2 * h) - dr).max())
    for label, errs in (("jet", errs_c), ("radius", errs_r)):
        orders = _orders(errs)
        ok &= all(1.5 <= p <= 2.5 for p in orders)
        notes.append(f"dumbbell {label} orders={[round(p, 3) for p in orders]}")
    record(8, ok, "; ".join(notes))


def _digest(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


def test_criterion_9_determinism(tmp_path):
    # same paths every run: the report echoes the output path
    runs = []
    d = tmp_path
    for threads in ("1", "4", "1"):
        env = {**os.environ, "OMP_NUM_THREADS": threads, "OPENBLAS_NUM_THREADS": threads, "MKL_NUM_THREADS": threads}
        for old in d.iterdir():
            old.unlink()
        digests = {}
        for fmt in ("obj", "stl", "ply"):
            out = d / f"mesh.{fmt}"
            args = ["generate", "kb2", "--nu", "64", "--nv", "32", "--weld", "--out", str(out)]
            if fmt == "obj":
                args += ["--normals", "--report", str(d / "gen.json")]
            proc, _ = cli(*args, env=env)
            assert proc.returncode == 0, proc.stderr
            digests[fmt] = _digest(out)
        for name in ("kb3", "piriform-tube"):
            cli("verify", name, "--report", str(d / f"{name}.json"), env=env)
            digests[name] = _digest(d / f"{name}.json")
        digests["gen"] = _digest(d / "gen.json")
        runs.append(digests)
    same = all(r == runs[0] for r in runs[1:])
    record(9, same, f"{len(runs[0])} artefacts x {len(runs)} runs (threads 1, 4, 1) identical={same}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v", "-s"]))

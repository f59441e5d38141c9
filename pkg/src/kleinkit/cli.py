"""Command-line interface.

    kleinkit list
    kleinkit eval SURFACE --u U --v V [--params k=v,...]
    kleinkit generate SURFACE --out PATH [--format obj|stl|ply] [--weld] [--report PATH]
    kleinkit verify SURFACE [--params k=v,...] [--report PATH]

Exit codes: 0 success, 1 usage error, 2 a verification check failed.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from .curves import ToleranceConfig
from .errors import KleinError, UnknownParameter
from .intersect import self_intersections
from .io import WRITERS, RunConfig, build_report, write_report
from .mesh import compute_normals, euler_characteristic, tessellate, weld
from .surfaces import build_surface, catalog_list, surface_eval
from .verify import VerifyConfig, full_verify

EXIT_OK, EXIT_USAGE, EXIT_FAILED = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _number(key: str, value: str):
    """A float, or a ``lo:hi`` pair of floats."""
    try:
        parts = [float(x) for x in value.split(":")]
    except ValueError:
        raise UsageError(f"{key}: {value!r} is not a number") from None
    return parts[0] if len(parts) == 1 else tuple(parts)


def _parse_pairs(text: str | None, pairs_ok: bool = False) -> dict:
    out: dict = {}
    if not text:
        return out
    for item in text.split(","):
        key, sep, value = item.partition("=")
        if not sep:
            raise UsageError(f"expected key=value, got {item!r}")
        key = key.strip()
        out[key] = _number(key, value)
        if isinstance(out[key], tuple) and not pairs_ok:
            raise UsageError(f"{key}: expected a single number")
    return out


def verify_config(rc: RunConfig) -> VerifyConfig:
    overrides = dict(rc.verify)
    closure_fields = {f.name for f in dataclasses.fields(ToleranceConfig)}
    verify_fields = {f.name for f in dataclasses.fields(VerifyConfig)} - {"closure", "nu", "nv", "margin"}
    closure = {k: overrides.pop(k) for k in list(overrides) if k in closure_fields}
    unknown = set(overrides) - verify_fields
    if unknown:
        raise UnknownParameter(f"unknown tolerance name(s) {sorted(unknown)}")
    defaults = {**dataclasses.asdict(VerifyConfig()), **dataclasses.asdict(ToleranceConfig())}

    def cast(d):
        out = {}
        for k, v in d.items():
            want = defaults[k]
            if isinstance(want, tuple):
                if not isinstance(v, (list, tuple)) or len(v) != len(want):
                    raise UsageError(f"{k} needs {len(want)} values, e.g. {k}=0.4:0.6")
                out[k] = tuple(float(x) for x in v)
            elif isinstance(v, (list, tuple)):
                raise UsageError(f"{k}: expected a single number")
            else:
                out[k] = int(v) if isinstance(want, int) else float(v)
        return out

    return VerifyConfig(
        nu=rc.nu,
        nv=rc.nv,
        margin=rc.margin,
        closure=ToleranceConfig(**cast(closure)),
        **cast(overrides),
    )


def _build_parser() -> _Parser:
    p = _Parser(prog="kleinkit", description="Klein bottle immersions: evaluate, mesh, verify.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    sub.add_parser("list", help="print the surface catalog")

    e = sub.add_parser("eval", help="evaluate one surface point")
    e.add_argument("surface")
    e.add_argument("--u", type=float, required=True)
    e.add_argument("--v", type=float, required=True)
    e.add_argument("--params")

    def common(sp):
        sp.add_argument("surface", nargs="?")
        sp.add_argument("--params", help="parameter overrides, e.g. a=20,b=8")
        sp.add_argument("--nu", type=int)
        sp.add_argument("--nv", type=int)
        sp.add_argument("--margin", type=float)
        sp.add_argument("--tol", help="verification tolerance overrides, e.g. seam_tol=1e-4")
        sp.add_argument("--config", help="JSON run-config document")
        sp.add_argument("--report", help="write a JSON report here")

    g = sub.add_parser("generate", help="tessellate a surface and export a mesh")
    common(g)
    g.add_argument("--out")
    g.add_argument("--format", choices=sorted(WRITERS))
    g.add_argument("--weld", action="store_true")
    g.add_argument("--normals", action="store_true", help="attach vertex normals (OBJ/PLY)")
    g.add_argument(
        "--no-intersections", action="store_true", help="skip self-intersection in the report"
    )

    v = sub.add_parser("verify", help="run the numerical checks")
    common(v)
    return p


def _run_config(args) -> RunConfig:
    if args.config:
        data = json.loads(Path(args.config).read_text(encoding="utf-8"))
        rc = RunConfig.from_dict(data)
    else:
        if not args.surface:
            raise UsageError("a surface name or --config is required")
        rc = RunConfig(surface=args.surface)
    if args.surface:
        rc.surface = args.surface
    rc.params = {**rc.params, **_parse_pairs(args.params)}
    rc.verify = {**rc.verify, **_parse_pairs(args.tol, pairs_ok=True)}
    for name in ("nu", "nv", "margin"):
        if getattr(args, name) is not None:
            setattr(rc, name, getattr(args, name))
    if getattr(args, "out", None):
        rc.out = args.out
    if getattr(args, "format", None):
        rc.format = args.format
    return rc


def _cmd_list(args, out) -> int:
    for entry in catalog_list():
        defaults = ", ".join(f"{k}={v:g}" for k, v in entry["defaults"].items()) or "-"
        flag = "  [known non-immersion]" if entry["known_non_immersion"] else ""
        print(f"{entry['name']:<14} {defaults:<32} {entry['source']}{flag}", file=out)
    return EXIT_OK


def _cmd_eval(args, out) -> int:
    s = build_surface(args.surface, **_parse_pairs(args.params))
    x, y, z = map(float, surface_eval(s, args.u, args.v))
    print(f"{x!r} {y!r} {z!r}", file=out)
    return EXIT_OK


def _cmd_generate(args, out) -> int:
    rc = _run_config(args)
    if not rc.out:
        raise UsageError("generate needs --out")
    fmt = rc.format or Path(rc.out).suffix.lstrip(".").lower()
    if fmt not in WRITERS:
        raise UsageError(f"cannot infer a mesh format from {rc.out!r}; pass --format")
    rc.format = fmt
    s = build_surface(rc.surface, **rc.params)
    mesh = tessellate(s, rc.nu, rc.nv, rc.margin)
    if args.weld:
        mesh = weld(mesh, s)
    if args.normals:
        mesh = compute_normals(mesh)
    with open(rc.out, "wb") as sink:
        WRITERS[fmt](mesh, sink)
    topo = euler_characteristic(mesh)
    print(
        f"{rc.surface}: V={topo.V} E={topo.E} F={topo.F} chi={topo.euler_characteristic} "
        f"watertight={topo.watertight} orientable={topo.orientable} -> {rc.out}",
        file=out,
    )
    if args.report:
        hits = None if args.no_intersections else self_intersections(mesh)
        with open(args.report, "wb") as sink:
            write_report(build_report(rc, topology=topo, intersections=hits), sink)
    return EXIT_OK


def _cmd_verify(args, out) -> int:
    rc = _run_config(args)
    s = build_surface(rc.surface, **rc.params)
    report = full_verify(s, verify_config(rc))
    d = report.to_dict()
    for key in ("regularity", "gluing", "closure", "seam_tangency"):
        item = d.get(key)
        if item is None:
            continue
        note = "" if item.get("enforced", True) else " (informational)"
        print(f"{key:<14} {'PASS' if item['pass'] else 'FAIL'}{note}", file=out)
    seam = d.get("seam_tangency")
    if seam is not None and not seam["pass"]:
        print(
            f"  worst seam u={seam['location']!r} angle={seam['max_angle_radians']!r} rad",
            file=out,
        )
    for key, msg in d["errors"].items():
        print(f"{key:<14} ERROR {msg}", file=out)
    print(f"{rc.surface}: {'PASS' if report.passed else 'FAIL'}", file=out)
    if args.report:
        with open(args.report, "wb") as sink:
            write_report(build_report(rc, verification=report), sink)
    return EXIT_OK if report.passed else EXIT_FAILED


COMMANDS = {
    "list": _cmd_list,
    "eval": _cmd_eval,
    "generate": _cmd_generate,
    "verify": _cmd_verify,
}


def main(argv: list[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    try:
        args = _build_parser().parse_args(argv)
        return COMMANDS[args.command](args, out)
    except (UsageError, UnknownParameter, json.JSONDecodeError) as exc:
        print(f"kleinkit: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except KleinError as exc:
        print(f"kleinkit: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"kleinkit: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

Subcommands: synthesize, verify, extract, scan, measure-band, qudit-check, fig1.
Exit codes: 0 ok, 1 domain error or failed check, 2 I/O or format error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from .bloch import ZERO, PureQubit, SphereCircle, circle_point_array, write_points_csv
from .extract import extract_circle, fit_plane, scan_superposable
from .linalg import array_to_json
from .measure import band_fraction
from .qudit import QuditProtocol, violation_circle, violation_fraction
from .superposition import SuperpositionSpec, is_superposable
from .synthesize import (
    SuperpositionChannel,
    alternate_channel,
    load_channel,
    output_point,
    save_channel,
    synthesize_channel,
)

EXIT_OK, EXIT_DOMAIN, EXIT_IO = 0, 1, 2
# verify accepts angles typed to ~5 digits; the library default (1e-9) is too strict for that
VERIFY_TOL = 1e-5
FIG1_OFFSETS = (-1.5, 0.0, 1.3)


class InputError(Exception):
    pass


def _dump(obj, fh=None) -> None:
    fh = fh or sys.stdout
    json.dump(obj, fh, indent=2, sort_keys=True)
    fh.write("\n")


def _angle(value: float, deg: bool) -> float:
    return math.radians(value) if deg else value


def _parse_plane(text: str) -> tuple[float, float, float, float]:
    try:
        parts = [float(t) for t in text.split(",")]
    except ValueError as exc:
        raise ValueError(f"--plane expects nx,ny,nz,d: {exc}") from None
    if len(parts) != 4:
        raise ValueError("--plane expects exactly four comma-separated numbers nx,ny,nz,d")
    return tuple(parts)


def _circle_from_args(args) -> SphereCircle:
    if args.plane is not None:
        return SphereCircle.from_plane(*_parse_plane(args.plane))
    return SphereCircle(_angle(args.mu, args.deg), _angle(args.nu, args.deg), args.c)


def _load(path) -> SuperpositionChannel:
    try:
        return load_channel(path)
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise InputError(f"cannot read channel file {path}: {exc}") from exc


def cmd_synthesize(args) -> int:
    if args.alternate:
        ch = alternate_channel()
    else:
        ch = synthesize_channel(_circle_from_args(args))
    if args.output:
        try:
            save_channel(ch, args.output)
        except OSError as exc:
            raise InputError(str(exc)) from exc
        summary = {
            "alpha": array_to_json(ch.spec.alpha),
            "beta": array_to_json(ch.spec.beta),
            "lambda": ch.lam,
            "circle": ch.circle.to_json() if ch.circle else None,
            "output_state": array_to_json(ch.output_state.vector) if ch.output_state else None,
            "file": str(args.output),
        }
        _dump(summary)
    else:
        _dump(ch.to_json())
    return EXIT_OK


def cmd_verify(args) -> int:
    ch = _load(args.channel)
    psi = PureQubit.from_angles(_angle(args.x, args.deg), _angle(args.y, args.deg))
    ok, report = is_superposable(ch.cp_map, ch.spec, psi, ZERO, args.tol)
    out = report.to_json()
    out["superposable"] = ok
    _dump(out)
    return EXIT_OK if ok else EXIT_DOMAIN


def cmd_extract(args) -> int:
    ch = _load(args.channel)
    circ, trace = extract_circle(ch.kraus, ch.spec, args.tol)
    _dump({"circle": circ.to_json(), "trace": trace.to_json()})
    return EXIT_OK


def cmd_scan(args) -> int:
    ch = _load(args.channel)
    pts = scan_superposable(ch.cp_map, ch.spec, args.grid, args.tol)
    result = {"count": len(pts), "grid": args.grid, "tol": args.tol, "fit": None}
    if len(pts) >= 3:
        try:
            circ, max_res = fit_plane(pts)
            result["fit"] = {"circle": circ.to_json(), "max_residual": max_res}
        except ValueError as exc:
            result["fit"] = {"error": str(exc)}
    if args.csv:
        write_points_csv(args.csv, pts)
        result["csv"] = str(args.csv)
    else:
        result["points"] = [[p.X, p.Y, p.Z] for p in pts]
    _dump(result)
    return EXIT_OK


def cmd_measure_band(args) -> int:
    est = band_fraction(_circle_from_args(args), args.eps, args.samples, args.seed)
    _dump(est.to_json())
    return EXIT_OK


def cmd_qudit_check(args) -> int:
    r = math.sqrt(0.5)
    proto = QuditProtocol(SuperpositionSpec(r, r), 0.0, _angle(args.gamma, args.deg))
    frac = violation_fraction(proto, args.eps, args.samples, args.seed)
    _dump({"fraction": frac, "circle": violation_circle(proto).to_json()})
    return EXIT_OK


def fig1_data(n_points: int = 256) -> dict:
    """Circle point sets on the planes X + Y + Z + c = 0 and their shared output point."""
    circles = []
    for c in FIG1_OFFSETS:
        circ = SphereCircle.from_plane(1.0, 1.0, 1.0, c)
        ch = synthesize_channel(circ)
        pts = circle_point_array(circ, n_points)
        probs = (1.0 - pts[:, 2]) / 2.0
        best = int(np.argmax(probs))
        circles.append(
            {
                "plane_offset": c,
                "circle": circ.to_json(),
                "points": pts,
                "success_prob": probs,
                "max_prob_point": pts[best].tolist(),
                "max_prob": float(probs[best]),
                "output_point": output_point(ch).as_array().tolist(),
            }
        )
    return {"circles": circles}


def cmd_fig1(args) -> int:
    outdir = Path(args.outdir)
    try:
        outdir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise InputError(str(exc)) from exc
    data = fig1_data(args.points)
    manifest = {"plane": "X + Y + Z + c = 0", "circles": []}
    for entry in data["circles"]:
        name = f"circle_c{entry['plane_offset']:+.1f}.csv"
        write_points_csv(outdir / name, entry["points"], {"success_prob": entry["success_prob"]})
        manifest["circles"].append(
            {
                "c": entry["plane_offset"],
                "file": name,
                "circle": entry["circle"],
                "max_prob": entry["max_prob"],
                "max_prob_point": entry["max_prob_point"],
                "min_prob": float(np.min(entry["success_prob"])),
            }
        )
    manifest["output_point"] = data["circles"][0]["output_point"]
    with open(outdir / "manifest.json", "w") as fh:
        _dump(manifest, fh)
    _dump(manifest)
    return EXIT_OK


def _add_circle_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--mu", type=float, default=0.0)
    p.add_argument("--nu", type=float, default=0.0)
    p.add_argument("--c", type=float, default=0.0)
    p.add_argument("--plane", help="nx,ny,nz,d for the plane nx X + ny Y + nz Z + d = 0")
    p.add_argument("--deg", action="store_true", help="angles are in degrees")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qsuperpose", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synthesize", help="build the channel for a circle")
    _add_circle_flags(p)
    p.add_argument("--alternate", action="store_true", help="emit the Z = -1/2 alternate fixture")
    p.add_argument("-o", "--output", help="write channel JSON here (default: stdout)")
    p.set_defaults(func=cmd_synthesize)

    p = sub.add_parser("verify", help="check one input state against a channel")
    p.add_argument("channel")
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--y", type=float, default=0.0)
    p.add_argument("--tol", type=float, default=VERIFY_TOL)
    p.add_argument("--deg", action="store_true")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("extract", help="circle of superposable states of a channel")
    p.add_argument("channel")
    p.add_argument("--tol", type=float, default=1e-9)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("scan", help="numerically scan the sphere for superposable states")
    p.add_argument("channel")
    p.add_argument("--grid", type=int, default=100)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--csv", help="write accepted points as CSV instead of inline JSON")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("measure-band", help="Monte Carlo area of a band around a circle")
    _add_circle_flags(p)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_measure_band)

    p = sub.add_parser("qudit-check", help="fraction of states near the dependence circle")
    p.add_argument("--gamma", type=float, default=0.0)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--deg", action="store_true")
    p.set_defaults(func=cmd_qudit_check)

    p = sub.add_parser("fig1", help="emit circle data for the planes X + Y + Z + c = 0")
    p.add_argument("--outdir", default="fig1")
    p.add_argument("--points", type=int, default=256)
    p.set_defaults(func=cmd_fig1)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())

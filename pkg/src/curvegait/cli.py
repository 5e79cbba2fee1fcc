"""Command line front end: ``curvegait {synth,curv,analyze,validate}``.

Exit codes are 0 on success, 1 for data or I/O errors and 2 for usage
errors. Every command writes its outputs atomically and records a run
manifest listing parameters and output files.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from ._parallel import max_workers
from .analysis import (
    DEFAULT_BAND,
    DEFAULT_RADIUS,
    average_curvature_map,
    classify_symmetry,
    knee_region_average,
    knee_time_series,
    mirror_asymmetry,
    sequence_fields,
    sequence_symmetry,
)
from .colormap import SCALE_MODES, SYMMETRIC, ColorScale, auto_scale, colorize_mesh, pooled_scale
from .curvature import CURVATURE_TYPES, curvature_field, gauss_bonnet_total
from .export import write_json, write_text
from .mesh import AREA_SCHEMES, MeshError, validate
from .mesh_io import FORMATS, read_mesh, write_mesh
from .synth import BodyParams, GaitSequence, GaitType, PostureLabel, synth_gait

logger = logging.getLogger("curvegait")

MANIFEST = "manifest.json"


class UsageError(Exception):
    """Bad arguments discovered after parsing."""


def _gait(text):
    try:
        return GaitType.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _positive(cast):
    def parse(text):
        value = cast(text)
        if value <= 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return value
    return parse


def _manifest(command, inputs, parameters, outputs):
    return {
        "command": command,
        "tool_version": __version__,
        "inputs": [Path(p).as_posix() for p in inputs],
        "parameters": parameters,
        "outputs": sorted(outputs),
    }


# ---------------------------------------------------------------------------
# synth

def cmd_synth(args):
    if args.fpc % 2 or args.fpc < 8:
        raise UsageError("--fpc must be even and at least 8")
    params = BodyParams(height=args.height, step_length=args.step_length)
    seq = synth_gait(params, args.gait, args.cycles, args.fpc, noise=args.noise, seed=args.seed,
                     stride_fraction=args.stride_fraction)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    width = max(3, len(str(len(seq) - 1)))
    frames = []
    for i, (mesh, label) in enumerate(zip(seq.frames, seq.labels)):
        name = f"frame_{i:0{width}d}.{args.format}"
        write_mesh(out / name, mesh)
        frames.append({"file": name, "label": str(label) if label else None})
    parameters = {
        "gait_type": seq.gait_type.slug,
        "cycles": args.cycles,
        "frames_per_cycle": args.fpc,
        "body_height": args.height,
        "step_length": args.step_length,
        "stride_fraction": args.stride_fraction,
        "noise": args.noise,
        "seed": args.seed,
        "format": args.format,
    }
    manifest = _manifest("synth", [], parameters, [f["file"] for f in frames])
    manifest["frames"] = frames
    write_json(out / MANIFEST, manifest)
    logger.info("wrote %d frames to %s", len(frames), out)
    return 0


def load_sequence(path):
    """Rebuild a :class:`GaitSequence` from a synth manifest (file or directory)."""
    path = Path(path)
    if path.is_dir():
        path = path / MANIFEST
    manifest = json.loads(path.read_text())
    p = manifest["parameters"]
    frames, labels = [], []
    for i, entry in enumerate(manifest["frames"]):
        mesh = read_mesh(path.parent / entry["file"])
        if frames and (mesh.n_vertices != frames[0].n_vertices
                       or not np.array_equal(mesh.triangles, frames[0].triangles)):
            raise MeshError(f"frame {i} ({entry['file']}) does not share the connectivity of frame 0")
        # share one triangle array so the sequence check is cheap
        frames.append(frames[0].with_vertices(mesh.vertices) if frames else mesh)
        labels.append(PostureLabel.parse(entry["label"]) if entry.get("label") else None)
    seq = GaitSequence(frames=frames, labels=labels, frames_per_cycle=int(p["frames_per_cycle"]),
                       gait_type=GaitType.parse(p["gait_type"]),
                       body_height=float(p["body_height"]),
                       step_length=float(p.get("step_length", 0.65)))
    return seq, manifest


# ---------------------------------------------------------------------------
# curv

def _scale(values, args):
    if args.vmax is not None:
        if args.scale_mode != SYMMETRIC:
            raise UsageError("--vmax only applies to the symmetric scale")
        return ColorScale.symmetric(args.vmax)
    return auto_scale(values, args.scale_mode)


def cmd_curv(args):
    src = Path(args.mesh)
    mesh = read_mesh(src)
    report = validate(mesh)
    if not report.is_manifold:
        print(json.dumps(report.to_dict(), indent=2), file=sys.stderr)
        raise MeshError(f"{src} is not a manifold mesh")
    field = curvature_field(mesh, area_scheme=args.area_scheme)
    values = field.get(args.type)
    scale = _scale(values, args)
    out = Path(args.out) if args.out else src.with_name(f"{src.stem}_{args.type}.ply")
    stats_path = Path(args.stats) if args.stats else out.with_suffix(".json")
    write_mesh(out, mesh, colorize_mesh(mesh, values, scale))
    reliable = field.reliable
    stats = {
        "curvature_type": args.type,
        "n_vertices": mesh.n_vertices,
        "n_triangles": mesh.n_triangles,
        "min": float(values[reliable].min()),
        "max": float(values[reliable].max()),
        "mean": float(values[reliable].mean()),
        "clamped_fraction": float(field.clamped.mean()),
        "euler_characteristic": report.euler_characteristic,
        "closed": report.is_closed,
        "gauss_bonnet_total": gauss_bonnet_total(mesh) if report.is_closed else None,
        "scale": scale.to_dict(),
    }
    stats.update(_manifest("curv", [src], {
        "curvature_type": args.type, "area_scheme": args.area_scheme,
        "scale_mode": scale.mode, "vmax": args.vmax,
    }, [out.name, stats_path.name]))
    write_json(stats_path, stats)
    return 0


# ---------------------------------------------------------------------------
# analyze

def cmd_analyze(args):
    seq, _ = load_sequence(args.manifest)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    fields = sequence_fields(seq)
    h = seq.body_height
    outputs = []
    if args.analysis == "knees":
        ts = knee_time_series(seq, tuple(args.band), args.radius, fields)
        write_text(out / "knee_series.csv", ts.to_csv())
        cls = classify_symmetry(ts)
        write_json(out / "classification.json", cls.to_dict())
        outputs += ["knee_series.csv", "classification.json"]
        print(cls.label)
    elif args.analysis == "symmetry":
        entries = sequence_symmetry(seq, args.type, fields, band=tuple(args.band), radius=args.radius)
        scale = pooled_scale([e.residual for e in entries], args.scale_mode)
        for e in entries:
            i, j = e.frames
            name = f"residual_{i:03d}_{j:03d}.ply"
            s = auto_scale(e.residual, args.scale_mode) if args.per_frame_scale else scale
            write_mesh(out / name, seq.frames[i], colorize_mesh(seq.frames[i], e.residual, s))
            outputs.append(name)
        write_json(out / "symmetry.json", {
            "curvature_type": args.type,
            "pairs": [e.to_dict() for e in entries],
            "scale": None if args.per_frame_scale else scale.to_dict(),
        })
        outputs.append("symmetry.json")
    else:
        avg = average_curvature_map(seq, args.type, args.cycle, dict(enumerate(fields)))
        scale = auto_scale(avg.values, args.scale_mode)
        name = f"average_{args.type}_cycle{args.cycle}.ply"
        write_mesh(out / name, avg.mesh, colorize_mesh(avg.mesh, avg.values, scale))
        summary = {
            "curvature_type": args.type,
            "cycle": args.cycle,
            "frames": list(avg.frames),
            "mirrored_residual_index": mirror_asymmetry(avg.mesh, avg.values, h),
            "scale": scale.to_dict(),
        }
        left = knee_region_average(avg, "left", h, tuple(args.band), args.radius)
        right = knee_region_average(avg, "right", h, tuple(args.band), args.radius)
        summary.update(left_knee_mean_abs=left, right_knee_mean_abs=right,
                       left_right_ratio=left / right if right > 0 else None)
        write_json(out / "average.json", summary)
        outputs += [name, "average.json"]
    write_json(out / MANIFEST, _manifest("analyze", [args.manifest], {
        "analysis": args.analysis, "curvature_type": args.type, "band": list(args.band),
        "radius": args.radius, "cycle": args.cycle, "scale_mode": args.scale_mode,
        "per_frame_scale": args.per_frame_scale,
    }, outputs))
    return 0


# ---------------------------------------------------------------------------
# validate

def cmd_validate(args):
    report = validate(read_mesh(args.mesh))
    print(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    return 0 if report.ok else 1


def build_parser():
    p = argparse.ArgumentParser(prog="curvegait", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", help="synthesise a walking sequence")
    s.add_argument("--gait", type=_gait, default=GaitType.NORMAL,
                   help="normal, locked-left-knee or half-step")
    s.add_argument("--cycles", type=_positive(int), default=2)
    s.add_argument("--fpc", type=_positive(int), default=8, help="frames per cycle (even, >= 8)")
    s.add_argument("--height", type=_positive(float), default=1.73)
    s.add_argument("--step-length", type=_positive(float), default=0.65)
    s.add_argument("--stride-fraction", type=_positive(float), default=0.5)
    s.add_argument("--noise", type=float, default=0.0, help="vertex jitter sigma in metres")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--format", choices=FORMATS, default="ply")
    s.add_argument("--out", required=True, help="output directory")
    s.set_defaults(func=cmd_synth)

    def add_scale(q):
        q.add_argument("--scale-mode", choices=SCALE_MODES, default=SYMMETRIC)

    c = sub.add_parser("curv", help="curvature of one mesh as a coloured mesh plus stats")
    c.add_argument("mesh")
    c.add_argument("--type", choices=CURVATURE_TYPES, default="gaussian")
    c.add_argument("--area-scheme", choices=AREA_SCHEMES, default="barycentric")
    add_scale(c)
    c.add_argument("--vmax", type=_positive(float), help="fixed symmetric half range")
    c.add_argument("--out", help="coloured mesh path (.ply or .obj)")
    c.add_argument("--stats", help="statistics JSON path")
    c.set_defaults(func=cmd_curv)

    a = sub.add_parser("analyze", help="knee series, half-cycle symmetry or cycle average")
    a.add_argument("manifest", help="synth manifest or its directory")
    a.add_argument("--analysis", choices=("knees", "symmetry", "average"), default="knees")
    a.add_argument("--type", choices=CURVATURE_TYPES, default="gaussian")
    a.add_argument("--band", type=float, nargs=2, default=list(DEFAULT_BAND), metavar=("LOW", "HIGH"))
    a.add_argument("--radius", type=_positive(float), default=DEFAULT_RADIUS)
    a.add_argument("--cycle", type=int, default=0)
    add_scale(a)
    a.add_argument("--per-frame-scale", action="store_true")
    a.add_argument("--out", required=True, help="output directory")
    a.set_defaults(func=cmd_analyze)

    v = sub.add_parser("validate", help="print a mesh validation report")
    v.add_argument("mesh")
    v.set_defaults(func=cmd_validate)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        try:
            max_workers()
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        if getattr(args, "band", None) is not None and not 0 <= args.band[0] < args.band[1] <= 1:
            raise UsageError("--band needs 0 <= LOW < HIGH <= 1")
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"curvegait: error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError, IndexError, KeyError) as exc:
        # MeshError, DetectionError and CorrespondenceError are ValueErrors
        print(f"curvegait: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Command-line interface: gen, detect, eval, bench.

Exit codes: 0 success, 2 usage or invalid flag values, 3 unreadable or
malformed data, 4 a method refused its input (naive size guard).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
import time
from dataclasses import replace
from pathlib import Path

from . import __version__
from .detection import (DetectorConfig, HoughConfig, RansacConfig, TrackSet,
                        find_all_tracks, find_all_tracks_with_vertical, parse_selection)
from .errors import InfeasibleConfig, ParseError, SchemaError, TooLarge
from .evaluation import MatchConfig, bench_scaling, score
from .synthetic import (SceneConfig, generate_scene, read_points, read_tracks,
                        tracks_to_json, write_scene)

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_GUARD = 0, 2, 3, 4

log = logging.getLogger("tracksweep")


class UsageError(Exception):
    def __init__(self, flag, message):
        super().__init__(f"{flag}: {message}")
        self.flag = flag


def _sha256(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _write_manifest(path, command, args, inputs, outputs, wall):
    config = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    doc = {
        "command": command,
        "argv": sys.argv[1:],
        "config": config,
        "seeds": {k: v for k, v in config.items() if "seed" in k},
        "inputs": {str(p): _sha256(p) for p in inputs},
        "outputs": {str(p): _sha256(p) for p in outputs},
        "tool_version": __version__,
        "wall_seconds": wall,
    }
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True, default=str) + "\n")


def _manifest_for(out):
    out = Path(out)
    return out.with_name(out.stem + ".manifest.json")


def _positive(flag, value):
    if not value > 0:
        raise UsageError(flag, f"must be positive, got {value}")


# -- commands ---------------------------------------------------------------

def cmd_gen(args):
    t0 = time.perf_counter()
    try:
        cfg = SceneConfig(frames=args.frames, width=args.width, height=args.height,
                          targets=args.targets, clutter_per_frame=args.clutter,
                          jitter_sigma=args.jitter, speed_range=(args.speed_min, args.speed_max),
                          dropout_prob=args.dropout, seed=args.seed, clutter_mode=args.clutter_mode)
    except ValueError as exc:
        raise UsageError("gen", str(exc)) from None
    scene = generate_scene(cfg)
    out = Path(args.out)
    pts, gt = write_scene(scene, out)
    _write_manifest(out / "manifest.json", "gen", args, [], [pts, gt], time.perf_counter() - t0)
    print(f"wrote {len(scene.points)} points and {len(scene.gt)} tracks to {out}")
    return EXIT_OK


def _detector_config(args):
    _positive("--eps1", args.eps1)
    _positive("--eps2", args.eps2)
    if args.min_len < 3:
        raise UsageError("--min-len", f"must be at least 3, got {args.min_len}")
    try:
        selection = parse_selection(args.select)
    except ValueError as exc:
        raise UsageError("--select", str(exc)) from None
    return DetectorConfig(
        eps1=args.eps1, eps2=args.eps2, min_frames=args.min_len, method=args.method,
        selection=selection,
        ransac=RansacConfig(args.ransac_iterations, None, args.min_len, args.seed),
        hough=HoughConfig(args.hough_rho_bins, args.hough_theta_bins, args.hough_peaks, None))


def cmd_detect(args):
    cfg = _detector_config(args)
    ps = read_points(args.input)
    t0 = time.perf_counter()
    run = find_all_tracks if args.no_vertical else find_all_tracks_with_vertical
    ts = run(ps, cfg) if len(ps) else TrackSet([], cfg.params())
    wall = time.perf_counter() - t0
    # report ids as rows of the input file (duplicates were dropped on read)
    kept = ps.kept
    tracks = [replace(t, point_ids=tuple(int(kept[i]) for i in t.point_ids)) for t in ts.tracks]
    out_ts = TrackSet(tracks, ts.params)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(tracks_to_json(out_ts))
    _write_manifest(_manifest_for(out), "detect", args, [args.input], [out], wall)
    print(f"{len(out_ts)} track(s) written to {out}")
    return EXIT_OK


def cmd_eval(args):
    _positive("--lambda", args.lam)
    ps = read_points(args.points, dedupe=False)
    gt = read_tracks(args.gt, n_points=len(ps))
    pred = read_tracks(args.pred, n_points=len(ps))
    report = score(gt, pred, ps, MatchConfig(args.lam))
    text = report.to_json()
    if args.out:
        out = Path(args.out)
        out.write_text(text)
        _write_manifest(_manifest_for(out), "eval", args, [args.points, args.gt, args.pred], [out], 0.0)
    sys.stdout.write(text)
    return EXIT_OK


def _int_list(flag, text):
    try:
        vals = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(flag, f"expected comma-separated integers, got {text!r}") from None
    if not vals or any(v < 1 for v in vals):
        raise UsageError(flag, "needs at least one positive integer")
    return vals


def cmd_bench(args):
    sizes = _int_list("--sizes", args.sizes)
    if sizes != sorted(sizes):
        raise UsageError("--sizes", "must be ascending")
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    bad = [m for m in methods if m not in ("ts", "ps", "ransac", "hough", "naive")]
    if bad or not methods:
        raise UsageError("--methods", f"unknown method(s) {bad}")
    if args.repeats < 1:
        raise UsageError("--repeats", "must be positive")
    _positive("--timeout", args.timeout)
    template = SceneConfig(frames=args.frames, width=args.width, height=args.height,
                           targets=args.targets, jitter_sigma=args.jitter)
    t0 = time.perf_counter()
    res = bench_scaling(sizes, template, methods, args.repeats, args.seed, args.timeout,
                        vertical=args.vertical,
                        det_cfg=DetectorConfig(eps1=args.eps1, eps2=args.eps2))
    text = res.to_csv()
    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text)
        _write_manifest(_manifest_for(out), "bench", args, [], [out], time.perf_counter() - t0)
    sys.stdout.write(text)
    return EXIT_OK


# -- parser -------------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="tracksweep", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a synthetic scene")
    g.add_argument("--frames", type=int, default=5)
    g.add_argument("--targets", type=int, default=4)
    g.add_argument("--clutter", type=int, default=200, help="clutter points per frame")
    g.add_argument("--jitter", type=float, default=0.5)
    g.add_argument("--width", type=float, default=2048.0)
    g.add_argument("--height", type=float, default=2048.0)
    g.add_argument("--speed-min", type=float, default=5.0)
    g.add_argument("--speed-max", type=float, default=30.0)
    g.add_argument("--dropout", type=float, default=0.0)
    g.add_argument("--clutter-mode", choices=("uniform", "streak"), default="uniform")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen)

    d = sub.add_parser("detect", help="find tracks in a points CSV")
    d.add_argument("--input", required=True)
    d.add_argument("--eps1", type=float, default=2.0)
    d.add_argument("--eps2", type=float, default=2.0)
    d.add_argument("--min-len", type=int, default=3)
    d.add_argument("--method", choices=("ts", "ps", "ransac", "hough", "naive"), default="ts")
    d.add_argument("--select", default="all", help="all | topk:K | thresh:Tr")
    d.add_argument("--no-vertical", action="store_true", help="skip the swapped-axis pass")
    d.add_argument("--seed", type=int, default=0, help="RANSAC seed")
    d.add_argument("--ransac-iterations", type=int, default=1000)
    d.add_argument("--hough-rho-bins", type=int, default=1024)
    d.add_argument("--hough-theta-bins", type=int, default=180)
    d.add_argument("--hough-peaks", type=int, default=20)
    d.add_argument("--out", required=True)
    d.set_defaults(func=cmd_detect)

    e = sub.add_parser("eval", help="score predicted tracks against ground truth")
    e.add_argument("--pred", required=True)
    e.add_argument("--gt", required=True)
    e.add_argument("--points", required=True)
    e.add_argument("--lambda", dest="lam", type=float, default=3.0)
    e.add_argument("--out")
    e.set_defaults(func=cmd_eval)

    b = sub.add_parser("bench", help="runtime versus number of points")
    b.add_argument("--sizes", default="200,400,800,1600")
    b.add_argument("--methods", default="ts")
    b.add_argument("--repeats", type=int, default=5)
    b.add_argument("--seed", type=int, default=1)
    b.add_argument("--timeout", type=float, default=300.0)
    b.add_argument("--frames", type=int, default=5)
    b.add_argument("--targets", type=int, default=4)
    b.add_argument("--jitter", type=float, default=0.5)
    b.add_argument("--width", type=float, default=2048.0)
    b.add_argument("--height", type=float, default=2048.0)
    b.add_argument("--eps1", type=float, default=2.0)
    b.add_argument("--eps2", type=float, default=2.0)
    b.add_argument("--vertical", action="store_true", help="time both passes")
    b.add_argument("--out")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"tracksweep {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ParseError, SchemaError, FileNotFoundError, IsADirectoryError) as exc:
        print(f"tracksweep {args.command}: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except TooLarge as exc:
        print(f"tracksweep {args.command}: refused: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except InfeasibleConfig as exc:
        print(f"tracksweep {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        # invalid values that slipped past flag checks (e.g. negative counts)
        print(f"tracksweep {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

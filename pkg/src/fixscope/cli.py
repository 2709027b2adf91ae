"""``fixscope`` command line: build, rescale, analyze, synth and batch.

Exit status is 0 on success, 1 on usage errors and 2 on data errors. All
diagnostics go to stderr.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .correlation import (
    DEFAULT_DISTANCES,
    DEFAULT_WINDOWS,
    PRESETS,
    AnalysisConfig,
    AnalysisError,
    AnalysisReport,
    category_mean,
    feasible,
    run_report,
)
from .export import curve_csv, heatmap_csv, heatmap_pgm, table_csv, write_text
from .fixmap import FixMapError, ScaleSpec, build_map, read_map, rescale, write_map
from .gaze import GazeParseError, RecordingMeta, filter_attentive, format_gaze, parse_gaze_file
from .rng import derive_seed
from .synth import Kind, Scenario, SynthError, generate_with_gaze

log = logging.getLogger("fixscope")

REFERENCE_REDUCTION = 0.0815
REFERENCE_VARIANCE = 3.2416e-05
REFERENCE_TOLERANCE = 0.02

DATA_ERRORS = (FixMapError, GazeParseError, AnalysisError, SynthError, OSError, ValueError)


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def parse_lags(text: str) -> tuple[int, ...]:
    """``"1-5,8,10"`` -> (1, 2, 3, 4, 5, 8, 10)."""
    out: list[int] = []
    try:
        for part in text.split(","):
            lo, sep, hi = part.strip().partition("-")
            out.extend(range(int(lo), int(hi) + 1) if sep else [int(lo)])
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad lag list {text!r}") from None
    return tuple(sorted(set(out)))


def _scale(text: str) -> ScaleSpec:
    try:
        return ScaleSpec.parse(text)
    except FixMapError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _dims(text: str) -> tuple[int, int, int]:
    try:
        m, n, k = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad dims {text!r}, expected MxNxK") from None
    return m, n, k


def threads() -> int:
    cap = os.environ.get("FIXSCOPE_THREADS")
    if cap:
        try:
            return max(1, int(cap))
        except ValueError:
            raise UsageError(f"FIXSCOPE_THREADS must be an integer, got {cap!r}") from None
    return min(4, os.cpu_count() or 1)


def _add_analysis_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--scale", type=_scale, default=ScaleSpec(40, 40),
                   help="block-sum window applied before analysis (default 40x40)")
    p.add_argument("--full-res", action="store_true", help="analyse the map without rescaling")
    p.add_argument("--distances", type=parse_lags, help="pair distances D (default 1-15, clipped to K)")
    p.add_argument("--windows", type=parse_lags, help="window sizes N (default 1-12, clipped to K)")
    p.add_argument("--neighborhoods", default="ALL26",
                   help=f"comma list from {','.join(PRESETS)} (default ALL26)")
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fixscope", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"fixscope {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("build", help="build a fixation map from gaze records")
    p.add_argument("--gaze", action="append", required=True, type=Path,
                   help="gaze record file; repeat once per subject")
    p.add_argument("--meta", required=True, type=Path, help="key=value metadata sidecar")
    p.add_argument("--frames", required=True, type=int)
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--scale", type=_scale)
    p.add_argument("--skip-oob", action="store_true", help="drop out-of-frame samples instead of failing")
    p.add_argument("--truncate", action="store_true", help="drop samples past the last frame")

    p = sub.add_parser("rescale", help="block-sum a map")
    p.add_argument("--map", required=True, type=Path)
    p.add_argument("--scale", required=True, type=_scale)
    p.add_argument("--out", required=True, type=Path)

    p = sub.add_parser("analyze", help="run all correlation studies on one map")
    p.add_argument("--map", required=True, type=Path)
    p.add_argument("--out", required=True, type=Path, help="report directory")
    p.add_argument("--name", default="")
    p.add_argument("--category", default="")
    _add_analysis_options(p)

    p = sub.add_parser("synth", help="generate a synthetic scenario map")
    p.add_argument("--scenario", required=True, help=", ".join(k.value for k in Kind))
    p.add_argument("--dims", required=True, type=_dims, help="MxNxK")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--emit-gaze", type=Path, help="also write the gaze stream (and a .meta sidecar)")
    p.add_argument("--dispersion", type=float)
    p.add_argument("--subjects", type=int, default=8)
    p.add_argument("--samples-per-frame", type=int, default=8)

    p = sub.add_parser("batch", help="analyse a manifest of maps and aggregate per category")
    p.add_argument("--manifest", required=True, type=Path, help="lines of 'path,category'")
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--replication", action="store_true",
                   help="compare the mean entropy reduction against the published 0.0815 bits")
    _add_analysis_options(p)
    return parser


def _config(args, **extra) -> AnalysisConfig:
    names = tuple(n.strip() for n in args.neighborhoods.split(",") if n.strip())
    unknown = [n for n in names if n not in PRESETS]
    if unknown or not names:
        raise UsageError(f"unknown neighbourhood(s) {unknown}; choose from {list(PRESETS)}")
    return AnalysisConfig(
        scale=None if args.full_res else args.scale,
        distances=args.distances,
        windows=args.windows,
        neighborhoods=names,
        seed=args.seed,
        **extra,
    )


def cmd_build(args) -> None:
    meta = RecordingMeta.parse(args.meta.read_text(encoding="utf-8"))
    samples = []
    tally: Counter = Counter()
    for path in args.gaze:
        with open(path, encoding="utf-8") as fh:
            parsed = parse_gaze_file(fh, meta, tally)
        samples.extend(filter_attentive(parsed))
    dropped: Counter = Counter()
    fmap = build_map(samples, meta, args.frames, truncate=args.truncate, skip_oob=args.skip_oob,
                     dropped=dropped)
    for reason, count in sorted(dropped.items()):
        log.warning("dropped %d samples (%s)", count, reason)
    if args.scale is not None:
        fmap = rescale(fmap, args.scale)
    write_map(fmap, args.out)
    log.info("wrote %r to %s (%d attentive samples)", fmap, args.out, fmap.total())


def cmd_rescale(args) -> None:
    fmap = rescale(read_map(args.map), args.scale)
    write_map(fmap, args.out)
    log.info("wrote %r to %s", fmap, args.out)


def write_report(report: AnalysisReport, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    write_text(out / "report.json", report.to_json())
    write_text(out / "temporal_pair.csv", curve_csv(report.curve("pair")))
    write_text(out / "temporal_window.csv", curve_csv(report.curve("window")))
    rows = [(name, r["h_x"], r["h_x_given_z"], r["h_x_given_u"], r["n_samples"])
            for name, r in report.all_neighbors.items()]
    write_text(out / "all_neighbors.csv",
               table_csv(("neighborhood", "h_x", "h_x_given_z", "h_x_given_u", "n_samples"), rows))
    if report.spatial_mi:
        smap = report.spatial_map()
        write_text(out / "spatial_mi.csv", heatmap_csv(smap))
        write_text(out / "spatial_mi.pgm", heatmap_pgm(smap))


def cmd_analyze(args) -> None:
    fmap = read_map(args.map)
    report = run_report(fmap, _config(args, name=args.name or args.map.stem, category=args.category))
    write_report(report, args.out)
    log.info("report written to %s", args.out)


def cmd_synth(args) -> None:
    m, n, k = args.dims
    sc = Scenario(Kind.parse(args.scenario), height=m, width=n, depth=k, subjects=args.subjects,
                  samples_per_frame=args.samples_per_frame, dispersion=args.dispersion, seed=args.seed)
    result = generate_with_gaze(sc)
    write_map(result.map, args.out)
    if args.emit_gaze:
        write_text(args.emit_gaze, format_gaze(result.samples))
        write_text(args.emit_gaze.with_suffix(".meta"), result.meta.dumps())
    log.info("wrote %r to %s", result.map, args.out)


def read_manifest(path: Path) -> list[tuple[Path, str, int]]:
    entries = []
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        file, sep, category = line.partition(",")
        if not sep or not file.strip() or not category.strip():
            raise DataError(f"{path}:{lineno}: expected 'path,category', got {raw!r}")
        p = Path(file.strip())
        if not p.is_absolute():
            p = path.parent / p
        if not p.is_file():
            raise DataError(f"{path}:{lineno}: map file {file.strip()!r} not found")
        entries.append((p, category.strip(), lineno))
    return entries


def cmd_batch(args) -> None:
    entries = read_manifest(args.manifest)
    if not entries:
        raise UsageError(f"manifest {args.manifest} lists no maps")
    base = _config(args)

    def load(entry):
        fmap = read_map(entry[0])
        scale = base.scale
        if scale is not None and scale.height <= fmap.height and scale.width <= fmap.width:
            return rescale(fmap, scale), str(scale)
        return fmap, None

    with ThreadPoolExecutor(max_workers=threads()) as pool:
        loaded = list(pool.map(load, entries))
        min_k = min(fmap.depth for fmap, _ in loaded)
        distances = base.distances or feasible(DEFAULT_DISTANCES, min_k)
        windows = base.windows or feasible(DEFAULT_WINDOWS, min_k)

        def analyze(i):
            (path, category, _), (fmap, scale) = entries[i], loaded[i]
            cfg = AnalysisConfig(scale=None, distances=distances, windows=windows,
                                 neighborhoods=base.neighborhoods, seed=derive_seed(base.seed, i),
                                 name=path.stem, category=category)
            report = run_report(fmap, cfg)
            report.scale = scale
            return report

        reports = list(pool.map(analyze, range(len(entries))))

    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for i, rep in enumerate(reports):
        write_text(out / "videos" / f"{i:03d}_{rep.name}.json", rep.to_json())
        r = rep.all_neighbors_result(base.neighborhoods[0])
        rows.append((rep.name, rep.category, r.h_x, r.h_x_given_z, r.h_x_given_u,
                     r.reduction, r.baseline_reduction))
    write_text(out / "entropy_table.csv",
               table_csv(("video", "category", "h_x", "h_x_given_z", "h_x_given_u",
                          "reduction", "baseline_reduction"), rows))

    categories = sorted({rep.category for rep in reports})
    for cat in categories:
        members = [rep for rep in reports if rep.category == cat]
        for mode in ("pair", "window"):
            curves = [rep.curve(mode) for rep in members]
            if curves[0].distances:
                write_text(out / f"category_{cat}_{mode}.csv", curve_csv(category_mean(curves, cat)))

    reductions = np.array([row[5] for row in rows])
    summary = {
        "videos": len(reports),
        "categories": categories,
        "neighborhood": base.neighborhoods[0],
        "mean_reduction_bits": float(reductions.mean()),
        "variance_reduction": float(reductions.var()),
        "seed": base.seed,
    }
    if args.replication:
        diff = summary["mean_reduction_bits"] - REFERENCE_REDUCTION
        summary["replication"] = {
            "reference_mean_bits": REFERENCE_REDUCTION,
            "reference_variance": REFERENCE_VARIANCE,
            "tolerance_bits": REFERENCE_TOLERANCE,
            "difference_bits": diff,
            "within_tolerance": abs(diff) <= REFERENCE_TOLERANCE,
        }
        verdict = "within" if abs(diff) <= REFERENCE_TOLERANCE else "outside"
        print(f"mean entropy reduction {summary['mean_reduction_bits']:.4f} bits vs "
              f"{REFERENCE_REDUCTION} reference: {verdict} +/-{REFERENCE_TOLERANCE}", file=sys.stderr)
    write_text(out / "summary.json", json.dumps(summary, indent=1) + "\n")


COMMANDS = {"build": cmd_build, "rescale": cmd_rescale, "analyze": cmd_analyze,
            "synth": cmd_synth, "batch": cmd_batch}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_usage(sys.stderr)
            raise UsageError("fixscope: error: a subcommand is required")
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="fixscope: %(levelname)s: %(message)s", stream=sys.stderr)
        COMMANDS[args.command](args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except (DataError, *DATA_ERRORS) as exc:
        print(f"fixscope: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())

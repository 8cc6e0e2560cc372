"""Command-line driver: build-popularity, attack, simulate, evaluate."""

from __future__ import annotations

import argparse
import json
import math
import random
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .attack import retrieve_driver_paths
from .cornering import (
    InputError,
    format_cornering_log,
    format_trip_attributes,
    parse_cornering_log,
    parse_trip_attributes,
)
from .graph import (
    GraphError,
    load_graph,
    load_graph_with_popularity,
    save_graph,
    write_popularity,
    write_road_classes,
)
from .popularity import TraceError, map_popularities, read_corpus, write_trace_file
from .search import SearchParams, SearchStats
from .evaluation.experiment import (
    TripSetConfig,
    load_experiment_config,
    run_experiment,
    sample_trip,
    write_report,
)
from .evaluation.trips import SimulationError
from .evaluation.world import ConfigError, WorldConfig, generate_synthetic_world

EXPECTED_ERRORS = (GraphError, InputError, TraceError, SimulationError, ConfigError, ValueError, OSError)


def _warn(msg: str) -> None:
    print(f"warning: {msg}", file=sys.stderr)


def _beam(text: str) -> int | None:
    if text.lower() in ("inf", "none", "infinity"):
        return None
    try:
        h = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"beam width must be an integer >= 1 or 'inf', got {text!r}")
    if h < 1:
        raise argparse.ArgumentTypeError(f"beam width must be >= 1, got {h}")
    return h


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected an integer >= 1, got {v}")
    return v


def _positive_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}")
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}")
    return v


def _existing(text: str) -> Path:
    p = Path(text)
    if not p.exists():
        raise argparse.ArgumentTypeError(f"no such file: {p}")
    return p


def _add_graph_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--graph-nodes", type=_existing, required=True, help="nodes CSV (id,lat,lon)")
    p.add_argument("--graph-edges", type=_existing, required=True,
                   help="edges CSV (from,to,legal_speed_kmh,length_km)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ubi-attack",
        description="Reconstruct driven routes from cornering logs and trip summaries.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-popularity", help="map a GPS trace corpus onto graph edges")
    _add_graph_args(p)
    p.add_argument("--traces", required=True, help="directory of per-vehicle trace CSVs")
    p.add_argument("--out", required=True, help="popularity sidecar CSV to write")
    p.add_argument("--cutoff-km", type=_positive_float, default=0.5)
    p.add_argument("--cell-km", type=_positive_float, default=None, help="spatial index cell size")
    p.add_argument("--workers", type=_positive_int, default=1)

    p = sub.add_parser("attack", help="rank candidate routes for one trip")
    _add_graph_args(p)
    p.add_argument("--popularity", type=_existing, help="popularity sidecar CSV")
    p.add_argument("--mc", type=_existing, required=True, help="cornering log CSV (direction,t_offset_s)")
    p.add_argument("--trip", type=_existing, required=True,
                   help="trip CSV (start_vertex,s_average_kmh,total_time_s)")
    p.add_argument("--beam", "--h", "--h-width", dest="h", type=_beam, default=2,
                   help="beam width h, or 'inf' to disable the beam (default 2)")
    p.add_argument("--m", type=_positive_int, default=3, help="turns per search round (default 3)")
    p.add_argument("--y-km", type=_positive_float, default=10.0, help="max straight leg length (default 10)")
    p.add_argument("--residential-speed", type=_positive_float, default=50.0)
    p.add_argument("--max-turn-km", type=_positive_float, default=None,
                   help="max distance between same-direction turns")
    p.add_argument("--no-reuse", action="store_true", help="disable continuation reuse")
    p.add_argument("--out", help="JSON-lines output (default: standard output)")

    p = sub.add_parser("simulate", help="write a synthetic world with simulated trips")
    p.add_argument("--rows", type=int, default=8)
    p.add_argument("--cols", type=int, default=8)
    p.add_argument("--cell-km", type=float, default=0.5)
    p.add_argument("--walks", type=int, default=60, help="trace files to generate")
    p.add_argument("--trips", type=int, default=5, help="trips to simulate")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("evaluate", help="run a seeded experiment from a JSON config")
    p.add_argument("--config", type=_existing, required=True)
    p.add_argument("--seed", type=int, default=None, help="override the world and trip seeds")
    p.add_argument("--out", required=True, help="report directory")
    return parser


def cmd_build_popularity(args) -> int:
    g = load_graph(args.graph_nodes, args.graph_edges)
    traces = Path(args.traces)
    if not traces.is_dir():
        raise TraceError(f"trace directory not found: {traces}")
    corpus = read_corpus(traces)
    if not corpus.files:
        _warn(f"no trace files in {traces}; all popularities are zero")
    g, report = map_popularities(
        g, corpus, cutoff_km=args.cutoff_km, cell_km=args.cell_km, workers=args.workers
    )
    write_popularity(g, args.out)
    if report.points_discarded:
        _warn(f"{report.points_discarded} points farther than {args.cutoff_km} km from any edge")
    print(json.dumps(report.as_dict(), sort_keys=True))
    return 0


def cmd_attack(args) -> int:
    g = load_graph_with_popularity(args.graph_nodes, args.graph_edges, args.popularity)
    mc = parse_cornering_log(args.mc)
    trip = parse_trip_attributes(args.trip)
    params = SearchParams(
        h=args.h, m=args.m, y_km=args.y_km, residential_speed_kmh=args.residential_speed,
        reuse=not args.no_reuse, max_turn_km=args.max_turn_km,
    )
    stats = SearchStats()
    result = retrieve_driver_paths(g, trip, mc, params, stats)
    text = result.to_jsonl()
    if args.out:
        Path(args.out).write_text(text)
        print(len(result))
    else:
        sys.stdout.write(text)
    print(
        f"candidates: {len(result)} kept of {result.candidates_before_filter}; "
        f"expansions: {stats.expansions}",
        file=sys.stderr,
    )
    return 0


def cmd_simulate(args) -> int:
    if args.trips < 0:
        raise ConfigError("--trips must be >= 0")
    cfg = WorldConfig(rows=args.rows, cols=args.cols, cell_km=args.cell_km, walks=args.walks, seed=args.seed)
    g, corpus = generate_synthetic_world(cfg)
    out = Path(args.out)
    (out / "traces").mkdir(parents=True, exist_ok=True)
    save_graph(g, out / "nodes.csv", out / "edges.csv")
    write_road_classes(g, out / "edge_classes.csv")
    for tf in corpus.files:
        write_trace_file(tf, out / "traces" / tf.name)
    rng = random.Random(args.seed)
    trip_cfg = TripSetConfig(n_trips=args.trips, seed=args.seed)
    for i in range(args.trips):
        truth = sample_trip(g, trip_cfg, rng)
        d = out / "trips" / f"trip_{i:04d}"
        d.mkdir(parents=True, exist_ok=True)
        (d / "mc.csv").write_text(format_cornering_log(truth.mc))
        (d / "trip.csv").write_text(format_trip_attributes(truth.trip))
        (d / "truth.csv").write_text("vertex\n" + "".join(f"{v}\n" for v in truth.route))
    print(f"{len(g)} vertices, {len(g.edges)} edges, {corpus.point_count} trace points, {args.trips} trips")
    return 0


def cmd_evaluate(args) -> int:
    world, trips, params = load_experiment_config(args.config)
    if args.seed is not None:
        world = replace(world, seed=args.seed)
        trips = replace(trips, seed=args.seed)
    report = run_experiment(world, trips, params)
    write_report(report, args.out)
    agg = report.aggregates()
    if agg["failures"]:
        _warn(f"{agg['failures']} of {agg['trips']} trips failed; see report.json")
    print(json.dumps(agg, sort_keys=True))
    return 0


COMMANDS = {
    "build-popularity": cmd_build_popularity,
    "attack": cmd_attack,
    "simulate": cmd_simulate,
    "evaluate": cmd_evaluate,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except EXPECTED_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

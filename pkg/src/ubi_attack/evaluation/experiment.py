"""Seeded end-to-end experiments and their report files."""

from __future__ import annotations

import csv
import json
import random
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from ..attack import retrieve_driver_paths
from ..graph import RoadGraph
from ..popularity import map_popularities
from ..search import SearchParams
from .metrics import closest_standing, deviations, median_index, random_index
from .trips import SimulationError, TripType, classify_trip_type, simulate_trip
from .world import WorldConfig, generate_synthetic_world, sample_route, sample_walk_route

SERIES_FILES = {
    "standings_vs_distance.csv": ("distance_km", "closest_standing"),
    "standings_vs_time.csv": ("total_time_s", "closest_standing"),
    "standings_vs_speed.csv": ("s_average_kmh", "closest_standing"),
    "deviation_vs_distance.csv": ("distance_km", "dev_first_km"),
    "deviation_vs_time.csv": ("total_time_s", "dev_first_km"),
    "deviation_vs_speed.csv": ("s_average_kmh", "dev_first_km"),
}


# "legs": straight legs of random length joined by random turns.
# "walk": the corpus walk itself, so trips follow the same road preferences.
DRIVERS = ("legs", "walk")


@dataclass(frozen=True)
class TripSetConfig:
    n_trips: int = 10
    min_turns: int = 1
    max_turns: int = 3
    min_leg_edges: int = 1
    max_leg_edges: int = 4
    min_speed_factor: float = 0.7
    max_speed_factor: float = 1.0
    start_delay_s: float = 2.0
    turn_delay_s: float = 2.0
    trip_type: str | None = None
    highway_bias: float = 1.0
    driver: str = "legs"
    max_edges: int = 16
    seed: int = 0

    def __post_init__(self):
        if self.n_trips < 0:
            raise ValueError("n_trips must be >= 0")
        if not 1 <= self.min_turns <= self.max_turns:
            raise ValueError("need 1 <= min_turns <= max_turns")
        if not 1 <= self.min_leg_edges <= self.max_leg_edges:
            raise ValueError("need 1 <= min_leg_edges <= max_leg_edges")
        if not 0 < self.min_speed_factor <= self.max_speed_factor <= 1.0:
            raise ValueError("speed factors must satisfy 0 < min <= max <= 1")
        if self.driver not in DRIVERS:
            raise ValueError(f"driver must be one of {DRIVERS}, got {self.driver!r}")
        if not self.highway_bias > 0:
            raise ValueError("highway_bias must be positive")
        if self.max_edges < 2:
            raise ValueError("max_edges must be >= 2")
        if self.trip_type is not None:
            TripType(self.trip_type)


@dataclass
class TripRecord:
    trip_id: int
    status: str
    route: list[int]
    n_events: int
    distance_km: float
    total_time_s: float
    s_average_kmh: float
    trip_type: str
    candidates_before_filter: int = 0
    candidates: int = 0
    closest_standing: int | None = None
    truth_recovered: bool = False
    dev_first_km: float | None = None
    dev_median_km: float | None = None
    dev_random_km: float | None = None
    median_rank: int | None = None
    random_rank: int | None = None


@dataclass
class EvalReport:
    world: dict
    trips_config: dict
    params: dict
    popularity: dict
    trips: list[TripRecord] = field(default_factory=list)

    def aggregates(self) -> dict:
        ok = [t for t in self.trips if t.closest_standing is not None]
        by_type: dict[str, dict] = {}
        for t in ok:
            d = by_type.setdefault(t.trip_type, {"trips": 0, "first_not_worse_than_median": 0})
            d["trips"] += 1
            if t.dev_first_km <= t.dev_median_km:
                d["first_not_worse_than_median"] += 1
        standings = sorted(t.closest_standing for t in ok)
        return {
            "trips": len(self.trips),
            "attacked": len(ok),
            "failures": len(self.trips) - len(ok),
            "truth_recovered": sum(t.truth_recovered for t in ok),
            "standing_1": sum(t.closest_standing == 1 for t in ok),
            "median_standing": standings[median_index(len(standings))] if standings else None,
            "by_type": dict(sorted(by_type.items())),
        }

    def as_dict(self) -> dict:
        return {
            "world": self.world,
            "trips_config": self.trips_config,
            "params": self.params,
            "popularity": self.popularity,
            "aggregates": self.aggregates(),
            "trips": [asdict(t) for t in self.trips],
        }


def sample_trip(g: RoadGraph, cfg: TripSetConfig, rng: random.Random):
    """Draw a route and simulate it; retry until the trip type filter accepts it."""
    for _ in range(500):
        n_turns = rng.randint(cfg.min_turns, cfg.max_turns)
        if cfg.driver == "walk":
            route = sample_walk_route(g, rng, n_turns, cfg.highway_bias, cfg.max_edges)
        else:
            route = sample_route(
                g, rng, n_turns, (cfg.min_leg_edges, cfg.max_leg_edges), highway_bias=cfg.highway_bias
            )
        if route is None:
            continue
        factor = rng.uniform(cfg.min_speed_factor, cfg.max_speed_factor)
        speeds = [g.edge(a, b).legal_speed_kmh * factor for a, b in zip(route, route[1:])]
        try:
            truth = simulate_trip(g, route, speeds, cfg.start_delay_s, cfg.turn_delay_s)
        except SimulationError:
            continue
        if cfg.trip_type is None or classify_trip_type(truth).value == cfg.trip_type:
            return truth
    raise SimulationError("could not draw a trip matching the configuration")


def attack_trip(g: RoadGraph, truth, params: SearchParams, trip_id: int, rng: random.Random) -> TripRecord:
    rec = TripRecord(
        trip_id=trip_id,
        status="ok",
        route=list(truth.route),
        n_events=len(truth.mc),
        distance_km=truth.distance_km,
        total_time_s=truth.trip.total_time_s,
        s_average_kmh=truth.trip.s_average_kmh,
        trip_type=classify_trip_type(truth).value,
    )
    try:
        result = retrieve_driver_paths(g, truth.trip, truth.mc, params)
    except Exception as exc:  # recorded per trip, never fatal
        rec.status = f"error: {exc}"
        return rec
    rec.candidates_before_filter = result.candidates_before_filter
    rec.candidates = len(result)
    if not len(result):
        rec.status = "no_candidates"
        return rec
    devs = deviations(g, result, truth)
    rec.closest_standing = closest_standing(g, result, truth, devs)
    rec.truth_recovered = min(devs) == 0.0
    mi = median_index(len(result))
    ri = random_index(len(result), rng)
    rec.dev_first_km = devs[0]
    rec.dev_median_km = devs[mi]
    rec.dev_random_km = devs[ri]
    rec.median_rank = mi + 1
    rec.random_rank = ri + 1
    return rec


def run_experiment(
    world: WorldConfig,
    trips: TripSetConfig,
    params: SearchParams,
    cutoff_km: float = 0.5,
) -> EvalReport:
    """Generate a world, map popularities, simulate and attack every trip."""
    g, corpus = generate_synthetic_world(world)
    g, pop_report = map_popularities(g, corpus, cutoff_km=cutoff_km)
    report = EvalReport(
        world=world.as_dict(),
        trips_config=asdict(trips),
        params=asdict(params),
        popularity=pop_report.as_dict(),
    )
    trip_rng = random.Random(trips.seed)
    baseline_rng = random.Random(trips.seed ^ 0x5EED)
    for trip_id in range(trips.n_trips):
        try:
            truth = sample_trip(g, trips, trip_rng)
        except SimulationError as exc:
            report.trips.append(TripRecord(trip_id, f"error: {exc}", [], 0, 0.0, 0.0, 0.0, ""))
            continue
        report.trips.append(attack_trip(g, truth, params, trip_id, baseline_rng))
    return report


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def write_report(report: EvalReport, out_dir) -> list[Path]:
    """Write report.json and the plot-ready CSV series into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    path = out / "report.json"
    path.write_text(json.dumps(report.as_dict(), indent=2, sort_keys=True) + "\n")
    written.append(path)
    ok = [t for t in report.trips if t.closest_standing is not None]
    for name, (x, y) in SERIES_FILES.items():
        path = out / name
        with open(path, "w", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["trip_id", x, y, "n_events"])
            for t in ok:
                w.writerow([t.trip_id, _fmt(getattr(t, x)), _fmt(getattr(t, y)), t.n_events])
        written.append(path)
    path = out / "type_comparison.csv"
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["trip_id", "trip_type", "distance_km", "dev_first_km", "dev_median_km", "dev_random_km"])
        for t in ok:
            w.writerow([
                t.trip_id, t.trip_type, _fmt(t.distance_km),
                _fmt(t.dev_first_km), _fmt(t.dev_median_km), _fmt(t.dev_random_km),
            ])
    written.append(path)
    return written


def load_experiment_config(path) -> tuple[WorldConfig, TripSetConfig, SearchParams]:
    """Read {"world": {...}, "trips": {...}, "params": {...}} from JSON."""
    raw = json.loads(Path(path).read_text())
    unknown = set(raw) - {"world", "trips", "params"}
    if unknown:
        raise ValueError(f"unknown config sections: {sorted(unknown)}")

    def build(cls, section):
        data = raw.get(section, {})
        allowed = {f.name for f in fields(cls)}
        bad = set(data) - allowed
        if bad:
            raise ValueError(f"unknown keys in {section}: {sorted(bad)}")
        return cls(**data)

    return build(WorldConfig, "world"), build(TripSetConfig, "trips"), build(SearchParams, "params")

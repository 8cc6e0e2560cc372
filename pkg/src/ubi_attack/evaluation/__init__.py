"""Ground-truth experiments: synthetic worlds, simulated trips, oracle and metrics."""

from .experiment import (
    EvalReport,
    TripRecord,
    TripSetConfig,
    load_experiment_config,
    run_experiment,
    write_report,
)
from .metrics import closest_standing, max_deviation_km, median_index
from .oracle import OracleOverflow, oracle_enumerate
from .trips import GroundTruthTrip, SimulationError, TripType, classify_trip_type, simulate_trip
from .world import (
    HIGHWAY,
    RESIDENTIAL,
    ConfigError,
    WorldConfig,
    build_grid_graph,
    generate_synthetic_world,
    sample_route,
    sample_walk_route,
)

__all__ = [
    "ConfigError",
    "EvalReport",
    "GroundTruthTrip",
    "HIGHWAY",
    "OracleOverflow",
    "RESIDENTIAL",
    "SimulationError",
    "TripRecord",
    "TripSetConfig",
    "TripType",
    "WorldConfig",
    "build_grid_graph",
    "classify_trip_type",
    "closest_standing",
    "generate_synthetic_world",
    "load_experiment_config",
    "max_deviation_km",
    "median_index",
    "oracle_enumerate",
    "run_experiment",
    "sample_route",
    "sample_walk_route",
    "simulate_trip",
    "write_report",
]

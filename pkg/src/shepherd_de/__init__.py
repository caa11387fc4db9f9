"""Sheep-herding simulation with a differential-evolution path planner."""
from .behaviors import Collecting, Driving, ApproachPath, step, is_complete
from .de import DEConfig, DEResult, optimize
from .harness import (
    RunMetrics,
    ScenarioConfig,
    ScenarioError,
    bundled_scenario,
    emit_outputs,
    load_scenario,
    read_metrics_csv,
    run_batch,
)
from .planner import ALGORITHMS, EpisodeResult, PlannerConfig, run_episode
from .spline_path import WaypointPath, PolylinePath, evaluate, interpolate
from .world import ModelParams, Obstacle, WorldState

__all__ = [
    "ALGORITHMS",
    "ApproachPath",
    "Collecting",
    "DEConfig",
    "DEResult",
    "Driving",
    "EpisodeResult",
    "ModelParams",
    "Obstacle",
    "PlannerConfig",
    "PolylinePath",
    "RunMetrics",
    "ScenarioConfig",
    "ScenarioError",
    "WaypointPath",
    "WorldState",
    "bundled_scenario",
    "emit_outputs",
    "evaluate",
    "interpolate",
    "is_complete",
    "load_scenario",
    "optimize",
    "read_metrics_csv",
    "run_batch",
    "run_episode",
    "step",
]

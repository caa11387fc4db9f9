"""Scenario files, seeded batches, metric aggregation and output files.

Scenario JSON layout (every key except ``field_size`` and ``flock_size``
is optional; unknown keys are rejected)::

    {
      "name": "tab2_6small_n20",
      "field_size": 200,
      "goal": [0, 0],
      "shepherd_start": [0, 0],
      "flock_size": 20,
      "flock_spawn_box": [[60, 100], [60, 100]],
      "obstacles": [{"center": [30, 140], "radius": 5}],
      "model_params": {"goal_radius": 15},
      "de_config": {"population_size": 30},
      "planner": {"sheep_obstacle_radius": 60},
      "algorithm": "unswdst1",
      "n_runs": 20,
      "base_seed": 0
    }

``flock_spawn_box`` is ``[[xmin, xmax], [ymin, ymax]]``.  DE search bounds
default to the whole field.

``metrics.csv`` columns (schema version 1): ``scenario, algorithm, n_runs,
n_success, success_rate, best, mean, std``.  ``best``/``mean``/``std`` are
over successful runs only (empty when none succeeded); ``std`` is the
sample standard deviation, 0 for a single run.
"""
from __future__ import annotations

import csv
import dataclasses
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .de import DEConfig
from .planner import ALGORITHMS, EpisodeResult, PlannerConfig, run_episode
from .world import ModelParams, Obstacle, WorldState

__all__ = [
    "ScenarioError",
    "ScenarioConfig",
    "RunMetrics",
    "CSV_COLUMNS",
    "TABLES",
    "bundled_scenario",
    "load_scenario",
    "parse_scenario",
    "initial_state",
    "run_scenario_episode",
    "run_batch",
    "emit_outputs",
    "read_metrics_csv",
    "generate_obstacles",
]

CSV_COLUMNS = ("scenario", "algorithm", "n_runs", "n_success", "success_rate", "best", "mean", "std")

TABLES = {
    1: (("tab1_n10", "tab1_n50", "tab1_n100"), ("unswdst", "strombom")),
    2: (
        (
            "tab2_6small_n20", "tab2_6small_n40", "tab2_6small_n80",
            "tab2_6large_n20", "tab2_6large_n40", "tab2_6large_n80",
            "tab2_13large_n20", "tab2_13large_n40", "tab2_13large_n60",
        ),
        ("unswdst", "unswdst1"),
    ),
}


class ScenarioError(ValueError):
    """Invalid scenario file; the message names the offending field."""


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    field_size: float
    goal: tuple
    shepherd_start: tuple
    flock_size: int
    flock_spawn_box: tuple
    obstacles: tuple = ()
    model_params: ModelParams = field(default_factory=ModelParams)
    de_config: DEConfig = field(default_factory=DEConfig)
    planner: PlannerConfig = field(default_factory=PlannerConfig)
    algorithm: str = "unswdst"
    n_runs: int = 10
    base_seed: int = 0

    def with_overrides(self, **changes) -> "ScenarioConfig":
        changes = {k: v for k, v in changes.items() if v is not None}
        return dataclasses.replace(self, **changes)


@dataclass
class RunMetrics:
    scenario: str
    algorithm: str
    seeds: list
    steps: list
    successes: list
    traces: dict = field(default_factory=dict, repr=False)

    @property
    def n_runs(self) -> int:
        return len(self.steps)

    @property
    def n_success(self) -> int:
        return int(sum(self.successes))

    @property
    def success_rate(self) -> float:
        return self.n_success / self.n_runs if self.n_runs else math.nan

    def _ok_steps(self) -> np.ndarray:
        return np.array([s for s, ok in zip(self.steps, self.successes) if ok], dtype=float)

    @property
    def best(self) -> float:
        ok = self._ok_steps()
        return float(ok.min()) if len(ok) else math.nan

    @property
    def mean(self) -> float:
        ok = self._ok_steps()
        return float(ok.mean()) if len(ok) else math.nan

    @property
    def std(self) -> float:
        ok = self._ok_steps()
        if len(ok) == 0:
            return math.nan
        return float(ok.std(ddof=1)) if len(ok) > 1 else 0.0

    def row(self) -> dict:
        return {
            "scenario": self.scenario,
            "algorithm": self.algorithm,
            "n_runs": self.n_runs,
            "n_success": self.n_success,
            "success_rate": self.success_rate,
            "best": self.best,
            "mean": self.mean,
            "std": self.std,
        }


# --- scenario parsing -------------------------------------------------------

_TOP_KEYS = {f.name for f in dataclasses.fields(ScenarioConfig)}


def _fail(path: str, msg: str):
    raise ScenarioError(f"scenario field '{path}': {msg}")


def _number(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        _fail(path, f"expected a finite number, got {value!r}")
    return float(value)


def _point(value, path: str) -> tuple:
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        _fail(path, f"expected [x, y], got {value!r}")
    return tuple(_number(v, f"{path}[{i}]") for i, v in enumerate(value))


def _count(value, path: str, minimum: int) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        _fail(path, f"expected an integer >= {minimum}, got {value!r}")
    return value


def _section(cls, data, path: str, **extra):
    if data is None:
        data = {}
    if not isinstance(data, dict):
        _fail(path, "expected an object")
    known = {f.name for f in dataclasses.fields(cls)}
    for key in data:
        if key not in known:
            _fail(f"{path}.{key}", "unknown key")
    try:
        return cls(**{**extra, **data})
    except (TypeError, ValueError) as exc:
        _fail(path, str(exc))


def _inside(point, size: float) -> bool:
    return all(0.0 <= c <= size for c in point)


def parse_scenario(data: dict, name: str = "scenario") -> ScenarioConfig:
    """Validate a decoded scenario mapping and apply defaults."""
    if not isinstance(data, dict):
        raise ScenarioError("scenario must be a JSON object")
    for key in data:
        if key not in _TOP_KEYS:
            _fail(key, "unknown key")
    for key in ("field_size", "flock_size"):
        if key not in data:
            _fail(key, "missing")

    size = _number(data["field_size"], "field_size")
    if size <= 0:
        _fail("field_size", "must be > 0")
    goal = _point(data.get("goal", [0, 0]), "goal")
    start = _point(data.get("shepherd_start", [0, 0]), "shepherd_start")
    for key, p in (("goal", goal), ("shepherd_start", start)):
        if not _inside(p, size):
            _fail(key, f"{p} lies outside the field")
    flock = _count(data["flock_size"], "flock_size", 1)

    box = data.get("flock_spawn_box", [[0, size], [0, size]])
    if not isinstance(box, (list, tuple)) or len(box) != 2:
        _fail("flock_spawn_box", "expected [[xmin, xmax], [ymin, ymax]]")
    box = tuple(_point(axis, f"flock_spawn_box[{i}]") for i, axis in enumerate(box))
    for i, (lo, hi) in enumerate(box):
        if lo > hi or lo < 0 or hi > size:
            _fail(f"flock_spawn_box[{i}]", f"[{lo}, {hi}] is not an interval inside the field")

    obstacles = []
    for i, ob in enumerate(data.get("obstacles", [])):
        path = f"obstacles[{i}]"
        if not isinstance(ob, dict) or set(ob) != {"center", "radius"}:
            _fail(path, "expected {\"center\": [x, y], \"radius\": r}")
        centre = _point(ob["center"], f"{path}.center")
        radius = _number(ob["radius"], f"{path}.radius")
        if radius <= 0:
            _fail(f"{path}.radius", "must be > 0")
        if not _inside(centre, size):
            _fail(path, f"centre {centre} lies outside the field")
        obstacles.append(Obstacle(centre, radius))

    params = _section(ModelParams, data.get("model_params"), "model_params")
    de_data = data.get("de_config") or {}
    if isinstance(de_data, dict) and "bounds" not in de_data:
        de_config = _section(DEConfig, de_data, "de_config", bounds=((0.0, size), (0.0, size)))
    else:
        de_config = _section(DEConfig, de_data, "de_config")
    planner = _section(PlannerConfig, data.get("planner"), "planner")

    algorithm = data.get("algorithm", "unswdst")
    if algorithm not in ALGORITHMS:
        _fail("algorithm", f"expected one of {ALGORITHMS}, got {algorithm!r}")
    n_runs = _count(data.get("n_runs", 10), "n_runs", 1)
    base_seed = _count(data.get("base_seed", 0), "base_seed", 0)
    scenario_name = data.get("name", name)
    if not isinstance(scenario_name, str) or not scenario_name:
        _fail("name", "expected a non-empty string")

    return ScenarioConfig(scenario_name, size, goal, start, flock, box, tuple(obstacles),
                          params, de_config, planner, algorithm, n_runs, base_seed)


def load_scenario(path) -> ScenarioConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: invalid JSON ({exc})") from exc
    return parse_scenario(data, name=path.stem)


def bundled_scenario(name: str) -> ScenarioConfig:
    """One of the shipped fixtures, e.g. ``"tab2_6small_n20"``."""
    ref = resources.files("shepherd_de") / "scenarios" / f"{name}.json"
    if not ref.is_file():
        raise ScenarioError(f"no bundled scenario named {name!r}")
    return parse_scenario(json.loads(ref.read_text()), name=name)


# --- running ------------------------------------------------------------------

def initial_state(config: ScenarioConfig, rng) -> WorldState:
    box = np.asarray(config.flock_spawn_box, dtype=float)
    sheep = rng.uniform(box[:, 0], box[:, 1], size=(config.flock_size, 2))
    return WorldState(sheep=sheep, shepherd=config.shepherd_start, goal=config.goal,
                      field_size=config.field_size, obstacles=config.obstacles)


def run_scenario_episode(config: ScenarioConfig, algorithm: str, seed: int,
                         trace: bool = False) -> EpisodeResult:
    """One episode; the flock spawn depends on ``seed`` only, not on the algorithm."""
    spawn_seq, episode_seq = np.random.SeedSequence(seed).spawn(2)
    state = initial_state(config, np.random.default_rng(spawn_seq))
    return run_episode(state, algorithm, config.model_params, config.de_config, episode_seq,
                       config.planner, trace=trace)


def run_batch(config: ScenarioConfig, algorithm: Optional[str] = None, trace: bool = False) -> RunMetrics:
    """``config.n_runs`` episodes with seeds ``base_seed + i``."""
    algorithm = algorithm or config.algorithm
    seeds = [config.base_seed + i for i in range(config.n_runs)]
    metrics = RunMetrics(config.name, algorithm, seeds, [], [])
    for seed in seeds:
        result = run_scenario_episode(config, algorithm, seed, trace)
        metrics.steps.append(result.steps)
        metrics.successes.append(result.success)
        if trace:
            metrics.traces[seed] = result.trace
    return metrics


# --- output -------------------------------------------------------------------

def _fmt(value) -> str:
    if isinstance(value, float):
        return "" if math.isnan(value) else repr(value)
    return str(value)


def emit_outputs(metrics: Sequence[RunMetrics], out_dir) -> list:
    """Write ``metrics.csv`` and any recorded traces; returns written paths."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    written = []
    csv_path = out / "metrics.csv"
    try:
        with csv_path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_COLUMNS)
            for m in metrics:
                row = m.row()
                writer.writerow([_fmt(row[c]) for c in CSV_COLUMNS])
        written.append(csv_path)

        with_traces = [m for m in metrics if m.traces]
        for m in with_traces:
            trace_dir = out if len(with_traces) == 1 else out / f"{m.scenario}_{m.algorithm}"
            trace_dir.mkdir(parents=True, exist_ok=True)
            for seed, records in m.traces.items():
                path = trace_dir / f"trace_{seed}.jsonl"
                with path.open("w") as fh:
                    for rec in records:
                        fh.write(json.dumps(rec.as_dict()) + "\n")
                written.append(path)
    except OSError as exc:
        raise OSError(f"failed writing outputs under {out}: {exc}") from exc
    return written


def read_metrics_csv(path) -> list:
    """Parse a ``metrics.csv`` back into dicts with numeric fields restored."""
    rows = []
    with Path(path).open(newline="") as fh:
        for raw in csv.DictReader(fh):
            rows.append({
                "scenario": raw["scenario"],
                "algorithm": raw["algorithm"],
                "n_runs": int(raw["n_runs"]),
                "n_success": int(raw["n_success"]),
                **{k: float(raw[k]) if raw[k] else math.nan
                   for k in ("success_rate", "best", "mean", "std")},
            })
    return rows


# --- fixtures -----------------------------------------------------------------

def generate_obstacles(count: int, radius: float, seed: int, field_size: float = 200.0,
                       spawn_box=((60.0, 100.0), (60.0, 100.0)), goal=(0.0, 0.0),
                       goal_clearance: float = 30.0, gap: float = 10.0) -> list:
    """Rejection-sample non-overlapping obstacles away from the spawn box and goal.

    Used once to build the bundled cluttered layouts, which are then frozen
    as explicit coordinates in the scenario files.
    """
    rng = np.random.default_rng(seed)
    box = np.asarray(spawn_box, dtype=float)
    margin = radius + gap
    obstacles = []
    for _ in range(100_000):
        if len(obstacles) == count:
            return obstacles
        c = rng.uniform(radius + 5, field_size - radius - 5, size=2)
        if np.all((c > box[:, 0] - margin) & (c < box[:, 1] + margin)):
            continue
        if np.linalg.norm(c - goal) < goal_clearance + radius:
            continue
        if any(np.linalg.norm(c - o.center) < radius + o.radius + gap for o in obstacles):
            continue
        obstacles.append(Obstacle(np.round(c, 2), radius))
    raise RuntimeError(f"could not place {count} obstacles of radius {radius}")


def scenario_to_json(config: ScenarioConfig, model_overrides: Optional[dict] = None) -> dict:
    """Compact JSON form used for the shipped fixtures."""
    data = {
        "name": config.name,
        "field_size": config.field_size,
        "goal": list(config.goal),
        "shepherd_start": list(config.shepherd_start),
        "flock_size": config.flock_size,
        "flock_spawn_box": [list(a) for a in config.flock_spawn_box],
        "obstacles": [{"center": o.center.tolist(), "radius": o.radius} for o in config.obstacles],
        "algorithm": config.algorithm,
        "n_runs": config.n_runs,
        "base_seed": config.base_seed,
    }
    if model_overrides:
        data["model_params"] = dict(model_overrides)
    return data

"""Two-phase shepherding: plan an approach for the shepherd, then a route for the flock.

Phase 1 plans a path from the shepherd to a staging point behind the flock,
treating every sheep as a circular obstacle so the approach does not scatter
the flock.  Phase 2 starts when the shepherd is in position: it first
herds reactively until the flock is collected and compact, then plans a
route for the flock's centre of mass to the goal, inflating the check by
the flock radius.
Its waypoints become sub-goals that the reactive driving behaviour pushes
the flock through one after another.  Each phase is planned exactly once.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .behaviors import (
    ApproachPath,
    BehaviorMode,
    Collecting,
    Driving,
    is_complete,
    select_furthest_strombom,
    select_furthest_unswdst,
    shepherd_target,
    step,
)
from .de import DEConfig, DEResult, optimize
from .spline_path import PolylinePath
from .world import ModelParams, Obstacle, WorldState, cohesion_radius, flock_radius, gcm, unit

log = logging.getLogger(__name__)

__all__ = [
    "ALGORITHMS",
    "PlannerConfig",
    "PlanState",
    "EpisodeResult",
    "TraceRecord",
    "approach_target",
    "plan_approach",
    "plan_drive",
    "start_plan",
    "advance",
    "reactive_mode",
    "run_episode",
]

ALGORITHMS = ("strombom", "unswdst", "unswdst1")

APPROACH, DRIVE, DONE = "approach", "drive", "done"
_PHASE_ORDER = {APPROACH: 0, DRIVE: 1, DONE: 2}


@dataclass(frozen=True)
class PlannerConfig:
    """Knobs of the two-phase planner.

    ``approach_offset=None`` puts the staging point just outside every
    sheep disc: ``flock_radius + sheep_obstacle_radius`` behind the centre.
    ``waypoint_tolerance=None`` means one shepherd step.
    """

    sheep_obstacle_radius: float = 60.0
    approach_offset: Optional[float] = None
    waypoint_tolerance: Optional[float] = None
    subgoal_tolerance_factor: float = 0.5
    min_subgoal_tolerance: float = 0.0
    compact_factor: float = 0.5
    max_gather_steps: int = 200

    def __post_init__(self):
        if not self.sheep_obstacle_radius > 0:
            raise ValueError("sheep_obstacle_radius must be > 0")
        if self.subgoal_tolerance_factor < 0 or self.min_subgoal_tolerance < 0:
            raise ValueError("sub-goal tolerances must be >= 0")


@dataclass(frozen=True)
class PlanState:
    phase: str = APPROACH
    approach: Optional[PolylinePath] = None
    approach_cursor: int = 0
    subgoals: Optional[np.ndarray] = None
    subgoal_cursor: int = 0
    subgoal_tolerance: float = 0.0
    drive_started: Optional[int] = None

    def __post_init__(self):
        if self.phase not in _PHASE_ORDER:
            raise ValueError(f"unknown phase {self.phase!r}")

    def replace(self, **changes) -> "PlanState":
        new = replace(self, **changes)
        if _PHASE_ORDER[new.phase] < _PHASE_ORDER[self.phase]:
            raise ValueError(f"phase cannot go back from {self.phase} to {new.phase}")
        return new

    @property
    def needs_drive_plan(self) -> bool:
        return self.phase == DRIVE and self.subgoals is None

    @property
    def current_subgoal(self) -> np.ndarray:
        return self.subgoals[self.subgoal_cursor]


@dataclass
class TraceRecord:
    t: int
    shepherd: list
    sheep: list
    mode: str
    target: Optional[list]

    def as_dict(self) -> dict:
        return {"t": self.t, "shepherd": self.shepherd, "sheep": self.sheep,
                "mode": self.mode, "target": self.target}


@dataclass
class EpisodeResult:
    success: bool
    steps: int
    planner_evals: int
    final_state: WorldState
    trace: Optional[list] = None
    plans: list = field(default_factory=list)


def _clip_to_field(point, state: WorldState) -> np.ndarray:
    return np.clip(point, 0.0, state.field_size)


def approach_target(state: WorldState, params: ModelParams, config: PlannerConfig) -> np.ndarray:
    """Staging point behind the flock on the goal->centre ray."""
    centre = gcm(state.sheep)
    offset = config.approach_offset
    if offset is None:
        offset = flock_radius(state.sheep, centre) + config.sheep_obstacle_radius
    return _clip_to_field(centre + offset * unit(centre - state.goal), state)


def plan_approach(state: WorldState, params: ModelParams, de_config: DEConfig, rng,
                  config: PlannerConfig = PlannerConfig()) -> DEResult:
    """Shepherd path to the staging point, each sheep a disc obstacle."""
    target = approach_target(state, params, config)
    sheep_discs = [Obstacle(s, config.sheep_obstacle_radius) for s in state.sheep]
    result = optimize(state.shepherd, target, list(state.obstacles) + sheep_discs, de_config, rng)
    if not result.feasible:
        log.warning("approach plan infeasible (violation %.3g); following it anyway", result.violation)
    return result


def plan_drive(state: WorldState, params: ModelParams, de_config: DEConfig, rng) -> DEResult:
    """Route for the flock centre to the goal, cleared by the flock radius."""
    centre = gcm(state.sheep)
    result = optimize(centre, state.goal, state.obstacles, de_config, rng,
                      flock_radius=flock_radius(state.sheep, centre))
    if not result.feasible:
        log.warning("drive plan infeasible (violation %.3g); following it anyway", result.violation)
    return result


def start_plan(approach: DEResult, state: WorldState) -> PlanState:
    """Approach-phase plan; points the spline pushes past a wall are pulled back in."""
    polyline = approach.polyline
    points = _clip_to_field(polyline.points, state)
    return PlanState(APPROACH, replace(polyline, points=points))


def with_drive_plan(plan: PlanState, drive: DEResult, state: WorldState,
                    config: PlannerConfig = PlannerConfig()) -> PlanState:
    """Attach the flock route: its waypoints then the goal, in order."""
    subgoals = np.vstack([drive.path.waypoints, state.goal])
    tol = max(config.min_subgoal_tolerance,
              config.subgoal_tolerance_factor * flock_radius(state.sheep))
    return plan.replace(subgoals=subgoals, subgoal_cursor=0, subgoal_tolerance=tol)


def _ready_to_route(state: WorldState, plan: PlanState, params: ModelParams,
                    config: PlannerConfig) -> bool:
    """True once the flock is collected and compact enough to route as one disc."""
    if state.t - plan.drive_started >= config.max_gather_steps:
        return True
    if select_furthest_unswdst(state, state.goal, params) is not None:
        return False
    return flock_radius(state.sheep) <= config.compact_factor * cohesion_radius(state.n_sheep, params)


def advance(state: WorldState, plan: PlanState, params: ModelParams,
            config: PlannerConfig = PlannerConfig()) -> tuple[Optional[BehaviorMode], PlanState]:
    """Pick this step's behaviour and move the plan cursors forward.

    Returns ``(None, plan)`` once the drive phase has a cohesive flock but
    no route yet; attach one with :func:`with_drive_plan` and call again.
    """
    if plan.phase == DONE:
        return None, plan
    if is_complete(state, params):
        return None, plan.replace(phase=DONE)

    if plan.phase == APPROACH:
        tol = params.speed_shepherd if config.waypoint_tolerance is None else config.waypoint_tolerance
        points = plan.approach.points
        cursor = plan.approach_cursor
        last = len(points) - 1
        while cursor < last and np.linalg.norm(state.shepherd - points[cursor]) <= tol:
            cursor += 1
        if cursor < last or np.linalg.norm(state.shepherd - points[cursor]) > tol:
            return ApproachPath(points[cursor]), plan.replace(approach_cursor=cursor)
        plan = plan.replace(phase=DRIVE, approach_cursor=cursor, drive_started=state.t)

    if plan.needs_drive_plan:
        if plan.drive_started is None:
            plan = plan.replace(drive_started=state.t)
        if not _ready_to_route(state, plan, params, config):
            return reactive_mode(state, params, "unswdst"), plan
        return None, plan

    centre = gcm(state.sheep)
    cursor = plan.subgoal_cursor
    last = len(plan.subgoals) - 1
    while cursor < last and np.linalg.norm(centre - plan.subgoals[cursor]) <= plan.subgoal_tolerance:
        cursor += 1
    plan = plan.replace(subgoal_cursor=cursor)
    subgoal = plan.current_subgoal
    stray = select_furthest_unswdst(state, subgoal, params)
    if stray is not None:
        return Collecting(stray), plan
    return Driving(subgoal), plan


def reactive_mode(state: WorldState, params: ModelParams, algorithm: str) -> BehaviorMode:
    if algorithm == "strombom":
        stray = select_furthest_strombom(state, params)
    else:
        stray = select_furthest_unswdst(state, state.goal, params)
    return Driving() if stray is None else Collecting(stray)


def _record(state: WorldState, mode: Optional[BehaviorMode], target) -> TraceRecord:
    return TraceRecord(
        t=state.t,
        shepherd=state.shepherd.tolist(),
        sheep=state.sheep.tolist(),
        mode=mode.name if mode is not None else "none",
        target=None if target is None else np.asarray(target).tolist(),
    )


def run_episode(initial: WorldState, algorithm: str, params: ModelParams, de_config: DEConfig,
                seed, planner: PlannerConfig = PlannerConfig(), trace: bool = False) -> EpisodeResult:
    """Run one episode from ``initial`` until the flock is home or ``max_steps``.

    ``seed`` (an int or a ``SeedSequence``) feeds two independent streams, one for the simulation noise and
    one for the planner, so reactive runs never depend on the DE settings.
    """
    if algorithm not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {algorithm!r}; choose from {ALGORITHMS}")

    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(seed)
    sim_seq, plan_seq = seed.spawn(2)
    sim_rng = np.random.default_rng(sim_seq)
    plan_rng = np.random.default_rng(plan_seq)

    state = initial
    records = [] if trace else None
    plans = []
    evals = 0
    plan = None

    while not is_complete(state, params) and state.t < params.max_steps:
        if algorithm == "unswdst1":
            if plan is None:
                approach = plan_approach(state, params, de_config, plan_rng, planner)
                evals += approach.evaluations
                plans.append(approach)
                plan = start_plan(approach, state)
            mode, plan = advance(state, plan, params, planner)
            if mode is None and plan.needs_drive_plan:
                drive = plan_drive(state, params, de_config, plan_rng)
                evals += drive.evaluations
                plans.append(drive)
                plan = with_drive_plan(plan, drive, state, planner)
                mode, plan = advance(state, plan, params, planner)
        else:
            mode = reactive_mode(state, params, algorithm)

        if trace:
            records.append(_record(state, mode, shepherd_target(state, mode, params)))
        state = step(state, mode, params, sim_rng)

    if trace:
        records.append(_record(state, None, None))
    return EpisodeResult(is_complete(state, params), state.t, evals, state, records, plans)

import math

import numpy as np
import pytest

from shepherd_de.behaviors import ApproachPath, Collecting, Driving
from shepherd_de.de import DEConfig
from shepherd_de.planner import (
    APPROACH,
    DONE,
    DRIVE,
    PlannerConfig,
    PlanState,
    advance,
    approach_target,
    plan_approach,
    plan_drive,
    run_episode,
    start_plan,
    with_drive_plan,
)
from shepherd_de.spline_path import PolylinePath
from shepherd_de.world import ModelParams, Obstacle, gcm, flock_radius

from conftest import make_state

P = ModelParams()
FAST = DEConfig(generations=60)


def _flock(centre, n=12, spread=2.0, seed=0):
    return np.asarray(centre) + np.random.default_rng(seed).uniform(-spread, spread, size=(n, 2))


def _segment_distance(p, a, b):
    ab = b - a
    t = np.clip(np.dot(p - a, ab) / np.dot(ab, ab), 0, 1)
    return np.linalg.norm(p - (a + t * ab))


def test_approach_target_is_behind_flock():
    s = make_state(_flock((80, 80)), shepherd=(0, 0), field_size=200)
    target = approach_target(s, P, PlannerConfig())
    c = gcm(s.sheep)
    assert np.dot(target - c, s.goal - c) < 0
    assert np.linalg.norm(target - c) == pytest.approx(flock_radius(s.sheep) + 60)
    pinned = approach_target(s, P, PlannerConfig(approach_offset=5))
    assert np.linalg.norm(pinned - c) == pytest.approx(5)


def test_approach_free_field_is_straight():
    s = make_state(_flock((60, 60)), shepherd=(190, 20), field_size=200)
    res = plan_approach(s, P, DEConfig(), np.random.default_rng(0))
    straight = math.dist(s.shepherd, approach_target(s, P, PlannerConfig()))
    assert res.feasible
    assert res.length <= 1.01 * straight


def test_approach_goes_around_flock():
    # flock sits between the shepherd and the staging point
    s = make_state(_flock((100, 100), spread=1.0), shepherd=(10, 10), goal=(190, 190), field_size=200)
    cfg = PlannerConfig(sheep_obstacle_radius=30)
    res = plan_approach(s, P, DEConfig(bounds=((0, 200), (0, 200))), np.random.default_rng(0), cfg)
    assert res.feasible
    d = np.linalg.norm(res.polyline.points[:, None, :] - s.sheep[None], axis=-1)
    assert d.min() >= 30


def test_plan_drive_free_field_collinear():
    s = make_state(_flock((150, 120)), shepherd=(190, 190), field_size=200)
    res = plan_drive(s, P, DEConfig(), np.random.default_rng(3))
    plan = with_drive_plan(PlanState(DRIVE), res, s)
    assert len(plan.subgoals) == 4
    assert np.array_equal(plan.subgoals[-1], s.goal)
    c = gcm(s.sheep)
    for w in plan.subgoals[:-1]:
        assert _segment_distance(w, c, s.goal) <= 5.0


def test_plan_drive_clears_obstacle_by_flock_radius():
    s = make_state(_flock((150, 150), spread=4), shepherd=(190, 190), field_size=200,
                   obstacles=[Obstacle((75, 75), 20)])
    res = plan_drive(s, P, DEConfig(), np.random.default_rng(4))
    assert res.feasible
    r = flock_radius(s.sheep)
    assert np.min(np.linalg.norm(res.polyline.points - (75, 75), axis=1)) >= 20 + r


def _drive_plan(state, subgoals, tol=3.0):
    return PlanState(DRIVE, subgoals=np.asarray(subgoals, dtype=float), subgoal_tolerance=tol, drive_started=0)


def test_advance_moves_to_next_subgoal():
    s = make_state(_flock((50, 50), spread=0.5), field_size=200)
    plan = _drive_plan(s, [gcm(s.sheep) + (1, 0), (20, 20), (0, 0)])
    mode, plan = advance(s, plan, P)
    assert plan.subgoal_cursor == 1
    assert isinstance(mode, Driving) and np.array_equal(mode.subgoal, (20, 20))


def test_advance_collecting_has_priority():
    pts = np.vstack([_flock((50, 50), n=9, spread=0.5), (50, 90)])
    s = make_state(pts, field_size=200)
    plan = _drive_plan(s, [(30, 30), (0, 0)])
    mode, plan2 = advance(s, plan, P)
    assert isinstance(mode, Collecting) and mode.sheep == 9
    assert plan2.subgoal_cursor == 0


def test_advance_done_when_complete():
    s = make_state(_flock((3, 3), spread=0.5), field_size=200)
    mode, plan = advance(s, _drive_plan(s, [(0, 0)]), P)
    assert mode is None and plan.phase == DONE


def test_advance_approach_walks_polyline():
    s = make_state(_flock((100, 100)), shepherd=(0, 0), field_size=200)
    pts = np.array([(0.5, 0), (10, 0), (20, 0)])
    plan = PlanState(APPROACH, approach=PolylinePath(pts, 20.0, 0.0))
    mode, plan = advance(s, plan, P)
    assert isinstance(mode, ApproachPath) and plan.approach_cursor == 1
    mode, plan = advance(s.replace(shepherd=np.array([20.0, 0.5])), plan, P)
    assert plan.approach_cursor == 1  # points are reached in order, none skipped
    mode, plan = advance(s.replace(shepherd=np.array([10.5, 0.0])), plan, P)
    assert plan.approach_cursor == 2 and np.array_equal(mode.waypoint, (20, 0))
    at_end = s.replace(shepherd=np.array([20.0, 0.5]))
    mode, plan = advance(at_end, plan, P)
    assert plan.phase == DRIVE and plan.drive_started == 0


def test_phase_cannot_go_back():
    with pytest.raises(ValueError):
        PlanState(DRIVE).replace(phase=APPROACH)
    with pytest.raises(ValueError):
        PlanState("bogus")


def test_start_plan_clips_to_field():
    s = make_state(_flock((10, 10)), shepherd=(2, 190), goal=(190, 190), field_size=200)
    res = plan_approach(s, P, FAST, np.random.default_rng(0))
    plan = start_plan(res, s)
    assert np.all((plan.approach.points >= 0) & (plan.approach.points <= 200))


def test_episode_starting_in_goal():
    s = make_state(_flock((2, 2), spread=0.5), shepherd=(50, 50), field_size=200)
    for algo in ("strombom", "unswdst", "unswdst1"):
        res = run_episode(s, algo, P, FAST, seed=0, trace=True)
        assert res.success and res.steps == 0 and res.planner_evals == 0
        assert len(res.trace) == 1


def test_reactive_episode_ignores_de_config():
    s = make_state(_flock((60, 60), n=8), shepherd=(100, 100), field_size=200)
    a = run_episode(s, "unswdst", P, DEConfig(), seed=3)
    b = run_episode(s, "unswdst", P, DEConfig(generations=5, population_size=8), seed=3)
    assert a.steps == b.steps and np.array_equal(a.final_state.sheep, b.final_state.sheep)


def test_two_phase_episode_counts_and_trace():
    obs = [Obstacle((40, 40), 10)]
    s = make_state(_flock((80, 80), n=10), shepherd=(0, 0), field_size=200, obstacles=obs)
    res = run_episode(s, "unswdst1", P, FAST, seed=1, trace=True)
    assert res.success and res.steps <= P.max_steps
    assert res.planner_evals == 2 * FAST.population_size * (FAST.generations + 1)
    assert len(res.trace) == res.steps + 1
    modes = [r.mode for r in res.trace]
    assert modes[0] == "approach"
    assert "approach" not in modes[modes.index("driving"):]


def test_episode_timeout():
    s = make_state(_flock((150, 150), n=10), shepherd=(0, 0), field_size=200)
    res = run_episode(s, "unswdst", ModelParams(max_steps=20), FAST, seed=0)
    assert not res.success and res.steps == 20


def test_unknown_algorithm():
    with pytest.raises(ValueError):
        run_episode(make_state([(1, 1)]), "greedy", P, FAST, seed=0)

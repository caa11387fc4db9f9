"""Reactive sheep and shepherd behaviours: forces, target points, stepping."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .world import (
    ModelParams,
    WorldState,
    cohesion_radius,
    gcm,
    obstacle_arrays,
    unit,
    vec,
)

__all__ = [
    "Driving",
    "Collecting",
    "ApproachPath",
    "BehaviorMode",
    "make_rng",
    "sheep_total_force",
    "sheep_forces",
    "shepherd_total_force",
    "driving_point",
    "collecting_point",
    "select_furthest_strombom",
    "select_furthest_unswdst",
    "shepherd_target",
    "step",
    "is_complete",
]


@dataclass(frozen=True)
class Driving:
    """Push the flock towards ``subgoal`` (the world goal when ``None``)."""

    subgoal: Optional[np.ndarray] = None
    name = "driving"


@dataclass(frozen=True)
class Collecting:
    sheep: int
    name = "collecting"

    def __post_init__(self):
        if self.sheep < 0:
            raise ValueError("Collecting needs a valid sheep index")


@dataclass(frozen=True)
class ApproachPath:
    """Walk to the next point of a planned approach polyline."""

    waypoint: np.ndarray
    name = "approach"


BehaviorMode = Union[Driving, Collecting, ApproachPath]


def make_rng(seed) -> np.random.Generator:
    return np.random.default_rng(seed)


def _noise_dirs(angles) -> np.ndarray:
    angles = np.asarray(angles, dtype=float)
    return np.stack([np.cos(angles), np.sin(angles)], axis=-1)


def _lcm(sheep: np.ndarray, n: int) -> np.ndarray:
    """Local centre of mass of each sheep's ``n`` nearest neighbours."""
    count = len(sheep)
    if n == 0:
        return sheep.copy()
    if n == count - 1:
        return (sheep.sum(axis=0) - sheep) / n
    d = np.linalg.norm(sheep[:, None, :] - sheep[None, :, :], axis=-1)
    np.fill_diagonal(d, np.inf)
    idx = np.argsort(d, axis=1, kind="stable")[:, :n]
    return sheep[idx].mean(axis=1)


def sheep_forces(state: WorldState, params: ModelParams, noise_dirs: np.ndarray) -> np.ndarray:
    """Weighted total force on every sheep, before renormalisation.

    ``noise_dirs`` is an ``(n, 2)`` array of unit noise vectors.
    """
    sheep = state.sheep
    count = len(sheep)

    to_dog = sheep - state.shepherd
    dog_dist = np.linalg.norm(to_dog, axis=1)
    threatened = dog_dist < params.r_shepherd_detect
    f_dog = np.where(threatened[:, None], unit(to_dog), 0.0)

    diff = sheep[:, None, :] - sheep[None, :, :]
    dist = np.linalg.norm(diff, axis=-1)
    close = (dist < params.r_sheep_interact) & ~np.eye(count, dtype=bool)
    f_sheep = unit((unit(diff) * close[..., None]).sum(axis=1))

    f_lcm = unit(_lcm(sheep, params.effective_neighbors(count)) - sheep)

    centers, radii = obstacle_arrays(state.obstacles)
    if len(radii):
        away = sheep[:, None, :] - centers[None, :, :]
        near = np.linalg.norm(away, axis=-1) < radii + params.effective_obstacle_margin()
        f_obs = unit((unit(away) * near[..., None]).sum(axis=1))
    else:
        f_obs = np.zeros_like(sheep)

    total = (
        params.w_inertia * state.prev_force
        + params.w_lcm_attract * f_lcm
        + params.w_shepherd_repel * f_dog
        + params.w_sheep_repel * f_sheep
        + params.w_sheep_noise * np.asarray(noise_dirs)
        + params.effective_obstacle_weight() * f_obs
    )
    if params.calm_when_undisturbed:
        calm = params.w_sheep_repel * f_sheep + params.effective_obstacle_weight() * f_obs
        total = np.where(threatened[:, None], total, calm)
    return total


def sheep_total_force(state: WorldState, i: int, params: ModelParams, rng) -> np.ndarray:
    """Total force on sheep ``i``; draws one noise angle from ``rng``."""
    if not 0 <= i < state.n_sheep:
        raise IndexError(f"sheep index {i} out of range")
    dirs = np.zeros_like(state.sheep)
    dirs[i] = _noise_dirs(rng.uniform(0.0, 2 * np.pi))
    return sheep_forces(state, params, dirs)[i]


def _shepherd_force(position, target, w_noise, noise_dir) -> np.ndarray:
    heading = unit(np.asarray(target, dtype=float) - position)
    return unit(heading + w_noise * np.asarray(noise_dir))


def shepherd_total_force(state: WorldState, target, params: ModelParams, rng) -> np.ndarray:
    """Unit heading toward ``target`` perturbed by angular noise."""
    noise = _noise_dirs(rng.uniform(0.0, 2 * np.pi))
    return _shepherd_force(state.shepherd, target, params.w_shepherd_noise, noise)


def driving_point(centre, goal, params: ModelParams, n_sheep: int = 1) -> np.ndarray:
    """Point ``offset`` behind the flock centre on the goal->centre ray."""
    centre = np.asarray(centre, dtype=float)
    direction = unit(centre - np.asarray(goal, dtype=float))
    return centre + params.drive_offset(n_sheep) * direction


def collecting_point(sheep_pos, centre, params: ModelParams) -> np.ndarray:
    """Point behind a stray sheep, on the far side from the flock centre."""
    sheep_pos = np.asarray(sheep_pos, dtype=float)
    direction = unit(sheep_pos - np.asarray(centre, dtype=float))
    return sheep_pos + params.collect_offset() * direction


def select_furthest_strombom(state: WorldState, params: ModelParams) -> Optional[int]:
    """Furthest sheep from the centre of mass if it lies outside the herd zone."""
    dist = np.linalg.norm(state.sheep - gcm(state.sheep), axis=1)
    i = int(np.argmax(dist))
    if dist[i] > cohesion_radius(state.n_sheep, params):
        return i
    return None


def select_furthest_unswdst(state: WorldState, goal, params: ModelParams) -> Optional[int]:
    """Like :func:`select_furthest_strombom` but skips strays already ahead of the flock.

    Two lines perpendicular to the centre->goal vector, one through the
    centre of mass (shifted by ``params.slab_near_offset``) and one through
    the goal, bound a slab.  Strays inside it lie on the flock's way and are
    picked up en route, so only strays outside the herd zone *and* outside
    the slab are candidates.
    """
    centre = gcm(state.sheep)
    rel = state.sheep - centre
    dist = np.linalg.norm(rel, axis=1)
    to_goal = np.asarray(goal, dtype=float) - centre
    along = rel @ unit(to_goal)
    in_slab = (along > params.slab_near_offset) & (along <= np.linalg.norm(to_goal))
    candidates = (dist > cohesion_radius(state.n_sheep, params)) & ~in_slab
    if not candidates.any():
        return None
    return int(np.argmax(np.where(candidates, dist, -np.inf)))


def shepherd_target(state: WorldState, mode: BehaviorMode, params: ModelParams) -> np.ndarray:
    centre = gcm(state.sheep)
    if isinstance(mode, Driving):
        goal = state.goal if mode.subgoal is None else mode.subgoal
        return driving_point(centre, goal, params, state.n_sheep)
    if isinstance(mode, Collecting):
        return collecting_point(state.sheep[mode.sheep], centre, params)
    if isinstance(mode, ApproachPath):
        return vec(mode.waypoint)
    raise TypeError(f"unknown behaviour mode {mode!r}")


def step(state: WorldState, mode: BehaviorMode, params: ModelParams, rng) -> WorldState:
    """Advance the world by one time step.

    Noise is drawn sheep by ascending index, then the shepherd.
    """
    angles = rng.uniform(0.0, 2 * np.pi, size=state.n_sheep + 1)
    noise = _noise_dirs(angles)

    force = unit(sheep_forces(state, params, noise[:-1]))
    sheep = state.sheep + params.speed_sheep * force

    target = shepherd_target(state, mode, params)
    heading = _shepherd_force(state.shepherd, target, params.w_shepherd_noise, noise[-1])
    near = np.linalg.norm(state.sheep - state.shepherd, axis=1) < params.stop_radius
    speed = 0.0 if near.any() else params.speed_shepherd
    shepherd = state.shepherd + speed * heading

    lim = state.field_size
    return state.replace(
        sheep=np.clip(sheep, 0.0, lim),
        shepherd=np.clip(shepherd, 0.0, lim),
        prev_force=force,
        t=state.t + 1,
    )


def is_complete(state: WorldState, params: ModelParams) -> bool:
    return bool(np.linalg.norm(gcm(state.sheep) - state.goal) <= params.goal_radius)

"""Geometry, world state and flock statistics.

Positions and forces are plain ``numpy`` arrays: a single point is shape
``(2,)`` and a set of points is ``(n, 2)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

__all__ = [
    "Obstacle",
    "ModelParams",
    "WorldState",
    "vec",
    "unit",
    "gcm",
    "flock_radius",
    "cohesion_radius",
    "nearest_neighbors",
    "is_flock_cohesive",
    "obstacle_arrays",
]


def vec(x, y=None) -> np.ndarray:
    """Build a finite 2D vector from ``(x, y)`` or a length-2 sequence."""
    v = np.array([x, y] if y is not None else x, dtype=float)
    if v.shape != (2,):
        raise ValueError(f"expected a 2D vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"non-finite vector {v}")
    return v


def unit(v: np.ndarray) -> np.ndarray:
    """Unit vector(s) along the last axis; zero-length rows map to zero."""
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v, axis=-1, keepdims=True)
    return np.divide(v, n, out=np.zeros_like(v), where=n > 0)


@dataclass(frozen=True)
class Obstacle:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", vec(self.center))
        if not self.radius > 0:
            raise ValueError(f"obstacle radius must be > 0, got {self.radius}")


def obstacle_arrays(obstacles: Sequence[Obstacle]) -> tuple[np.ndarray, np.ndarray]:
    """Stack obstacles into ``(centers (m, 2), radii (m,))``."""
    if not obstacles:
        return np.zeros((0, 2)), np.zeros(0)
    centers = np.array([o.center for o in obstacles], dtype=float)
    radii = np.array([o.radius for o in obstacles], dtype=float)
    return centers, radii


@dataclass(frozen=True)
class ModelParams:
    """Force weights, ranges and speeds of the reactive sheep/shepherd model.

    ``None`` for ``n_neighbors``, ``w_obstacle_repel``, ``r_obstacle_margin``
    and ``r_shepherd_influence`` means "derive from the other fields"; use the
    helper methods to read them.

    With ``calm_when_undisturbed`` a sheep farther than ``r_shepherd_detect``
    from the shepherd only feels sheep and obstacle repulsion.
    """

    w_inertia: float = 0.5
    w_lcm_attract: float = 1.05
    w_shepherd_repel: float = 1.0
    w_sheep_repel: float = 2.0
    w_sheep_noise: float = 0.3
    w_shepherd_noise: float = 0.3
    r_sheep_interact: float = 2.0
    r_shepherd_detect: float = 65.0
    r_shepherd_influence: Optional[float] = None
    n_neighbors: Optional[int] = None
    speed_sheep: float = 1.0
    speed_shepherd: float = 1.5
    w_obstacle_repel: Optional[float] = None
    r_obstacle_margin: Optional[float] = None
    goal_radius: float = 15.0
    max_steps: int = 2000
    cohesion_exponent: float = 2.0 / 3.0
    slab_near_offset: float = 0.0
    stop_radius_factor: float = 3.0
    calm_when_undisturbed: bool = True

    def __post_init__(self):
        for name in ("r_sheep_interact", "r_shepherd_detect", "speed_sheep",
                     "speed_shepherd", "goal_radius"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")
        for name in ("w_inertia", "w_lcm_attract", "w_shepherd_repel",
                     "w_sheep_repel", "w_sheep_noise", "w_shepherd_noise"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        for name in ("r_shepherd_influence", "w_obstacle_repel", "r_obstacle_margin"):
            value = getattr(self, name)
            if value is not None and value < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.n_neighbors is not None and self.n_neighbors < 1:
            raise ValueError("n_neighbors must be >= 1")
        if self.max_steps < 0:
            raise ValueError("max_steps must be >= 0")

    def effective_neighbors(self, n_sheep: int) -> int:
        n = n_sheep - 1 if self.n_neighbors is None else self.n_neighbors
        return max(0, min(n, n_sheep - 1))

    def effective_obstacle_weight(self) -> float:
        return self.w_shepherd_repel if self.w_obstacle_repel is None else self.w_obstacle_repel

    def effective_obstacle_margin(self) -> float:
        return self.r_sheep_interact if self.r_obstacle_margin is None else self.r_obstacle_margin

    def drive_offset(self, n_sheep: int) -> float:
        """Distance of the driving point behind the flock centre."""
        if self.r_shepherd_influence is not None:
            return self.r_shepherd_influence
        return self.r_sheep_interact * np.sqrt(n_sheep)

    def collect_offset(self) -> float:
        """Distance of the collecting point behind a stray."""
        if self.r_shepherd_influence is not None:
            return self.r_shepherd_influence
        return self.r_sheep_interact

    @property
    def stop_radius(self) -> float:
        return self.stop_radius_factor * self.r_sheep_interact


@dataclass(frozen=True)
class WorldState:
    """Snapshot of one simulation step.

    ``prev_force`` holds each sheep's force from the previous step and feeds
    the inertia term.
    """

    sheep: np.ndarray
    shepherd: np.ndarray
    goal: np.ndarray
    field_size: float
    obstacles: tuple = ()
    prev_force: np.ndarray = field(default=None)
    t: int = 0

    def __post_init__(self):
        sheep = np.array(self.sheep, dtype=float).reshape(-1, 2)
        if len(sheep) == 0:
            raise ValueError("a world needs at least one sheep")
        if not np.all(np.isfinite(sheep)):
            raise ValueError("non-finite sheep position")
        object.__setattr__(self, "sheep", sheep)
        object.__setattr__(self, "shepherd", vec(self.shepherd))
        object.__setattr__(self, "goal", vec(self.goal))
        object.__setattr__(self, "obstacles", tuple(self.obstacles))
        if self.prev_force is None:
            object.__setattr__(self, "prev_force", np.zeros_like(sheep))
        else:
            pf = np.array(self.prev_force, dtype=float).reshape(sheep.shape)
            object.__setattr__(self, "prev_force", pf)

    @property
    def n_sheep(self) -> int:
        return len(self.sheep)

    def replace(self, **changes) -> "WorldState":
        return replace(self, **changes)


def _points(positions) -> np.ndarray:
    pts = np.asarray(positions, dtype=float).reshape(-1, 2)
    if len(pts) == 0:
        raise ValueError("empty flock")
    return pts


def gcm(sheep_positions) -> np.ndarray:
    """Global centre of mass of the flock."""
    return _points(sheep_positions).mean(axis=0)


def flock_radius(sheep_positions, centre=None) -> float:
    """Distance from the centre of mass to the furthest sheep."""
    pts = _points(sheep_positions)
    c = pts.mean(axis=0) if centre is None else np.asarray(centre, dtype=float)
    return float(np.max(np.linalg.norm(pts - c, axis=1)))


def cohesion_radius(n_sheep: int, params: ModelParams) -> float:
    """Herd-zone radius ``r_sheep_interact * N**(2/3)``."""
    return params.r_sheep_interact * n_sheep ** params.cohesion_exponent


def nearest_neighbors(state: WorldState, i: int, n: int) -> np.ndarray:
    """Indices of the ``n`` sheep closest to sheep ``i`` (ties: lower index)."""
    count = state.n_sheep
    if not 0 <= i < count:
        raise IndexError(f"sheep index {i} out of range")
    if not 0 <= n <= count - 1:
        raise ValueError(f"n={n} neighbours requested from a flock of {count}")
    d = np.linalg.norm(state.sheep - state.sheep[i], axis=1)
    d[i] = np.inf
    # stable sort keeps the lower index first among equal distances
    return np.argsort(d, kind="stable")[:n]


def is_flock_cohesive(state: WorldState, params: ModelParams) -> bool:
    centre = gcm(state.sheep)
    dist = np.linalg.norm(state.sheep - centre, axis=1)
    return bool(np.all(dist <= cohesion_radius(state.n_sheep, params)))

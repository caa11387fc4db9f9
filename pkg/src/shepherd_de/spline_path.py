"""Waypoint paths: cubic-spline realisation, length and obstacle violation.

A candidate path is ``start``, ``D`` free waypoints and ``target``.  The
``D + 2`` knots are placed at equally spaced parameters on ``[0, 1]`` and
each coordinate is interpolated with a cubic spline sampled at ``p_max``
evenly spaced parameters.

Because spline values are linear in the knot values, sampling reduces to
a fixed ``(p_max, D + 2)`` basis matrix; :func:`spline_basis` builds and
caches it so whole populations are interpolated with one matrix product.

Feasibility is only checked at the sampled points, so an obstacle thinner
than the sample spacing can slip between two consecutive samples.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np
from scipy.interpolate import CubicSpline

from .world import Obstacle, obstacle_arrays

__all__ = [
    "P_MAX",
    "WaypointPath",
    "PolylinePath",
    "spline_basis",
    "interpolate",
    "interpolate_many",
    "path_length",
    "violation_point",
    "violation_disc",
    "evaluate",
    "evaluate_many",
]

P_MAX = 100


@dataclass(frozen=True)
class WaypointPath:
    start: np.ndarray
    target: np.ndarray
    waypoints: np.ndarray  # (D, 2)

    def __post_init__(self):
        wp = np.asarray(self.waypoints, dtype=float).reshape(-1, 2)
        if len(wp) < 1:
            raise ValueError("a waypoint path needs at least one waypoint")
        object.__setattr__(self, "waypoints", wp)
        object.__setattr__(self, "start", np.asarray(self.start, dtype=float))
        object.__setattr__(self, "target", np.asarray(self.target, dtype=float))

    def knots(self) -> np.ndarray:
        """All ``D + 2`` knots, start and target included."""
        return np.vstack([self.start, self.waypoints, self.target])


@dataclass(frozen=True)
class PolylinePath:
    points: np.ndarray  # (p_max, 2)
    length: float
    violation: float

    @property
    def feasible(self) -> bool:
        return self.violation == 0.0


@lru_cache(maxsize=32)
def spline_basis(n_knots: int, p_max: int = P_MAX, bc_type: str = "not-a-knot") -> np.ndarray:
    """Matrix ``B`` with ``B @ knot_values`` = spline sampled at ``p_max`` points."""
    if n_knots < 3:
        raise ValueError("need at least one waypoint between start and target")
    if p_max < n_knots:
        raise ValueError(f"p_max={p_max} must be >= number of knots {n_knots}")
    ts = np.linspace(0.0, 1.0, n_knots)
    ls = np.linspace(0.0, 1.0, p_max)
    basis = CubicSpline(ts, np.eye(n_knots), bc_type=bc_type)(ls)
    # endpoints are knots; pin them so start/target come out exact
    basis[0] = np.eye(n_knots)[0]
    basis[-1] = np.eye(n_knots)[-1]
    basis.setflags(write=False)
    return basis


def interpolate(path: WaypointPath, p_max: int = P_MAX, bc_type: str = "not-a-knot") -> np.ndarray:
    """Sample the spline through ``path``'s knots at ``p_max`` points."""
    if not np.all(np.isfinite(path.knots())):
        raise ValueError("non-finite waypoint")
    return interpolate_many(path.start, path.target, path.waypoints[None], p_max, bc_type)[0]


def interpolate_many(start, target, waypoints: np.ndarray, p_max: int = P_MAX,
                     bc_type: str = "not-a-knot") -> np.ndarray:
    """Vectorised :func:`interpolate`; ``waypoints`` is ``(P, D, 2)``, result ``(P, p_max, 2)``."""
    waypoints = np.asarray(waypoints, dtype=float)
    count, d = waypoints.shape[:2]
    knots = np.empty((count, d + 2, 2))
    knots[:, 0] = start
    knots[:, 1:-1] = waypoints
    knots[:, -1] = target
    return np.einsum("pk,nkc->npc", spline_basis(d + 2, p_max, bc_type), knots)


def path_length(points: np.ndarray) -> np.ndarray:
    """Sum of segment lengths along the last-but-one axis."""
    points = np.asarray(points, dtype=float)
    return np.linalg.norm(np.diff(points, axis=-2), axis=-1).sum(axis=-1)


def violation_disc(points: np.ndarray, obstacles: Sequence[Obstacle], flock_radius: float) -> np.ndarray:
    """Summed relative penetration of a disc of ``flock_radius`` moving along ``points``."""
    if flock_radius < 0:
        raise ValueError("flock_radius must be >= 0")
    points = np.asarray(points, dtype=float)
    centers, radii = obstacle_arrays(obstacles)
    if len(radii) == 0:
        return np.zeros(points.shape[:-2])
    d = np.linalg.norm(points[..., :, None, :] - centers, axis=-1)
    return np.maximum(1.0 - (d - flock_radius) / radii, 0.0).sum(axis=(-2, -1))


def violation_point(points: np.ndarray, obstacles: Sequence[Obstacle]) -> np.ndarray:
    """Summed relative penetration of the sampled points into obstacles."""
    return violation_disc(points, obstacles, 0.0)


def evaluate(path: WaypointPath, obstacles: Sequence[Obstacle], flock_radius: Optional[float] = None,
             p_max: int = P_MAX, bc_type: str = "not-a-knot") -> PolylinePath:
    """Realise ``path`` and score it.

    ``flock_radius=None`` checks bare points; a number inflates each sample
    to a disc of that radius.
    """
    points = interpolate(path, p_max, bc_type)
    length, violation = evaluate_many(path.start, path.target, path.waypoints[None], obstacles,
                                      flock_radius, p_max, bc_type)
    return PolylinePath(points, float(length[0]), float(violation[0]))


def evaluate_many(start, target, waypoints: np.ndarray, obstacles: Sequence[Obstacle],
                  flock_radius: Optional[float] = None, p_max: int = P_MAX,
                  bc_type: str = "not-a-knot") -> tuple[np.ndarray, np.ndarray]:
    """Lengths and violations of a ``(P, D, 2)`` batch of waypoint sets."""
    points = interpolate_many(start, target, waypoints, p_max, bc_type)
    return path_length(points), violation_disc(points, obstacles, flock_radius or 0.0)

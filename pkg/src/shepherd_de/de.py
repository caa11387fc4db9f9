"""Constrained differential evolution over waypoint paths.

Mutation is current-to-pbest, crossover binomial, and out-of-bound genes
are clamped to the violated bound.  Survivors are chosen with the usual
feasibility rules (feasible beats infeasible, then lower length among
feasible, lower violation among infeasible).  ``F`` and ``Cr`` are drawn
per individual from a success-history memory that is refreshed every
generation from the winning trials, weighted by how much they improved
their parent.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .spline_path import P_MAX, PolylinePath, WaypointPath, evaluate, evaluate_many
from .world import Obstacle

__all__ = [
    "DEConfig",
    "Individual",
    "Population",
    "ParamMemory",
    "GenerationStats",
    "DEResult",
    "rank_order",
    "init_population",
    "sample_params",
    "mutate_crossover",
    "select",
    "violation_gain",
    "improvement_weight",
    "weighted_mean",
    "weighted_lehmer_mean",
    "update_memory",
    "optimize",
]


@dataclass(frozen=True)
class DEConfig:
    population_size: int = 30
    generations: int = 150
    n_waypoints: int = 3
    p_best_fraction: float = 0.1
    memory_size: Optional[int] = None
    sigma_f: float = 0.1
    sigma_cr: float = 0.1
    bounds: tuple = ((0.0, 200.0), (0.0, 200.0))
    p_max: int = P_MAX
    bc_type: str = "not-a-knot"

    def __post_init__(self):
        if self.population_size < 4:
            raise ValueError("population_size must be >= 4")
        if not 0 < self.p_best_fraction <= 1:
            raise ValueError("p_best_fraction must be in (0, 1]")
        if self.n_waypoints < 1:
            raise ValueError("n_waypoints must be >= 1")
        if self.generations < 0:
            raise ValueError("generations must be >= 0")
        if self.memory_size is not None and self.memory_size < 1:
            raise ValueError("memory_size must be >= 1")
        b = self.bound_array
        if b.shape != (2, 2) or np.any(b[:, 0] > b[:, 1]):
            raise ValueError(f"bounds must be ((xlo, xhi), (ylo, yhi)), got {self.bounds}")
        object.__setattr__(self, "bounds", tuple(tuple(map(float, r)) for r in b))

    @property
    def bound_array(self) -> np.ndarray:
        return np.asarray(self.bounds, dtype=float)

    @property
    def lower(self) -> np.ndarray:
        return self.bound_array[:, 0]

    @property
    def upper(self) -> np.ndarray:
        return self.bound_array[:, 1]

    @property
    def H(self) -> int:
        return self.population_size if self.memory_size is None else self.memory_size

    @property
    def n_best(self) -> int:
        return max(1, int(round(self.p_best_fraction * self.population_size)))


@dataclass
class Individual:
    genome: np.ndarray  # (D, 2) waypoint coordinates
    length: float
    violation: float
    f: Optional[float] = None
    cr: Optional[float] = None

    @property
    def feasible(self) -> bool:
        return self.violation == 0.0

    def key(self) -> tuple:
        """Feasibility-first sort key: feasible by length, then infeasible by violation."""
        return (0, self.length) if self.feasible else (1, self.violation)


@dataclass
class Population:
    genomes: np.ndarray  # (PS, D, 2)
    lengths: np.ndarray
    violations: np.ndarray

    def __len__(self) -> int:
        return len(self.genomes)

    def __getitem__(self, z: int) -> Individual:
        return Individual(self.genomes[z].copy(), float(self.lengths[z]), float(self.violations[z]))

    def __setitem__(self, z: int, ind: Individual):
        self.genomes[z] = ind.genome
        self.lengths[z] = ind.length
        self.violations[z] = ind.violation


def rank_order(lengths, violations) -> np.ndarray:
    """Indices sorted feasibility-first (stable: ties keep index order)."""
    lengths = np.asarray(lengths)
    violations = np.asarray(violations)
    infeasible = violations > 0
    return np.lexsort((np.where(infeasible, violations, lengths), infeasible))


@dataclass
class ParamMemory:
    """Circular archives of successful ``Cr`` and ``F`` means.

    ``cursor`` is the 0-based slot written by the next update.
    """

    m_cr: np.ndarray
    m_f: np.ndarray
    cursor: int = 0

    @classmethod
    def create(cls, size: int) -> "ParamMemory":
        return cls(np.full(size, 0.5), np.full(size, 0.5))

    @property
    def size(self) -> int:
        return len(self.m_cr)


@dataclass
class GenerationStats:
    best_length: float
    best_violation: float
    f: np.ndarray
    cr: np.ndarray
    n_successes: int
    cursor: int


@dataclass
class DEResult:
    path: WaypointPath
    polyline: PolylinePath
    evaluations: int
    history: list = field(default_factory=list)

    @property
    def length(self) -> float:
        return self.polyline.length

    @property
    def violation(self) -> float:
        return self.polyline.violation

    @property
    def feasible(self) -> bool:
        return self.polyline.feasible


class _Problem:
    """Start, target and obstacles of one planning call, with an eval counter."""

    def __init__(self, start, target, obstacles, flock_radius, config: DEConfig):
        self.start = np.asarray(start, dtype=float)
        self.target = np.asarray(target, dtype=float)
        self.obstacles = tuple(obstacles)
        self.flock_radius = flock_radius
        self.config = config
        self.evaluations = 0

    def __call__(self, genomes: np.ndarray):
        self.evaluations += len(genomes)
        return evaluate_many(self.start, self.target, genomes, self.obstacles,
                             self.flock_radius, self.config.p_max, self.config.bc_type)


def init_population(config: DEConfig, problem: _Problem, rng) -> Population:
    """Uniform random waypoints inside the search bounds, evaluated."""
    shape = (config.population_size, config.n_waypoints, 2)
    genomes = config.lower + rng.random(shape) * (config.upper - config.lower)
    lengths, violations = problem(genomes)
    return Population(genomes, lengths, violations)


def sample_params(memory: ParamMemory, rng, sigma_f: float = 0.1, sigma_cr: float = 0.1) -> tuple[float, float]:
    """Draw ``(F, Cr)`` around a randomly chosen memory slot."""
    r = rng.integers(memory.size)
    cr = float(np.clip(rng.normal(memory.m_cr[r], sigma_cr), 0.0, 1.0))
    while True:
        f = memory.m_f[r] + sigma_f * rng.standard_cauchy()
        if f > 0:
            break
    return float(min(f, 1.0)), cr


def mutate_crossover(z: int, population: Population, F: float, Cr: float, rng,
                     config: DEConfig, order: Optional[np.ndarray] = None) -> np.ndarray:
    """Trial genome for individual ``z`` (current-to-pbest/1, binomial crossover)."""
    size = len(population)
    if order is None:
        order = rank_order(population.lengths, population.violations)
    phi = order[rng.integers(config.n_best)]
    r1 = rng.choice(np.delete(np.arange(size), z))
    r2 = rng.choice(np.delete(np.arange(size), [z, r1]))

    g = population.genomes
    x = g[z].ravel()
    mutant = x + F * (g[phi].ravel() - x + g[r1].ravel() - g[r2].ravel())
    cross = rng.random(x.size) <= Cr
    cross[rng.integers(x.size)] = True
    trial = np.where(cross, mutant, x).reshape(g[z].shape)
    return np.clip(trial, config.lower, config.upper)


def select(parent: Individual, trial: Individual) -> tuple[Individual, bool]:
    """Feasibility-rule survivor and whether the trial strictly improved."""
    if trial.feasible and parent.feasible:
        wins, strict = trial.length <= parent.length, trial.length < parent.length
    elif trial.feasible:
        wins = strict = True
    elif parent.feasible:
        wins = strict = False
    else:
        wins, strict = trial.violation <= parent.violation, trial.violation < parent.violation
    return (trial if wins else parent), strict


def _rel_gain(before: float, after: float) -> float:
    return (before - after) / abs(before) if before != 0 else 0.0


def violation_gain(parent: Individual, trial: Individual) -> float:
    """Relative violation reduction ``(psi_old - psi_new) / psi_old``; 0 if the parent was feasible."""
    return _rel_gain(parent.violation, trial.violation) if parent.violation > 0 else 0.0


def improvement_weight(parent: Individual, trial: Individual) -> float:
    """Non-negative improvement of a winning ``trial`` over its ``parent``.

    Infeasible -> infeasible: clipped relative violation gain plus clipped
    relative length gain.  Into a feasible trial, the same quantity ``I`` is
    added to an unclipped violation gain and a clipped length gain, so a
    first feasible trial counts roughly twice as much as a pure length gain.
    """
    length_gain = max(0.0, _rel_gain(parent.length, trial.length))
    base = max(0.0, violation_gain(parent, trial)) + length_gain
    if not trial.feasible:
        return base
    return max(0.0, base) + violation_gain(parent, trial) + length_gain


def weighted_mean(values, weights) -> float:
    return float(np.dot(weights, values))


def weighted_lehmer_mean(values, weights) -> float:
    values = np.asarray(values, dtype=float)
    return float(np.dot(weights, values**2) / np.dot(weights, values))


def update_memory(memory: ParamMemory, successes: Sequence[tuple[float, float, float]]) -> ParamMemory:
    """Write the weighted means of ``(Cr, F, weight)`` successes into the next slot.

    No successes, or an all-zero weight total, leaves the memory untouched.
    """
    if not successes:
        return memory
    cr, f, xi = (np.asarray(c, dtype=float) for c in zip(*successes))
    total = xi.sum()
    if total <= 0:
        return memory
    w = xi / total
    memory.m_cr[memory.cursor] = weighted_mean(cr, w)
    memory.m_f[memory.cursor] = weighted_lehmer_mean(f, w)
    memory.cursor = (memory.cursor + 1) % memory.size
    return memory


def optimize(start, target, obstacles: Sequence[Obstacle], config: DEConfig, rng,
             flock_radius: Optional[float] = None, record: bool = False) -> DEResult:
    """Plan a waypoint path from ``start`` to ``target``.

    ``flock_radius=None`` scores bare points; a value scores a disc of that
    radius.  Runs exactly ``config.generations`` generations and returns the
    feasibility-first best individual, which may still be infeasible.
    """
    problem = _Problem(start, target, obstacles, flock_radius, config)
    pop = init_population(config, problem, rng)
    memory = ParamMemory.create(config.H)
    history = []

    for _ in range(config.generations):
        order = rank_order(pop.lengths, pop.violations)
        fs = np.empty(len(pop))
        crs = np.empty(len(pop))
        trials = np.empty_like(pop.genomes)
        for z in range(len(pop)):
            fs[z], crs[z] = sample_params(memory, rng, config.sigma_f, config.sigma_cr)
            trials[z] = mutate_crossover(z, pop, fs[z], crs[z], rng, config, order)
        lengths, violations = problem(trials)

        successes = []
        for z in range(len(pop)):
            parent = pop[z]
            trial = Individual(trials[z], float(lengths[z]), float(violations[z]), fs[z], crs[z])
            winner, improved = select(parent, trial)
            if winner is trial:
                pop[z] = trial
            if improved:
                successes.append((crs[z], fs[z], improvement_weight(parent, trial)))
        update_memory(memory, successes)

        if record:
            best = pop[rank_order(pop.lengths, pop.violations)[0]]
            history.append(GenerationStats(best.length, best.violation, fs, crs,
                                           len(successes), memory.cursor))

    best = pop[rank_order(pop.lengths, pop.violations)[0]]
    path = WaypointPath(problem.start, problem.target, best.genome)
    polyline = evaluate(path, problem.obstacles, flock_radius, config.p_max, config.bc_type)
    return DEResult(path, polyline, problem.evaluations, history)

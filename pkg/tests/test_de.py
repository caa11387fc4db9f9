import math

import numpy as np
import pytest

from shepherd_de.de import (
    DEConfig,
    Individual,
    ParamMemory,
    Population,
    _Problem,
    improvement_weight,
    init_population,
    mutate_crossover,
    optimize,
    rank_order,
    sample_params,
    select,
    update_memory,
    weighted_lehmer_mean,
    weighted_mean,
)
from shepherd_de.world import Obstacle


def _problem(config, obstacles=()):
    return _Problem((0, 0), (150, 150), obstacles, None, config)


def test_init_population_in_bounds_and_deterministic():
    cfg = DEConfig()
    a = init_population(cfg, _problem(cfg), np.random.default_rng(1))
    b = init_population(cfg, _problem(cfg), np.random.default_rng(1))
    assert a.genomes.shape == (30, 3, 2)
    assert np.all((a.genomes >= 0) & (a.genomes <= 200))
    assert np.array_equal(a.genomes, b.genomes) and np.array_equal(a.lengths, b.lengths)


def test_degenerate_bounds():
    cfg = DEConfig(bounds=((7, 7), (3, 3)))
    pop = init_population(cfg, _problem(cfg), np.random.default_rng(0))
    assert np.all(pop.genomes[..., 0] == 7) and np.all(pop.genomes[..., 1] == 3)


def test_sample_params_statistics():
    mem = ParamMemory.create(30)
    rng = np.random.default_rng(0)
    draws = np.array([sample_params(mem, rng) for _ in range(100_000)])
    f, cr = draws[:, 0], draws[:, 1]
    assert 0.45 <= cr.mean() <= 0.55
    assert np.all((cr >= 0) & (cr <= 1))
    assert np.all((f > 0) & (f <= 1))
    assert sample_params(mem, np.random.default_rng(3)) == sample_params(mem, np.random.default_rng(3))


def test_sample_params_f_range_extreme_memory():
    mem = ParamMemory(np.full(5, 0.0), np.full(5, 0.001))
    rng = np.random.default_rng(1)
    fs = np.array([sample_params(mem, rng)[0] for _ in range(200_000)])
    assert fs.min() > 0 and fs.max() <= 1


def _pop(genomes):
    g = np.asarray(genomes, dtype=float)
    return Population(g, np.zeros(len(g)), np.zeros(len(g)))


class FixedRng:
    """Replays scripted draws so the mutation arithmetic can be checked by hand."""

    def __init__(self, ints, choices, randoms):
        self.ints, self.choices, self.randoms = list(ints), list(choices), randoms

    def integers(self, n):
        return self.ints.pop(0)

    def choice(self, a):
        return self.choices.pop(0)

    def random(self, size):
        return np.asarray(self.randoms)


def test_mutation_arithmetic():
    # z=0, phi=1, r1=2, r2=3 on a single-gene-pair genome
    pop = _pop([[[10, 10]], [[20, 20]], [[12, 12]], [[8, 8]]])
    cfg = DEConfig(population_size=4, n_waypoints=1)
    rng = FixedRng(ints=[0, 0], choices=[2, 3], randoms=[0.0, 0.0])
    trial = mutate_crossover(0, pop, 0.5, 1.0, rng, cfg, order=np.array([1, 0, 2, 3]))
    assert np.allclose(trial, [[17, 17]])


def test_crossover_floor_and_clamp():
    rng = np.random.default_rng(0)
    cfg = DEConfig(population_size=10)
    pop = init_population(cfg, _problem(cfg), rng)
    for _ in range(50):
        trial = mutate_crossover(0, pop, 0.7, 0.0, rng, cfg)
        assert np.sum(trial != pop.genomes[0]) <= 1
    pop = _pop([[[190, 190]], [[200, 200]], [[100, 100]], [[10, 10]]])
    cfg = DEConfig(population_size=4, n_waypoints=1)
    rng = FixedRng(ints=[0, 0], choices=[2, 3], randoms=[0.0, 0.0])
    trial = mutate_crossover(0, pop, 1.0, 1.0, rng, cfg, order=np.array([1, 0, 2, 3]))
    assert np.array_equal(trial, [[200, 200]])  # 190 + 10 + 90 = 290 -> clamped


def test_donors_are_distinct():
    rng = np.random.default_rng(5)
    cfg = DEConfig(population_size=4, n_waypoints=1)
    pop = _pop(np.arange(8, dtype=float).reshape(4, 1, 2) * 10)
    seen = set()

    class Spy:
        def __init__(self, inner):
            self.inner = inner
            self.picked = []

        def integers(self, n):
            return self.inner.integers(n)

        def choice(self, a):
            v = self.inner.choice(a)
            self.picked.append(int(v))
            return v

        def random(self, size):
            return self.inner.random(size)

    for _ in range(200):
        spy = Spy(rng)
        mutate_crossover(1, pop, 0.5, 0.5, spy, cfg)
        r1, r2 = spy.picked
        assert len({1, r1, r2}) == 3
        seen.add((r1, r2))
    assert len(seen) == 6


def _ind(L, psi):
    return Individual(np.zeros((1, 2)), L, psi)


def test_select_rules():
    t = _ind(4, 0)
    assert select(_ind(5, 0), t) == (t, True)
    t = _ind(9, 0)
    assert select(_ind(3, 2), t) == (t, True)
    t = _ind(3, 1)
    assert select(_ind(3, 2), t) == (t, True)
    p = _ind(3, 0)
    assert select(p, _ind(1, 0.5)) == (p, False)
    tie = _ind(5, 0)
    winner, strict = select(_ind(5, 0), tie)
    assert winner is tie and not strict


def test_improvement_weights():
    assert improvement_weight(_ind(10, 2), _ind(10, 1)) == pytest.approx(0.5)
    assert improvement_weight(_ind(10, 0), _ind(8, 0)) == pytest.approx(0.2 + 0.2)
    assert improvement_weight(_ind(10, 2), _ind(10, 2)) == 0.0
    assert improvement_weight(_ind(10, 0), _ind(12, 0)) == 0.0
    # first feasible trial: violation gain counts in both parts
    assert improvement_weight(_ind(10, 2), _ind(10, 0)) == pytest.approx(2.0)


def test_weighted_means():
    assert weighted_lehmer_mean([0.5, 1.0], [0.5, 0.5]) == pytest.approx(0.8333333333, abs=1e-9)
    assert weighted_lehmer_mean([0.5, 1.0], [0.5, 0.5]) == pytest.approx(0.625 / 0.75, abs=1e-12)
    assert weighted_mean([0.2, 0.8], [0.75, 0.25]) == pytest.approx(0.35, abs=1e-12)


def test_update_memory_wraps():
    mem = ParamMemory.create(4)
    for k in range(4):
        update_memory(mem, [(0.1 * (k + 1), 0.2, 1.0)])
    assert mem.cursor == 0
    assert np.allclose(mem.m_cr, [0.1, 0.2, 0.3, 0.4])
    update_memory(mem, [(0.9, 0.6, 1.0), (0.5, 0.3, 1.0)])
    assert mem.cursor == 1
    assert mem.m_cr[0] == pytest.approx(0.7)
    assert mem.m_f[0] == pytest.approx((0.36 + 0.09) / 0.9)


def test_update_memory_noop():
    mem = ParamMemory.create(3)
    update_memory(mem, [])
    update_memory(mem, [(0.2, 0.2, 0.0)])
    assert mem.cursor == 0 and np.all(mem.m_cr == 0.5)


def test_rank_order_feasibility_first():
    order = rank_order([5, 1, 3, 9, 2], [0, 2, 0, 0.5, 0])
    assert list(order) == [4, 2, 0, 3, 1]


def test_optimize_obstacle_free():
    res = optimize((10, 20), (160, 170), [], DEConfig(), np.random.default_rng(0))
    assert res.feasible
    assert res.length <= 1.01 * math.dist((10, 20), (160, 170))
    assert res.evaluations == 30 * 151


def test_optimize_single_obstacle():
    res = optimize((0, 100), (200, 100), [Obstacle((100, 100), 20)], DEConfig(), np.random.default_rng(1))
    assert res.violation == 0.0
    assert res.length > 200


def test_optimize_deterministic():
    obs = [Obstacle((100, 100), 25)]
    a = optimize((0, 0), (200, 200), obs, DEConfig(generations=30), np.random.default_rng(9))
    b = optimize((0, 0), (200, 200), obs, DEConfig(generations=30), np.random.default_rng(9))
    assert np.array_equal(a.path.waypoints, b.path.waypoints)


def test_optimize_history_is_elitist():
    obs = [Obstacle((60, 60), 20), Obstacle((130, 120), 25)]
    res = optimize((0, 0), (200, 200), obs, DEConfig(generations=60), np.random.default_rng(2), record=True)
    keys = [(h.best_violation > 0, h.best_violation if h.best_violation > 0 else h.best_length) for h in res.history]
    assert all(b <= a for a, b in zip(keys, keys[1:]))
    for h in res.history:
        assert np.all((h.cr >= 0) & (h.cr <= 1)) and np.all((h.f > 0) & (h.f <= 1))


def test_config_validation():
    with pytest.raises(ValueError):
        DEConfig(population_size=3)
    with pytest.raises(ValueError):
        DEConfig(bounds=((10, 0), (0, 10)))
    assert DEConfig().H == 30 and DEConfig(memory_size=5).H == 5
    assert DEConfig().n_best == 3

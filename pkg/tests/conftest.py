import numpy as np
import pytest

from shepherd_de.world import ModelParams, WorldState


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def params():
    return ModelParams()


def make_state(sheep, shepherd=(0.0, 0.0), goal=(0.0, 0.0), field_size=500.0, **kw):
    return WorldState(sheep=sheep, shepherd=shepherd, goal=goal, field_size=field_size, **kw)

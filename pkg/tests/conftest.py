import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from ppwass import CountingMeasure, GroundSpace

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def interval_measures(T=1.0, max_size=8):
    pts = st.floats(0.0, T, allow_nan=False, allow_infinity=False)
    return st.lists(pts, max_size=max_size).map(CountingMeasure)


@pytest.fixture
def unit():
    return GroundSpace.interval(1.0, 1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_interval_measure(rng, T, max_size):
    k = int(rng.integers(0, max_size + 1))
    return CountingMeasure((T * rng.random(k)).tolist())

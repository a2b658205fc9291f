import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from agency.boolfn import anonymous_or

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def or_first():
    """Two-agent OR, gamma=0.09, delta=0.91, unit costs."""
    return anonymous_or(2, 0.09, 0.91)


@pytest.fixture
def or_second():
    return anonymous_or(2, 0.0001, 0.9)


@pytest.fixture
def rng():
    return np.random.default_rng(20240613)

import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from fduav import kernels
from fduav.scenario import default_scenario

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", max_examples=500, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(scope="session")
def ref():
    """The reference mission: 1.6 km pass in 40 s, 80 slots."""
    return default_scenario()


@pytest.fixture(scope="session")
def long_ref(ref):
    """Reference mission stretched to 160 s at 2 s slots (N=80)."""
    return ref.with_period(160.0, slot_len=2.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture(params=kernels.available_backends())
def backend(request):
    prev = kernels.use_backend(request.param)
    yield request.param
    kernels.use_backend(prev)

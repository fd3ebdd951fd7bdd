import numpy as np
import pytest
from hypothesis import HealthCheck, settings

# Property-test profiles: the invariant suites run at 1000 examples.
settings.register_profile(
    "invariants",
    max_examples=1000,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.filter_too_much],
)
settings.register_profile(
    "default",
    max_examples=100,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)

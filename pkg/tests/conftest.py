import pytest
from hypothesis import HealthCheck, settings

from moyalmetric import make_context

settings.register_profile(
    "suite",
    max_examples=25,
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


@pytest.fixture(scope="session")
def ctx16():
    return make_context(16, 1.0, 1e-10)


@pytest.fixture(scope="session")
def ctx32():
    return make_context(32, 1.0, 1e-10)


@pytest.fixture(scope="session")
def ctx48():
    return make_context(48, 1.0, 1e-10)


@pytest.fixture(scope="session")
def ctx64():
    return make_context(64, 1.0, 1e-10)

import pytest
from hypothesis import HealthCheck, settings

from emx import config

settings.register_profile("emx", max_examples=100, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("emx")


@pytest.fixture(scope="session")
def mode11():
    return config.load("mode11")


@pytest.fixture(scope="session")
def mode12():
    return config.load("mode12")


@pytest.fixture(scope="session")
def dev11(mode11):
    return mode11.transducer


@pytest.fixture(scope="session")
def dev12(mode12):
    return mode12.transducer

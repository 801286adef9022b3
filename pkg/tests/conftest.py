import os
from functools import lru_cache

import pytest
from hypothesis import HealthCheck, settings

from thetalift import catalog

settings.register_profile(
    "default", max_examples=30, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.register_profile("ci", max_examples=100, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@lru_cache(maxsize=None)
def cached(name: str):
    return getattr(catalog, name)()


@pytest.fixture(scope="session")
def q3():
    return catalog.sqrt3_field()


@pytest.fixture(scope="session")
def cubic():
    return catalog.cubic_field()


@pytest.fixture(scope="session")
def d1_lat():
    return cached("d1_signature_12")


@pytest.fixture(scope="session")
def d2_lat():
    return cached("d2_mixed")


@pytest.fixture(scope="session")
def sqrt3_L0():
    return cached("sqrt3_L0")


@pytest.fixture(scope="session")
def sqrt3_L():
    return cached("sqrt3_L")

"""Shared fixtures: bundled data is immutable, so one load serves the session."""

import pytest

from slotqa.bundled import (
    DOMAINS,
    bundled_corpus,
    bundled_domain,
    bundled_overrides,
    bundled_schema,
    bundled_screen,
    bundled_screen_pool,
)


@pytest.fixture(scope="session")
def overrides():
    return bundled_overrides()


@pytest.fixture(scope="session")
def vl_screen():
    return bundled_screen("vehicle_logger")


@pytest.fixture(scope="session")
def united_screen():
    return bundled_screen("united")


@pytest.fixture(scope="session")
def screen_pool():
    return bundled_screen_pool()


@pytest.fixture(scope="session")
def all_domains():
    return {name: bundled_domain(name) for name in DOMAINS}


@pytest.fixture(scope="session")
def vl_domain(all_domains):
    return all_domains["vehicle_logger"]


@pytest.fixture(scope="session")
def atis_domain(all_domains):
    return all_domains["atis_visual"]


@pytest.fixture(scope="session")
def atis_schema():
    return bundled_schema("atis_visual")


@pytest.fixture(scope="session")
def sample_50():
    return bundled_corpus("atis_sample_50")

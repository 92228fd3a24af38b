"""Shared fixtures: the scales used across the verification suites."""

import pytest

from stochscale.timescale import TimeScale, canonicalize


@pytest.fixture
def unit_scale() -> TimeScale:
    return TimeScale([(0.0, 1.0)])


@pytest.fixture
def two_band_scale() -> TimeScale:
    """[0,1] u [2,3]: one gap of length 1."""
    return canonicalize([{"interval": [0, 1]}, {"interval": [2, 3]}])


@pytest.fixture
def mixed_scale() -> TimeScale:
    """[0,1] u {1.5} u [2,3]: two gaps around an isolated point."""
    return canonicalize([{"interval": [0, 1]}, {"point": 1.5}, {"interval": [2, 3]}])


def qscale(q: float = 2.0, kmin: int = -3, kmax: int = 3, include_zero: bool = True) -> TimeScale:
    return canonicalize([{"qscale": {"q": q, "kmin": kmin, "kmax": kmax, "include_zero": include_zero}}])


@pytest.fixture
def q2_scale() -> TimeScale:
    return qscale()

"""Shared bath fixtures: the four parameter sets used throughout the tests."""

import pytest

from src.bath import BathSpec


@pytest.fixture
def lorentzian_weak():
    return BathSpec.lorentzian(0.01, 0.09)


@pytest.fixture
def lorentzian_strong():
    return BathSpec.lorentzian(0.1, 0.3)


@pytest.fixture
def ohmic_weak():
    return BathSpec.ohmic(0.01, 10.0)


@pytest.fixture
def ohmic_strong():
    return BathSpec.ohmic(0.1, 10.0)


@pytest.fixture
def trivial_bath():
    return BathSpec.lorentzian(0.0, 0.09)

"""
SCALEFLOW - Shared Test Fixtures
Growth classes, families, presets and the hypothesis profile used across the suite
"""

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from scaleflow.example_systems import TwoMassConfig, hom_measure, torus_flow
from scaleflow.measure_model import FrechetFamily, GrowthClass

settings.register_profile(
    "scaleflow",
    max_examples=40,
    derandomize=True,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture],
)
settings.load_profile("scaleflow")


@pytest.fixture
def unit_class() -> GrowthClass:
    return GrowthClass(1.0, 1.0)


@pytest.fixture(scope="session")
def family() -> FrechetFamily:
    return FrechetFamily.default()


@pytest.fixture
def two_mass(unit_class):
    return hom_measure(TwoMassConfig(0.1), unit_class)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


@pytest.fixture
def golden_torus():
    return torus_flow()

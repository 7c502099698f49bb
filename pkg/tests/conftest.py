import numpy as np
import pytest

from curvprobe.models.chart import PresetName, PresetSpec
from curvprobe.models.curvature import random_curvature
from curvprobe.models.quadrature import QuadratureOptions


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def curvature_factory(rng):
    def make(scale: float = 1.0):
        return random_curvature(rng, scale=scale)

    return make


@pytest.fixture
def quad():
    return QuadratureOptions()


@pytest.fixture
def de_sitter():
    return PresetSpec(PresetName.DE_SITTER, {"hubble": 0.1})


@pytest.fixture
def schwarzschild():
    return PresetSpec(PresetName.SCHWARZSCHILD, {"mass": 1.0, "radius": 4.0})

import numpy as np
import pytest
from numpy.testing import assert_allclose

from curvprobe.models.chart import PresetName, PresetSpec
from curvprobe.services.geodesics import (DomainExit, NoConvergence, geodesic_connect, geodesic_size,
                                          integrator_tolerances, rnc_chart, vanvleck_numeric,
                                          world_function_integral, world_function_numeric)
from curvprobe.services.presets import minkowski_chart, preset_chart, preset_event


@pytest.fixture
def de_sitter_chart():
    return preset_chart(PresetSpec(PresetName.DE_SITTER, {"hubble": 0.5}))


def test_integrator_tolerances():
    assert integrator_tolerances(1e-10, 1.0) == pytest.approx((1e-12, 1e-12))
    rtol, _ = integrator_tolerances(1e-10, 0.5, magnitude=4.0)
    assert rtol == pytest.approx(1e-13)
    assert integrator_tolerances(1e-3, 1.0)[0] == pytest.approx(1e-6)


def test_flat_geodesic_is_the_chord():
    solution = geodesic_connect(minkowski_chart(), np.zeros(4), [1.0, 2.0, 0.0, 0.0])
    assert_allclose(solution.initial_velocity, [1.0, 2.0, 0.0, 0.0])
    assert solution.integrator_stats["iterations"] == 0
    assert world_function_numeric(minkowski_chart(), np.zeros(4), [1.0, 2.0, 0.0, 0.0]) == pytest.approx(1.5)


def test_coincident_points():
    solution = geodesic_connect(minkowski_chart(), [0.5, 0.0, 1.0, 0.0], [0.5, 0.0, 1.0, 0.0])
    assert not np.any(solution.initial_velocity)
    assert solution.integrator_stats["residual"] == 0.0


def test_point_outside_static_patch():
    chart = preset_chart(PresetSpec(PresetName.DE_SITTER, {"hubble": 0.1}))
    with pytest.raises(DomainExit):
        geodesic_connect(chart, np.zeros(4), [0.0, 12.0, 0.0, 0.0])


def test_iteration_limit(de_sitter_chart):
    with pytest.raises(NoConvergence):
        geodesic_connect(de_sitter_chart, np.zeros(4), [0.3, 0.8, 0.4, 0.0], max_iterations=0)


def test_curved_geodesic_reaches_the_endpoint(de_sitter_chart):
    target = np.array([0.3, 0.8, 0.4, 0.0])
    solution = geodesic_connect(de_sitter_chart, np.zeros(4), target)
    assert solution.integrator_stats["residual"] <= 1e-10
    assert_allclose(solution.path[-1, :4], target, atol=1e-9)
    assert solution.norm_drift < 1e-8


def test_world_function_along_the_path(de_sitter_chart):
    x, x_prime = np.array([0.1, -0.2, 0.0, 0.3]), np.array([0.4, 0.5, 0.2, -0.1])
    solution = geodesic_connect(de_sitter_chart, x, x_prime)
    numeric = world_function_numeric(de_sitter_chart, x, x_prime)
    assert world_function_integral(de_sitter_chart, solution) == pytest.approx(numeric, rel=1e-8)


def test_schwarzschild_connection():
    spec = PresetSpec(PresetName.SCHWARZSCHILD, {"mass": 1.0, "radius": 4.0})
    chart = preset_chart(spec)
    x = preset_event(spec)
    x_prime = x + np.array([0.3, 0.2, 0.05, 0.1])
    solution = geodesic_connect(chart, x, x_prime)
    assert solution.integrator_stats["residual"] <= 1e-10
    assert solution.integrator_stats["iterations"] >= 1


def test_normal_coordinates_round_trip():
    chart = preset_chart(PresetSpec(PresetName.DE_SITTER, {"hubble": 0.1}))
    rnc = rnc_chart(chart, np.zeros(4))
    x = np.array([0.3, 0.6, -0.5, 0.4])
    assert_allclose(rnc.inverse(rnc.forward(x)), x, atol=1e-8)
    assert_allclose(rnc.forward(np.zeros(4)), np.zeros(4))


def test_normal_coordinates_are_flat_at_the_base(de_sitter_chart):
    rnc = rnc_chart(de_sitter_chart, np.zeros(4))
    assert_allclose(rnc.pulled_back_metric(np.zeros(4), h=1e-4), np.diag([-1.0, 1.0, 1.0, 1.0]), atol=1e-7)


def test_geodesic_size_flat():
    events = [np.zeros(4), [1.0, 2.0, 0.0, 0.0], [0.0, 0.0, 3.0, 0.0]]
    assert geodesic_size(minkowski_chart(), events) == pytest.approx(np.sqrt(12.0))


def test_vanvleck_is_one_in_flat_space():
    assert vanvleck_numeric(minkowski_chart(), np.zeros(4), [1.0, 2.0, 0.0, 0.0]) == pytest.approx(1.0, rel=1e-6)


def test_flat_world_function_is_half_the_interval(rng):
    chart = minkowski_chart()
    for _ in range(100):
        x, x_prime = rng.uniform(-3.0, 3.0, size=(2, 4))
        d = x_prime - x
        expected = 0.5 * float(d @ np.diag([-1.0, 1.0, 1.0, 1.0]) @ d)
        assert world_function_numeric(chart, x, x_prime) == pytest.approx(expected, rel=1e-12, abs=1e-12)


@pytest.mark.parametrize("x, x_prime", [
    ([0.1, -0.2, 0.0, 0.3], [0.4, 0.5, 0.2, -0.1]),
    ([0.0, 0.3, 0.3, 0.0], [0.9, 0.1, -0.2, 0.4]),
    ([-0.3, 0.0, 0.6, 0.1], [0.2, 0.4, 0.1, -0.5]),
])
def test_world_function_is_symmetric(de_sitter_chart, x, x_prime):
    forward = world_function_numeric(de_sitter_chart, x, x_prime)
    backward = world_function_numeric(de_sitter_chart, x_prime, x)
    assert forward == pytest.approx(backward, rel=1e-8, abs=1e-12)

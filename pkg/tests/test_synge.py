import numpy as np
import pytest

from curvprobe.models.chart import PresetName, PresetSpec
from curvprobe.models.coefficients import WorldFunctionSign
from curvprobe.models.curvature import CurvatureData
from curvprobe.services.presets import constant_curvature_riemann, preset_chart, preset_event
from curvprobe.services.synge import (DEFAULT_SCALES, _fit_order, determinant_scaling, expansion_sigma,
                                      expansion_vanvleck_and_detg, scaling_test)

P = (0.3, 0.5, -0.2, 0.4)
Q = (-0.2, 0.1, 0.6, -0.3)


def test_flat_expansion_is_the_interval():
    e = expansion_sigma(CurvatureData.zero(), [1.0, 0.0, 0.0, 0.0], [0.0, 2.0, 0.0, 0.0])
    assert e.sigma == pytest.approx(0.5 * (-1.0 + 4.0))
    np.testing.assert_allclose(e.grad_x, [-1.0, -2.0, 0.0, 0.0])
    np.testing.assert_allclose(e.grad_xprime, [1.0, 2.0, 0.0, 0.0])


def test_sign_flips_the_curvature_term(curvature_factory):
    c = curvature_factory(scale=0.1)
    flat = expansion_sigma(CurvatureData.zero(), P, Q).sigma
    minus = expansion_sigma(c, P, Q, WorldFunctionSign.MINUS).sigma
    plus = expansion_sigma(c, P, Q, WorldFunctionSign.PLUS).sigma
    assert plus - flat == pytest.approx(flat - minus)


@pytest.mark.parametrize("sign", list(WorldFunctionSign))
def test_gradients_match_finite_differences(curvature_factory, sign):
    c = curvature_factory()
    x, x_prime = np.array(P), np.array(Q)
    e = expansion_sigma(c, x, x_prime, sign)
    h = 1e-6
    for a in range(4):
        step = np.zeros(4)
        step[a] = h
        d_x = (expansion_sigma(c, x + step, x_prime, sign).sigma
               - expansion_sigma(c, x - step, x_prime, sign).sigma) / (2.0 * h)
        d_xprime = (expansion_sigma(c, x, x_prime + step, sign).sigma
                    - expansion_sigma(c, x, x_prime - step, sign).sigma) / (2.0 * h)
        assert e.grad_x[a] == pytest.approx(d_x, abs=1e-7)
        assert e.grad_xprime[a] == pytest.approx(d_xprime, abs=1e-7)


def test_determinant_expansion_constant_curvature():
    K = 0.04
    e = expansion_vanvleck_and_detg(CurvatureData(riemann=constant_curvature_riemann(K)), [0.0, 1.0, 0.0, 0.0])
    assert e.delta == pytest.approx(1.0 + 0.5 * K)
    assert e.sqrt_minus_g == pytest.approx(1.0 - 0.5 * K)


def test_flat_scaling_has_no_exponent():
    spec = PresetSpec(PresetName.MINKOWSKI)
    report = scaling_test(preset_chart(spec), preset_event(spec), (P, Q), scales=(1.0, 0.5, 0.25))
    assert report.fitted_exponent is None
    assert len(report.rows) == 3


def test_scales_must_decrease():
    spec = PresetSpec(PresetName.MINKOWSKI)
    with pytest.raises(ValueError):
        scaling_test(preset_chart(spec), preset_event(spec), (P, Q), scales=(0.5, 1.0))


def test_de_sitter_mismatch_is_sixth_order():
    spec = PresetSpec(PresetName.DE_SITTER, {"hubble": 0.5})
    report = scaling_test(preset_chart(spec), preset_event(spec), (P, Q), scales=(1.0, 0.5, 0.25))
    assert report.fitted_exponent >= 5.5
    assert report.rows[-1].rel_err < 1e-3


def test_plus_sign_leaves_a_fourth_order_mismatch():
    spec = PresetSpec(PresetName.DE_SITTER, {"hubble": 0.5})
    report = scaling_test(preset_chart(spec), preset_event(spec), (P, Q), scales=(1.0, 0.5, 0.25),
                          sign=WorldFunctionSign.PLUS)
    assert report.fitted_exponent == pytest.approx(4.0, abs=0.3)


@pytest.mark.slow
def test_schwarzschild_mismatch_order():
    spec = PresetSpec(PresetName.SCHWARZSCHILD, {"mass": 1.0, "radius": 4.0})
    report = scaling_test(preset_chart(spec), preset_event(spec), (P, Q), scales=(1.0, 0.5, 0.25))
    assert report.fitted_exponent >= 4.5


def test_determinant_orders():
    spec = PresetSpec(PresetName.DE_SITTER, {"hubble": 0.5})
    report = determinant_scaling(preset_chart(spec), preset_event(spec), (0.0, 0.6, 0.3, 0.0))
    assert report.product_order == pytest.approx(4.0, abs=1e-6)
    assert report.determinant_order >= 3.5


def test_fit_skips_points_at_the_floor():
    scales = np.array([1.0, 0.5, 0.25, 0.125])
    errors = 3e-6 * scales ** 6
    errors[-1] = 1e-15
    assert _fit_order(scales, errors, 1e-12) == pytest.approx(6.0)
    assert _fit_order(scales, errors, 1e-7) is None


def test_de_sitter_default_scales_fit_sixth_order():
    spec = PresetSpec(PresetName.DE_SITTER, {"hubble": 0.5})
    report = scaling_test(preset_chart(spec), preset_event(spec), (P, Q))
    assert len(report.rows) == len(DEFAULT_SCALES)
    assert report.fitted_exponent >= 5.5

import numpy as np
import pytest

from curvprobe.models.chart import PresetName, PresetSpec
from curvprobe.models.coefficients import LogScale, WorldFunctionSign
from curvprobe.models.curvature import CurvatureData
from curvprobe.models.smearing import GaussianSmearing
from curvprobe.services.presets import constant_curvature_riemann, preset_curvature, schwarzschild_riemann
from curvprobe.services.variance import (closed_form_coefficients, curvature_corrections, equal_width_correction,
                                         minkowski_variance, p_ln, p_ln_closed_form, riemann_trace_formula,
                                         variance_breakdown)

PI2 = np.pi ** 2
P_LN_EQUAL = np.log(2.0) + 1.0 - np.euler_gamma


def test_minkowski_variance_values():
    assert minkowski_variance(1.0, 1.0) == pytest.approx(1.0 / (16.0 * PI2), rel=1e-15)
    assert minkowski_variance(0.1, 0.1) == pytest.approx(0.63325739776461, rel=1e-12)


@pytest.mark.parametrize("T, sigma", [(0.0, 1.0), (1.0, -1.0)])
def test_minkowski_variance_rejects_bad_widths(T, sigma):
    with pytest.raises(ValueError):
        minkowski_variance(T, sigma)


def test_closed_form_coefficients_at_unit_widths():
    c = closed_form_coefficients(1.0, 1.0)
    assert c.L2[0, 0] == pytest.approx(1.0 / (8.0 * PI2))
    assert c.L2[2, 2] == pytest.approx(1.0 / (8.0 * PI2))
    assert c.A2[0, 0] == pytest.approx(1.0 / (32.0 * PI2))
    assert c.A2[1, 1] == pytest.approx(5.0 / (96.0 * PI2))
    assert c.B4[0, 1, 0, 1] == pytest.approx(1.0 / (96.0 * PI2))
    assert c.B4[1, 0, 0, 1] == pytest.approx(-3.0 / (96.0 * PI2))
    assert c.B4[0, 2, 2, 0] == pytest.approx(3.0 / (96.0 * PI2))
    assert c.B4[1, 2, 2, 1] == pytest.approx(-42.0 / (960.0 * PI2))
    assert c.B4[1, 2, 1, 2] == pytest.approx(-2.0 / (960.0 * PI2))
    assert c.B4[3, 3, 3, 3] == pytest.approx(-46.0 / (960.0 * PI2))
    assert c.B4[1, 1, 2, 2] == pytest.approx(-2.0 / (960.0 * PI2))
    assert c.B4[1, 0, 1, 0] == 0.0
    assert c.B4[0, 1, 0, 2] == 0.0
    assert c.p_ln is None


def test_ltilde_assembly():
    c = closed_form_coefficients(0.7, 1.3)
    assert c.Ltilde4[0, 1, 1, 0] == pytest.approx((c.B4[0, 1, 1, 0] + c.A2[1, 1]) / (8.0 * PI2))
    assert c.Ltilde4[0, 1, 0, 1] == pytest.approx(c.B4[0, 1, 0, 1] / (8.0 * PI2))


def test_p_ln_closed_form_at_equal_widths():
    assert p_ln_closed_form(1.0, 1.0, 1.0) == pytest.approx(P_LN_EQUAL, rel=1e-15)
    assert p_ln_closed_form(1.0, 1.0, 1.0, LogScale.HALF_L0_SQUARED) == pytest.approx(1.0 - np.euler_gamma)
    assert P_LN_EQUAL == pytest.approx(1.115932, abs=1e-6)


@pytest.mark.parametrize("T, sigma, l0", [(1.0, 1.0, 1.0), (0.5, 2.0, 1.0), (2.0, 0.5, 0.3), (1.0, 0.1, 3.0)])
def test_p_ln_quadrature_matches_closed_form(T, sigma, l0, quad):
    for scale in LogScale:
        assert p_ln(T, sigma, l0, quad, scale) == pytest.approx(p_ln_closed_form(T, sigma, l0, scale), abs=1e-8)


def test_p_ln_is_scale_invariant(quad):
    assert p_ln(0.3, 0.6, 0.9, quad) == pytest.approx(p_ln(1.0, 2.0, 3.0, quad), abs=1e-9)


def test_equal_width_reduction_on_random_tensors(curvature_factory):
    T = 0.8
    coefficients = closed_form_coefficients(T, T).with_p_ln(0.0)
    for _ in range(200):
        c = curvature_factory()
        corrections = curvature_corrections(c, T, T, 1.0, coefficients=coefficients)
        expected = equal_width_correction(c)
        scale = c.max_component * minkowski_variance(T, T)
        assert abs(corrections.ricci_term + corrections.riemann_term - expected) <= 1e-12 * max(abs(expected), scale)


def test_contraction_paths_agree_for_unequal_widths(curvature_factory):
    c = curvature_factory()
    corrections = curvature_corrections(c, 0.6, 1.7, 1.0, coefficients=closed_form_coefficients(0.6, 1.7).with_p_ln(0.0))
    assert corrections.riemann_term == pytest.approx(riemann_trace_formula(c, 0.6, 1.7), rel=1e-14)


def test_minus_sign_flips_the_riemann_term(curvature_factory):
    c = curvature_factory()
    coefficients = closed_form_coefficients(1.0, 1.5).with_p_ln(0.0)
    plus = curvature_corrections(c, 1.0, 1.5, 1.0, coefficients=coefficients)
    minus = curvature_corrections(c, 1.0, 1.5, 1.0, sign=WorldFunctionSign.MINUS, coefficients=coefficients)
    assert minus.riemann_term == pytest.approx(-plus.riemann_term)
    assert minus.ricci_term == plus.ricci_term


def test_de_sitter_breakdown(de_sitter, quad):
    K = 0.01
    s = GaussianSmearing(T=0.1, sigma=0.1, l0=0.1)
    b = variance_breakdown(preset_curvature(de_sitter), s, quad=quad)
    assert b.minkowski == pytest.approx(0.63325739776461, rel=1e-12)
    assert b.ricci_term == pytest.approx(-K / (16.0 * PI2), rel=1e-12)
    assert b.riemann_term == pytest.approx(-15.0 * K / (576.0 * PI2), rel=1e-12)
    assert b.ricci_term + b.riemann_term == pytest.approx(-51.0 * K / (576.0 * PI2), rel=1e-12)
    assert b.p_ln == pytest.approx(P_LN_EQUAL, abs=1e-9)
    assert b.log_term == pytest.approx(K * P_LN_EQUAL, rel=1e-8)
    assert b.total == pytest.approx(0.63325739776461 + K * P_LN_EQUAL - 51.0 * K / (576.0 * PI2), rel=1e-10)
    assert not b.validity_warning


def test_minkowski_breakdown_has_no_corrections(quad):
    s = GaussianSmearing(T=0.7, sigma=1.2)
    b = variance_breakdown(CurvatureData.zero(), s, quad=quad)
    assert b.curvature_correction == 0.0
    assert b.total == b.minkowski


@pytest.mark.parametrize("T, sigma", [(0.2, 0.3), (1.0, 1.0), (0.5, 2.0)])
def test_schwarzschild_corrections_vanish(T, sigma, quad):
    b = variance_breakdown(schwarzschild_riemann(1.0, 10.0), GaussianSmearing(T=T, sigma=sigma), quad=quad)
    assert abs(b.ricci_term) <= 1e-12
    assert abs(b.riemann_term) <= 1e-12
    assert abs(b.log_term) <= 1e-12
    assert b.total == pytest.approx(b.minkowski, abs=1e-12)


def test_p_ln_shifts_with_the_log_scale(quad):
    base = p_ln(0.8, 1.3, 1.0, quad)
    for factor in (0.25, 3.0, 10.0):
        assert p_ln(0.8, 1.3, factor, quad) == pytest.approx(base - 2.0 * np.log(factor), abs=1e-9)


def test_state_term_is_added(quad):
    s = GaussianSmearing(T=1.0, sigma=1.0)
    c = CurvatureData(riemann=constant_curvature_riemann(1e-4))
    base = variance_breakdown(c, s, quad=quad)
    shifted = variance_breakdown(c, s, state_term=2.5e-3, quad=quad)
    assert shifted.total - base.total == pytest.approx(2.5e-3, rel=1e-10)


def test_validity_warning_for_large_smearing(quad):
    spec = PresetSpec(PresetName.DE_SITTER, {"hubble": 1.0})
    b = variance_breakdown(preset_curvature(spec), GaussianSmearing(T=1.0, sigma=1.0), quad=quad)
    assert b.validity_warning
    assert b.diagnostics["ell_times_sqrt_curvature"] == pytest.approx(1.0)


def test_non_finite_state_term_is_rejected(quad):
    with pytest.raises(ValueError):
        variance_breakdown(CurvatureData.zero(), GaussianSmearing(T=1.0, sigma=1.0), state_term=float("inf"))

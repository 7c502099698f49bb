import itertools

import numpy as np
import pytest

from curvprobe.models.coefficients import LogScale
from curvprobe.models.quadrature import Method, QuadratureOptions
from curvprobe.models.smearing import GaussianSmearing
from curvprobe.services.oracles import (REFERENCE_P_LN, Kernel, Target, coefficient_oracle,
                                        coefficient_tensor_oracle, default_epsilons, listed_b_components, pln_oracle,
                                        position_space_mc, regulated_wightman_real, richardson_weights,
                                        validate_coefficients, validate_equal_width, validate_p_ln,
                                        variance_momentum_quadrature)
from curvprobe.services.variance import closed_form_coefficients, minkowski_variance, p_ln_closed_form

GRID = list(itertools.product((0.5, 1.0, 2.0), repeat=2))


@pytest.fixture
def monte_carlo():
    return QuadratureOptions(method=Method.MONTE_CARLO, samples=400000, chunk_size=100000, seed=42)


@pytest.mark.parametrize("T, sigma", GRID)
def test_momentum_space_variance(T, sigma, quad):
    value = variance_momentum_quadrature(GaussianSmearing(T=T, sigma=sigma), quad)
    assert value == pytest.approx(minkowski_variance(T, sigma), rel=1e-8)


@pytest.mark.parametrize("T, sigma", [(1.0, 1.0), (0.5, 2.0), (2.0, 0.5)])
def test_coefficient_tensors_match_closed_forms(T, sigma, quad):
    closed = closed_form_coefficients(T, sigma)
    for target, expected in ((Target.L2, closed.L2), (Target.A2, closed.A2)):
        oracle = coefficient_tensor_oracle(T, sigma, target, quad)
        np.testing.assert_allclose(oracle, expected, rtol=1e-6, atol=1e-8)

    B4 = coefficient_tensor_oracle(T, sigma, Target.B4, quad)
    odd = [index for index in itertools.product(range(4), repeat=4)
           if any(index.count(axis) % 2 for axis in (1, 2, 3))]
    covered = tuple(np.array(listed_b_components() + odd).T)
    np.testing.assert_allclose(B4[covered], closed.B4[covered], rtol=1e-6, atol=1e-8)
    assert B4[1, 1, 2, 2] == pytest.approx(-2.0 * sigma ** 6 / (120.0 * np.pi ** 2 * (T ** 2 + sigma ** 2) ** 3),
                                           rel=1e-6)


def test_coefficient_single_component(quad):
    assert coefficient_oracle(1.0, 1.0, Target.L2, (0, 0), quad) == pytest.approx(1.0 / (8.0 * np.pi ** 2), rel=1e-8)
    assert coefficient_oracle(1.0, 1.0, Target.B4, (0, 1, 0, 1), quad) == pytest.approx(
        1.0 / (96.0 * np.pi ** 2), rel=1e-6)


def test_coefficient_oracle_checks_indices(quad):
    with pytest.raises(IndexError):
        coefficient_oracle(1.0, 1.0, Target.A2, (0, 1, 2), quad)
    with pytest.raises(IndexError):
        coefficient_oracle(1.0, 1.0, Target.L2, (0, 4), quad)


@pytest.mark.parametrize("T, sigma", [(1.0, 1.0), (0.5, 2.0)])
def test_validation_report_passes(T, sigma, quad):
    rows = validate_coefficients(T, sigma, quad)
    failed = [row for row in rows if row.status == "fail"]
    assert not failed, failed[:5]
    assert any(row.check.startswith("B4[") for row in rows)


def test_unlisted_b_component_is_reported(quad):
    rows = validate_coefficients(1.0, 1.0, quad)
    unlisted = [row for row in rows if "unlisted" in row.check]
    assert len(unlisted) == 3
    for row in unlisted:
        assert row.status == "info"
        assert row.closed_form == pytest.approx(-1.0 / (96.0 * np.pi ** 2))
        assert row.rel_diff < 1e-6


def test_p_ln_monte_carlo_agrees(monte_carlo):
    estimate = pln_oracle(1.0, 1.0, 1.0, monte_carlo)
    assert estimate.samples == 400000
    assert abs(estimate.value - p_ln_closed_form(1.0, 1.0, 1.0)) < 4.0 * estimate.stderr


def test_p_ln_monte_carlo_half_scale(monte_carlo):
    estimate = pln_oracle(0.7, 1.1, 0.5, monte_carlo, LogScale.HALF_L0_SQUARED)
    expected = p_ln_closed_form(0.7, 1.1, 0.5, LogScale.HALF_L0_SQUARED)
    assert abs(estimate.value - expected) < 4.0 * estimate.stderr


def test_monte_carlo_is_reproducible_across_workers(monte_carlo):
    serial = pln_oracle(1.0, 1.0, 1.0, monte_carlo)
    threaded = pln_oracle(1.0, 1.0, 1.0, monte_carlo.replace(workers=3))
    assert serial.value == threaded.value
    assert serial.stderr == threaded.stderr


def test_p_ln_oracle_needs_monte_carlo(quad):
    with pytest.raises(ValueError):
        pln_oracle(1.0, 1.0, 1.0, quad)


def test_reference_constant_is_informational(quad):
    rows = validate_p_ln(1.0, 1.0, 1.0, quad)
    reference = [row for row in rows if "reference" in row.check]
    assert {row.status for row in reference} == {"info"}
    assert all(row.closed_form == REFERENCE_P_LN for row in reference)
    assert all(row.status == "pass" for row in rows if row.check.endswith("closed_form"))


def test_equal_width_validation_passes():
    assert validate_equal_width(0.9, count=100, seed=3).status == "pass"


def test_richardson_weights_remove_polynomial_terms():
    eps = np.array([0.4, 0.2, 0.1, 0.05])
    weights = richardson_weights(eps)
    assert weights.sum() == pytest.approx(1.0)
    values = 2.0 - 3.0 * eps + 0.5 * eps ** 2 + 7.0 * eps ** 3
    assert weights @ values == pytest.approx(2.0, rel=1e-12)


def test_default_epsilons_halve():
    eps = default_epsilons(GaussianSmearing(T=1.0, sigma=0.5))
    assert eps == pytest.approx((0.4, 0.2, 0.1, 0.05))


def test_regulated_wightman_spacelike_limit():
    # vanishing regulator on a spacelike pair gives 1 / (4 pi^2 r^2)
    value = regulated_wightman_real(np.array([0.0]), np.array([4.0]), 1e-9)
    assert value[0] == pytest.approx(1.0 / (16.0 * np.pi ** 2))


def test_position_space_needs_indices_for_monomial_kernel(monte_carlo):
    with pytest.raises(ValueError):
        position_space_mc(GaussianSmearing(T=1.0, sigma=1.0), Kernel.W0_TIMES_MONOMIALS, monte_carlo)


@pytest.mark.slow
def test_position_space_variance():
    q = QuadratureOptions(method=Method.MONTE_CARLO, samples=4000000, chunk_size=500000, seed=42, workers=2)
    estimate = position_space_mc(GaussianSmearing(T=1.0, sigma=1.0), Kernel.W0, q)
    expected = minkowski_variance(1.0, 1.0)
    assert abs(estimate.value - expected) < max(0.05 * expected, 4.0 * estimate.stderr)
    assert len(estimate.per_epsilon) == 4


@pytest.mark.slow
def test_position_space_second_moment():
    q = QuadratureOptions(method=Method.MONTE_CARLO, samples=4000000, chunk_size=500000, seed=42, workers=2)
    estimate = position_space_mc(GaussianSmearing(T=1.0, sigma=1.0), Kernel.W0_TIMES_MONOMIALS, q, indices=(0, 0))
    expected = closed_form_coefficients(1.0, 1.0).L2[0, 0]
    assert abs(estimate.value - expected) < max(0.05 * expected, 4.0 * estimate.stderr)

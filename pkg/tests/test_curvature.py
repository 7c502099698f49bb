import numpy as np
import pytest
from numpy.testing import assert_allclose

from curvprobe.models.base import ETA, MinkowskiMetric
from curvprobe.models.curvature import (BianchiViolation, CurvatureData, SymmetryViolation, bianchi_residual,
                                        build_curvature, curvature_sums, independent_components, kulkarni_nomizu,
                                        symmetrize_riemann)
from curvprobe.services.presets import constant_curvature_riemann, schwarzschild_riemann


def test_single_component_fills_all_images():
    c = build_curvature([((0, 1, 0, 1), -2.0e-3)])
    assert c.riemann[0, 1, 0, 1] == -2.0e-3
    assert c.riemann[1, 0, 1, 0] == -2.0e-3
    assert c.riemann[1, 0, 0, 1] == 2.0e-3
    assert c.riemann[0, 1, 1, 0] == 2.0e-3
    assert np.count_nonzero(c.riemann) == 4


def test_empty_component_list_is_flat():
    c = build_curvature([])
    assert c.is_flat()
    assert c.scalar == 0.0


def test_conflicting_images_raise():
    with pytest.raises(SymmetryViolation):
        build_curvature([((0, 1, 0, 1), 1.0), ((1, 0, 0, 1), 1.0)])


def test_consistent_images_are_accepted():
    c = build_curvature([((0, 1, 0, 1), 1.0), ((1, 0, 0, 1), -1.0)])
    assert c.riemann[0, 1, 0, 1] == 1.0


def test_repeated_antisymmetric_index_must_vanish():
    with pytest.raises(SymmetryViolation):
        build_curvature([((0, 0, 1, 2), 0.5)])


def test_bianchi_violation_is_detected():
    with pytest.raises(BianchiViolation):
        build_curvature([((0, 1, 2, 3), 1.0)])


def test_index_out_of_range():
    with pytest.raises(ValueError):
        build_curvature([((0, 1, 0, 4), 1.0)])


def test_constant_curvature_ricci_and_scalar():
    K = 0.01
    c = CurvatureData(riemann=constant_curvature_riemann(K))
    assert_allclose(c.ricci, 3.0 * K * ETA, atol=1e-15)
    assert c.scalar == pytest.approx(12.0 * K, rel=1e-14)
    assert c.riemann[0, 1, 0, 1] == pytest.approx(-K)
    assert c.riemann[1, 2, 1, 2] == pytest.approx(K)


def test_schwarzschild_is_ricci_flat():
    c = schwarzschild_riemann(1.0, 4.0)
    assert_allclose(c.ricci, np.zeros((4, 4)), atol=1e-15)
    assert c.riemann[0, 1, 0, 1] == pytest.approx(-2.0 / 64.0)
    assert c.riemann[2, 3, 2, 3] == pytest.approx(2.0 / 64.0)


def test_curvature_sums_for_constant_curvature():
    K = 0.25
    sums = curvature_sums(CurvatureData(riemann=constant_curvature_riemann(K)))
    assert sums.sum_0i0i == pytest.approx(-3.0 * K)
    assert sums.sum_ijij == pytest.approx(6.0 * K)
    assert sums.r00 == pytest.approx(-3.0 * K)
    assert sums.r_spatial_trace == pytest.approx(9.0 * K)


def test_random_curvature_has_all_symmetries(curvature_factory):
    for _ in range(20):
        r = curvature_factory().riemann
        scale = np.max(np.abs(r))
        assert np.max(np.abs(r + np.transpose(r, (1, 0, 2, 3)))) <= 1e-12 * scale
        assert np.max(np.abs(r + np.transpose(r, (0, 1, 3, 2)))) <= 1e-12 * scale
        assert np.max(np.abs(r - np.transpose(r, (2, 3, 0, 1)))) <= 1e-12 * scale
        assert np.max(np.abs(bianchi_residual(r))) <= 1e-12 * scale


def test_independent_components_rebuild_the_tensor(curvature_factory):
    c = curvature_factory()
    components = independent_components(c)
    assert len(components) == 21
    rebuilt = build_curvature(components)
    assert_allclose(rebuilt.riemann, c.riemann, atol=1e-14)


def test_kulkarni_nomizu_of_eta_is_twice_constant_curvature():
    assert_allclose(kulkarni_nomizu(ETA, ETA), 2.0 * constant_curvature_riemann(1.0))


def test_symmetrize_keeps_valid_tensors(curvature_factory):
    r = curvature_factory().riemann
    assert_allclose(symmetrize_riemann(r), r, atol=1e-13)


def test_symmetrize_projects_arbitrary_arrays(rng):
    projected = symmetrize_riemann(rng.normal(size=(4, 4, 4, 4)))
    assert_allclose(symmetrize_riemann(projected), projected, atol=1e-13)
    assert np.max(np.abs(bianchi_residual(projected))) < 1e-13


def test_curvature_data_is_read_only():
    c = CurvatureData.zero()
    with pytest.raises(ValueError):
        c.riemann[0, 1, 0, 1] = 1.0


def test_wrong_shape_is_rejected():
    with pytest.raises(ValueError):
        CurvatureData(riemann=np.zeros((3, 3, 3, 3)))


def test_lowering_then_raising_is_the_identity(rng):
    v = rng.normal(size=4)
    assert_allclose(MinkowskiMetric.raise_index(MinkowskiMetric.lower(v)), v)
    assert MinkowskiMetric.dot(v, v) == pytest.approx(-v[0] ** 2 + v[1:] @ v[1:])

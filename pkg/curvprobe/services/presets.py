"""
Analytic spacetimes: curvature at an event and full metric charts.
"""
import logging
from typing import Callable, Optional

import numpy as np

from curvprobe.models.base import ETA, FRAME_TOLERANCE
from curvprobe.models.chart import DomainError, MetricChart, PresetName, PresetSpec
from curvprobe.models.curvature import (CurvatureData, build_curvature, kulkarni_nomizu,
                                        symmetrize_riemann)

logger = logging.getLogger(__name__)


def constant_curvature_riemann(K: float) -> np.ndarray:
    """R_abcd = K (eta_ac eta_bd - eta_ad eta_bc)"""
    return 0.5 * K * kulkarni_nomizu(ETA, ETA)


def schwarzschild_riemann(mass: float, radius: float) -> CurvatureData:
    tidal = mass / radius ** 3
    return build_curvature([
        ((0, 1, 0, 1), -2.0 * tidal),
        ((0, 2, 0, 2), tidal),
        ((0, 3, 0, 3), tidal),
        ((1, 2, 1, 2), -tidal),
        ((1, 3, 1, 3), -tidal),
        ((2, 3, 2, 3), 2.0 * tidal),
    ])


def preset_curvature(spec: PresetSpec) -> CurvatureData:
    if spec.name is PresetName.MINKOWSKI:
        return CurvatureData.zero()
    if spec.name is PresetName.SCHWARZSCHILD:
        return schwarzschild_riemann(spec.params["mass"], spec.params["radius"])
    return CurvatureData(riemann=constant_curvature_riemann(spec.sectional_curvature))


def preset_event(spec: PresetSpec) -> np.ndarray:
    """Chart coordinates of the event the preset curvature refers to"""
    if spec.name is PresetName.SCHWARZSCHILD:
        return np.array([0.0, spec.params["radius"], 0.5 * np.pi, 0.0])
    return np.zeros(4)


def minkowski_chart() -> MetricChart:
    return MetricChart(
        name="minkowski",
        metric_fn=lambda x: ETA.copy(),
        christoffel_fn=lambda x: np.zeros((4, 4, 4)),
        domain_fn=lambda x: True,
    )


def static_constant_curvature_chart(K: float, name: str = "constant_curvature") -> MetricChart:
    """
    Static chart ds^2 = -f dt^2 + (delta_ij + K x_i x_j / f) dx^i dx^j with f = 1 - K |x|^2.

    For K = H^2 this is the de Sitter static patch, valid for H|x| < 1.
    """

    def lapse(x):
        spatial = x[1:]
        return 1.0 - K * float(spatial @ spatial), spatial

    def metric_fn(x):
        f, spatial = lapse(x)
        g = np.zeros((4, 4))
        g[0, 0] = -f
        g[1:, 1:] = np.eye(3) + K * np.outer(spatial, spatial) / f
        return g

    def christoffel_fn(x):
        f, spatial = lapse(x)
        gamma = np.zeros((4, 4, 4))
        gamma[0, 0, 1:] = -K * spatial / f
        gamma[0, 1:, 0] = gamma[0, 0, 1:]
        gamma[1:, 0, 0] = -K * f * spatial
        spatial_metric = np.eye(3) + K * np.outer(spatial, spatial) / f
        gamma[1:, 1:, 1:] = K * np.einsum("i,jk->ijk", spatial, spatial_metric)
        return gamma

    def domain_fn(x):
        f, _ = lapse(x)
        return f > 0.0

    return MetricChart(name=name, metric_fn=metric_fn, christoffel_fn=christoffel_fn, domain_fn=domain_fn)


def schwarzschild_chart(mass: float) -> MetricChart:
    """Schwarzschild coordinates (t, r, theta, phi), exterior region"""

    def metric_fn(x):
        _, r, theta, _ = x
        f = 1.0 - 2.0 * mass / r
        return np.diag([-f, 1.0 / f, r ** 2, (r * np.sin(theta)) ** 2])

    def christoffel_fn(x):
        _, r, theta, _ = x
        shifted = r - 2.0 * mass
        sin, cos = np.sin(theta), np.cos(theta)
        gamma = np.zeros((4, 4, 4))
        gamma[0, 0, 1] = gamma[0, 1, 0] = mass / (r * shifted)
        gamma[1, 0, 0] = mass * shifted / r ** 3
        gamma[1, 1, 1] = -mass / (r * shifted)
        gamma[1, 2, 2] = -shifted
        gamma[1, 3, 3] = -shifted * sin ** 2
        gamma[2, 1, 2] = gamma[2, 2, 1] = 1.0 / r
        gamma[2, 3, 3] = -sin * cos
        gamma[3, 1, 3] = gamma[3, 3, 1] = 1.0 / r
        gamma[3, 2, 3] = gamma[3, 3, 2] = cos / sin
        return gamma

    def domain_fn(x):
        return x[1] > 2.0 * mass and 0.0 < x[2] < np.pi

    return MetricChart(name="schwarzschild", metric_fn=metric_fn, christoffel_fn=christoffel_fn,
                       domain_fn=domain_fn)


def preset_chart(spec: PresetSpec) -> MetricChart:
    if spec.name is PresetName.MINKOWSKI:
        return minkowski_chart()
    if spec.name is PresetName.SCHWARZSCHILD:
        return schwarzschild_chart(spec.params["mass"])
    return static_constant_curvature_chart(spec.sectional_curvature, name=spec.name.value)


def orthonormal_frame(g: np.ndarray) -> np.ndarray:
    """
    Coordinate-aligned Gram-Schmidt frame with the time leg along the first coordinate.

    :param g: metric components at the event
    :return: array E with E[a] the chart components of e_a, so that E g E^T = eta
    """
    g = np.asarray(g, dtype=float)
    frame = np.zeros((4, 4))
    for a in range(4):
        v = np.eye(4)[a]
        for b in range(a):
            v = v - ETA[b, b] * (v @ g @ frame[b]) * frame[b]
        norm = float(v @ g @ v)
        if norm * ETA[a, a] <= 0.0:
            raise DomainError(f"Coordinate direction {a} has the wrong causal character (norm {norm!r})")
        frame[a] = v / np.sqrt(abs(norm))

    deviation = float(np.max(np.abs(frame @ g @ frame.T - ETA)))
    if deviation > FRAME_TOLERANCE:
        raise DomainError(f"Frame is not orthonormal, deviation {deviation!r}")
    return frame


def christoffel_from_metric(metric_fn: Callable[[np.ndarray], np.ndarray], x, h: float = 1e-5) -> np.ndarray:
    """Christoffel symbols from central differences of the metric"""
    x = np.asarray(x, dtype=float)
    dg = np.zeros((4, 4, 4))
    for e in range(4):
        step = np.zeros(4)
        step[e] = h
        dg[e] = (metric_fn(x + step) - metric_fn(x - step)) / (2.0 * h)
    inverse = np.linalg.inv(metric_fn(x))
    # dg[e, d, c] = d_e g_dc
    lowered = 0.5 * (np.einsum("bdc->dbc", dg) + np.einsum("cdb->dbc", dg) - dg)
    return np.einsum("ad,dbc->abc", inverse, lowered)


def riemann_from_christoffel(christoffel_fn: Callable[[np.ndarray], np.ndarray], x, h: float) -> np.ndarray:
    """R^a_bcd = d_c G^a_bd - d_d G^a_bc + G^a_ce G^e_bd - G^a_de G^e_bc by central differences"""
    x = np.asarray(x, dtype=float)
    d_gamma = np.zeros((4, 4, 4, 4))
    for e in range(4):
        step = np.zeros(4)
        step[e] = h
        d_gamma[e] = (christoffel_fn(x + step) - christoffel_fn(x - step)) / (2.0 * h)
    gamma = christoffel_fn(x)
    return (np.einsum("cabd->abcd", d_gamma) - np.einsum("dabc->abcd", d_gamma)
            + np.einsum("ace,ebd->abcd", gamma, gamma) - np.einsum("ade,ebc->abcd", gamma, gamma))


def curvature_from_chart(chart: MetricChart, z, h: Optional[float] = None,
                         frame: Optional[np.ndarray] = None) -> CurvatureData:
    """
    Frame components of the Riemann tensor at z computed from the chart alone.

    :param chart: metric chart
    :param z: event in chart coordinates
    :param h: finite-difference step, defaults to 1e-4 times the coordinate scale of z
    :param frame: orthonormal frame at z, defaults to the Gram-Schmidt frame
    :return: CurvatureData projected onto the algebraic curvature tensors
    """
    z = np.asarray(z, dtype=float)
    if h is None:
        h = 1e-4 * max(1.0, float(np.max(np.abs(z))))
    g = chart.metric(z)
    if frame is None:
        frame = orthonormal_frame(g)
    mixed = riemann_from_christoffel(chart.christoffel, z, h)
    lowered = np.einsum("ae,ebcd->abcd", g, mixed)
    projected = np.einsum("abcd,ia,jb,kc,ld->ijkl", lowered, frame, frame, frame, frame)
    symmetric = symmetrize_riemann(projected)
    logger.debug("Chart curvature at %r: symmetrization moved components by %r",
                 z.tolist(), float(np.max(np.abs(symmetric - projected))))
    return CurvatureData(riemann=symmetric)


def sqrt_minus_g(chart: MetricChart, x) -> float:
    det = float(np.linalg.det(chart.metric(x)))
    if det >= 0.0:
        raise DomainError(f"Metric determinant {det!r} is not negative at {np.asarray(x).tolist()!r}")
    return float(np.sqrt(-det))

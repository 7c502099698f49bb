"""
Curvature expansions of the world function, the Van Vleck determinant and the metric determinant
in Riemann normal coordinates, and their scaling checks against solved geodesics.
"""
import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from curvprobe.models.base import MinkowskiMetric
from curvprobe.models.chart import MetricChart
from curvprobe.models.coefficients import WorldFunctionSign
from curvprobe.models.curvature import CurvatureData
from curvprobe.services.geodesics import DEFAULT_TOLERANCE, rnc_chart, world_function_numeric
from curvprobe.services.presets import curvature_from_chart

logger = logging.getLogger(__name__)

DEFAULT_SCALES = (1.0, 0.5, 0.25, 0.125, 0.0625)


@dataclass(frozen=True)
class SigmaExpansion:
    sigma: float
    grad_x: np.ndarray
    grad_xprime: np.ndarray


@dataclass(frozen=True)
class DeterminantExpansion:
    delta: float
    sqrt_minus_g: float


@dataclass(frozen=True)
class ScalingRow:
    scale: float
    numeric: float
    expansion: float
    abs_err: float
    rel_err: float


@dataclass(frozen=True)
class ScalingReport:
    rows: Tuple[ScalingRow, ...]
    fitted_exponent: Optional[float]
    residuals: Tuple[float, ...]


@dataclass(frozen=True)
class DeterminantRow:
    scale: float
    product_deviation: float
    sqrt_minus_g_numeric: float
    sqrt_minus_g_expansion: float
    abs_err: float


@dataclass(frozen=True)
class DeterminantReport:
    rows: Tuple[DeterminantRow, ...]
    product_order: Optional[float]
    determinant_order: Optional[float]


def expansion_sigma(c: CurvatureData, x, x_prime,
                    sign: WorldFunctionSign = WorldFunctionSign.MINUS) -> SigmaExpansion:
    """
    World function between two RNC points to first order in the curvature at the origin.

        sigma = 1/2 eta_ab (x-x')^a (x-x')^b -/+ 1/6 R_acbd x^a x^b x'^c x'^d

    :param sign: MINUS matches solved geodesics under the fixed Riemann convention
    :return: sigma with its gradients in x and in x' (lower indices)
    """
    x = np.asarray(x, dtype=float)
    x_prime = np.asarray(x_prime, dtype=float)
    coefficient = WorldFunctionSign(sign).factor / 6.0
    separation = MinkowskiMetric.lower(x - x_prime)
    r = c.riemann
    sigma = 0.5 * MinkowskiMetric.dot(x - x_prime, x - x_prime) + coefficient * float(
        np.einsum("acbd,a,b,c,d->", r, x, x, x_prime, x_prime))
    grad_x = separation + 2.0 * coefficient * np.einsum("acbd,b,c,d->a", r, x, x_prime, x_prime)
    grad_xprime = -separation + 2.0 * coefficient * np.einsum("bacd,b,c,d->a", r, x, x, x_prime)
    return SigmaExpansion(sigma=sigma, grad_x=grad_x, grad_xprime=grad_xprime)


def expansion_vanvleck_and_detg(c: CurvatureData, separation) -> DeterminantExpansion:
    """Delta = 1 + R_ab s^a s^b / 6 and sqrt(-g) = 1 - R_ab s^a s^b / 6 for an RNC separation s"""
    separation = np.asarray(separation, dtype=float)
    quadratic = float(separation @ c.ricci @ separation) / 6.0
    return DeterminantExpansion(delta=1.0 + quadratic, sqrt_minus_g=1.0 - quadratic)


def _fit_order(scales: Sequence[float], errors: Sequence[float], floor: float) -> Optional[float]:
    """Log-log slope of the errors above the floor, None when fewer than two such points remain"""
    scales = np.asarray(scales, dtype=float)
    errors = np.asarray(errors, dtype=float)
    above = errors > floor
    if np.count_nonzero(above) < 2:
        return None
    if not above.all():
        logger.debug("Fitting %d of %d points, the rest sit at or below %r", np.count_nonzero(above), len(errors),
                     floor)
    slope, _ = np.polyfit(np.log(scales[above]), np.log(errors[above]), 1)
    return float(slope)


def _check_scales(scales: Sequence[float]):
    if len(scales) < 2 or any(b >= a for a, b in zip(scales, scales[1:])) or scales[-1] <= 0.0:
        raise ValueError(f"scales must be positive and strictly decreasing, got {list(scales)!r}")


def scaling_test(chart: MetricChart, z, direction_pair: Tuple[Sequence[float], Sequence[float]],
                 scales: Sequence[float] = DEFAULT_SCALES, tol: float = DEFAULT_TOLERANCE,
                 curvature: Optional[CurvatureData] = None,
                 sign: WorldFunctionSign = WorldFunctionSign.MINUS) -> ScalingReport:
    """
    Compare the solved world function with its expansion for RNC pairs s*p, s*q and fit the order of the
    mismatch in s over the scales whose mismatch clears the solver floor. The exponent is None when fewer
    than two do.

    :param curvature: curvature in the Gram-Schmidt frame at z, computed from the chart when omitted
    """
    _check_scales(scales)
    rnc = rnc_chart(chart, z, tol)
    c = curvature if curvature is not None else curvature_from_chart(chart, z, frame=rnc.frame)
    p, q = (np.asarray(d, dtype=float) for d in direction_pair)

    rows: List[ScalingRow] = []
    for s in scales:
        numeric = world_function_numeric(chart, rnc.forward(s * p), rnc.forward(s * q), tol)
        expansion = expansion_sigma(c, s * p, s * q, sign).sigma
        error = abs(numeric - expansion)
        rows.append(ScalingRow(scale=float(s), numeric=numeric, expansion=expansion, abs_err=error,
                               rel_err=error / abs(numeric) if numeric else error))
        logger.debug("Scale %r: numeric sigma %r, expansion %r", s, numeric, expansion)

    floor = 10.0 * tol * max(abs(r.numeric) for r in rows)
    exponent = _fit_order(scales, [r.abs_err for r in rows], floor)
    logger.info("Scaling test on %s at %r: exponent %r", chart.name, np.asarray(z).tolist(), exponent)
    return ScalingReport(rows=tuple(rows), fitted_exponent=exponent, residuals=tuple(r.abs_err for r in rows))


def determinant_scaling(chart: MetricChart, z, direction: Sequence[float],
                        scales: Sequence[float] = DEFAULT_SCALES[:4], tol: float = DEFAULT_TOLERANCE,
                        curvature: Optional[CurvatureData] = None) -> DeterminantReport:
    """
    Orders in s of Delta * sqrt(-g) - 1 and of the mismatch between the expanded sqrt(-g) and the
    determinant of the metric pulled back through the RNC map (Jacobian step s * 1e-3).
    """
    _check_scales(scales)
    rnc = rnc_chart(chart, z, tol)
    c = curvature if curvature is not None else curvature_from_chart(chart, z, frame=rnc.frame)
    d = np.asarray(direction, dtype=float)

    rows: List[DeterminantRow] = []
    for s in scales:
        expansion = expansion_vanvleck_and_detg(c, s * d)
        numeric = rnc.sqrt_minus_g(s * d, h=1e-3 * s)
        rows.append(DeterminantRow(
            scale=float(s),
            product_deviation=abs(expansion.delta * expansion.sqrt_minus_g - 1.0),
            sqrt_minus_g_numeric=numeric,
            sqrt_minus_g_expansion=expansion.sqrt_minus_g,
            abs_err=abs(numeric - expansion.sqrt_minus_g),
        ))

    product_order = _fit_order(scales, [r.product_deviation for r in rows], 0.0)
    determinant_order = _fit_order(scales, [r.abs_err for r in rows], 0.0)
    logger.info("Determinant scaling on %s: product order %r, determinant order %r",
                chart.name, product_order, determinant_order)
    return DeterminantReport(rows=tuple(rows), product_order=product_order, determinant_order=determinant_order)

"""
Closed-form smeared variance of a massless field and its leading curvature corrections.
"""
import logging
from typing import Optional

import numpy as np
from scipy import special

from curvprobe.models.base import ComputeError
from curvprobe.models.coefficients import (CoefficientSet, CurvatureCorrections, LogScale, VarianceBreakdown,
                                           WorldFunctionSign)
from curvprobe.models.curvature import CurvatureData, curvature_sums
from curvprobe.models.quadrature import QuadratureOptions
from curvprobe.models.smearing import GaussianSmearing
from curvprobe.services.integration import adaptive_quad

logger = logging.getLogger(__name__)

VALIDITY_THRESHOLD = 0.1
CONTRACTION_TOLERANCE = 1e-12


class ContractionMismatch(ComputeError):
    pass


def _positive(**lengths):
    for name, value in lengths.items():
        if not (np.isfinite(value) and value > 0.0):
            raise ValueError(f"{name} must be positive and finite, got {value!r}")


def minkowski_variance(T: float, sigma: float) -> float:
    """<phi(Lambda)^2> in the Minkowski vacuum: 1 / (8 pi^2 (sigma^2 + T^2))"""
    _positive(T=T, sigma=sigma)
    return 1.0 / (8.0 * np.pi ** 2 * (sigma ** 2 + T ** 2))


def closed_form_coefficients(T: float, sigma: float) -> CoefficientSet:
    """
    Closed forms of L^ab, A^bc, B^abcd and Ltilde^abcd for the Gaussian smearing.

    B^abcd is filled for the families 0i0j, i00j, 0ij0 and ijkl; every other component is zero.
    The ijkl block carries a delta^ij delta^kl term that drops out of every Riemann contraction.

    :param T: temporal width
    :param sigma: spatial width
    :return: CoefficientSet with p_ln unset
    """
    _positive(T=T, sigma=sigma)
    pi2 = np.pi ** 2
    t2, s2 = T ** 2, sigma ** 2
    width_sum = t2 + s2
    delta = np.eye(3)

    L2 = np.diag([t2, s2, s2, s2]) / (4.0 * pi2 * width_sum)
    A2 = np.diag([t2 * s2 / 8.0,
                  *([(3.0 * t2 * s2 + 2.0 * s2 ** 2) / 24.0] * 3)]) / (pi2 * width_sum ** 2)

    cube = 12.0 * pi2 * width_sum ** 3
    B4 = np.zeros((4, 4, 4, 4))
    B4[0, 1:, 0, 1:] = delta * t2 * s2 ** 2 / cube
    B4[1:, 0, 0, 1:] = -delta * t2 * s2 * (2.0 * t2 + s2) / cube
    B4[0, 1:, 1:, 0] = delta * s2 ** 2 * (2.0 * t2 + s2) / cube
    B4[1:, 1:, 1:, 1:] = -s2 * (
        np.einsum("il,jk->ijkl", delta, delta) * (15.0 * t2 ** 2 + 20.0 * t2 * s2 + 7.0 * s2 ** 2)
        + 2.0 * s2 ** 2 * np.einsum("ik,jl->ijkl", delta, delta)
        + 2.0 * s2 ** 2 * np.einsum("ij,kl->ijkl", delta, delta)
    ) / (120.0 * pi2 * width_sum ** 3)

    Ltilde4 = (B4 + np.einsum("ad,bc->abcd", np.eye(4), A2)) / (8.0 * pi2)
    return CoefficientSet(T=T, sigma=sigma, L2=L2, A2=A2, B4=B4, Ltilde4=Ltilde4)


def _angular_log_average(T: float, sigma: float, q: QuadratureOptions) -> float:
    """(4/pi) int_0^(pi/2) cos^2(phi) ln|sigma^2 cos^2(phi) - T^2 sin^2(phi)| dphi"""

    def integrand(phi):
        cos2, sin2 = np.cos(phi) ** 2, np.sin(phi) ** 2
        argument = abs(sigma ** 2 * cos2 - T ** 2 * sin2)
        return cos2 * np.log(argument) if argument > 0.0 else 0.0

    cone = float(np.arctan2(sigma, T))
    scale = max(1.0, abs(np.log(T ** 2 + sigma ** 2)))
    inner = adaptive_quad(integrand, 0.0, cone, q, scale=scale, label="p_ln angular (timelike side)")
    outer = adaptive_quad(integrand, cone, 0.5 * np.pi, q, scale=scale, label="p_ln angular (spacelike side)")
    return 4.0 / np.pi * (inner + outer)


def _log_shift(l0: float, log_scale: LogScale) -> float:
    shift = 2.0 * np.log(l0)
    if LogScale(log_scale) is LogScale.HALF_L0_SQUARED:
        shift += np.log(2.0)
    return shift


def p_ln(T: float, sigma: float, l0: float, quad: Optional[QuadratureOptions] = None,
         log_scale: LogScale = LogScale.L0_SQUARED) -> float:
    """
    Gaussian average of ln|(x - x')^2 / l0^2| over independent x, x' drawn from Lambda.

    The separation is a 4D Gaussian. Its radial part averages to ln 2 + digamma(2) analytically and the
    angle between the time axis and space is integrated adaptively, split at the light cone.
    """
    _positive(T=T, sigma=sigma, l0=l0)
    q = quad or QuadratureOptions()
    radial = np.log(2.0) + float(special.digamma(2.0))
    value = np.log(2.0) + radial + _angular_log_average(T, sigma, q) - _log_shift(l0, log_scale)
    logger.debug("p_ln(T=%r, sigma=%r, l0=%r, %s) = %r", T, sigma, l0, LogScale(log_scale).value, value)
    return float(value)


def p_ln_closed_form(T: float, sigma: float, l0: float, log_scale: LogScale = LogScale.L0_SQUARED) -> float:
    """ln((T^2 + sigma^2)/l0^2) + 1 - gamma + (sigma^2 - T^2)/(sigma^2 + T^2)"""
    _positive(T=T, sigma=sigma, l0=l0)
    width_sum = T ** 2 + sigma ** 2
    return float(np.log(width_sum) + 1.0 - np.euler_gamma + (sigma ** 2 - T ** 2) / width_sum
                 - _log_shift(l0, log_scale))


def riemann_trace_formula(c: CurvatureData, T: float, sigma: float) -> float:
    """Riemann correction with the -4 pi^2/3 coefficient, written through curvature traces"""
    sums = curvature_sums(c)
    t2, s2 = T ** 2, sigma ** 2
    width_sum = t2 + s2
    pi2 = np.pi ** 2
    return (s2 * (t2 ** 2 + 4.0 * t2 * s2 + 2.0 * s2 ** 2) / (72.0 * pi2 * width_sum ** 3) * sums.sum_0i0i
            + s2 ** 2 / (144.0 * pi2 * width_sum ** 2) * sums.sum_ijij)


def equal_width_correction(c: CurvatureData) -> float:
    """Ricci plus Riemann correction at T = sigma: -(5R + 3R_00) / (576 pi^2)"""
    return -(5.0 * c.scalar + 3.0 * c.ricci[0, 0]) / (576.0 * np.pi ** 2)


def curvature_corrections(c: CurvatureData, T: float, sigma: float, l0: float,
                          quad: Optional[QuadratureOptions] = None,
                          log_scale: LogScale = LogScale.L0_SQUARED,
                          sign: WorldFunctionSign = WorldFunctionSign.PLUS,
                          coefficients: Optional[CoefficientSet] = None) -> CurvatureCorrections:
    """
    Ricci, Riemann and logarithmic corrections to the smeared variance.

    The Riemann term is contracted twice, once through the assembled Ltilde tensor and once through
    the trace formula, and both must agree.

    :param sign: sign of the quartic world-function term, PLUS gives -(4 pi^2/3) R.Ltilde
    :raises ContractionMismatch: the two Riemann contractions disagree beyond 1e-12 relative
    """
    _positive(T=T, sigma=sigma, l0=l0)
    coefficients = coefficients or closed_form_coefficients(T, sigma)
    factor = WorldFunctionSign(sign).factor

    ricci_term = -float(np.einsum("ab,ab->", c.ricci, coefficients.L2)) / 12.0
    contracted = -factor * 4.0 * np.pi ** 2 / 3.0 * float(np.einsum("abcd,abcd->", c.riemann, coefficients.Ltilde4))
    traced = factor * riemann_trace_formula(c, T, sigma)
    scale = c.max_component * minkowski_variance(T, sigma)
    if abs(contracted - traced) > CONTRACTION_TOLERANCE * max(abs(contracted), abs(traced), scale):
        logger.error("Riemann contraction %r disagrees with trace formula %r", contracted, traced)
        raise ContractionMismatch(f"Riemann contraction {contracted!r} differs from trace formula {traced!r}")

    p_value = coefficients.p_ln
    if p_value is None:
        p_value = p_ln(T, sigma, l0, quad, log_scale)
    log_term = c.scalar * p_value / 12.0
    return CurvatureCorrections(ricci_term=ricci_term, riemann_term=traced, log_term=float(log_term),
                                p_ln=float(p_value))


def variance_breakdown(c: CurvatureData, s: GaussianSmearing, state_term: float = 0.0,
                       quad: Optional[QuadratureOptions] = None,
                       log_scale: LogScale = LogScale.L0_SQUARED,
                       sign: WorldFunctionSign = WorldFunctionSign.PLUS) -> VarianceBreakdown:
    """
    Assemble <phi(Lambda)^2> = Minkowski + Ricci + Riemann + log + state terms.

    :param state_term: constant state-dependent contribution, zero for the local vacuum-like state
    """
    if not np.isfinite(state_term):
        raise ValueError(f"state_term must be finite, got {state_term!r}")
    minkowski = minkowski_variance(s.T, s.sigma)
    corrections = curvature_corrections(c, s.T, s.sigma, s.l0, quad, log_scale, sign)
    total = minkowski + corrections.ricci_term + corrections.riemann_term + corrections.log_term + state_term

    ell_curvature = s.size * float(np.sqrt(c.max_component))
    warning = ell_curvature > VALIDITY_THRESHOLD
    if warning:
        logger.warning("Smearing size times sqrt(curvature) is %r, above %r: expansion may be unreliable",
                       ell_curvature, VALIDITY_THRESHOLD)
    logger.info("Variance breakdown: minkowski %r, corrections %r, total %r",
                minkowski, corrections.ricci_term + corrections.riemann_term + corrections.log_term, total)
    return VarianceBreakdown(
        minkowski=minkowski,
        ricci_term=corrections.ricci_term,
        riemann_term=corrections.riemann_term,
        log_term=corrections.log_term,
        state_term=float(state_term),
        total=float(total),
        p_ln=corrections.p_ln,
        log_scale=LogScale(log_scale),
        sign=WorldFunctionSign(sign),
        diagnostics={"ell_times_sqrt_curvature": ell_curvature},
        validity_warning=warning,
    )

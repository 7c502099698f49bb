"""
Unruh-DeWitt detector maps: the gapless bit-flip channel driven by the smeared variance and the
leading-order excitation probability of a gapped static detector in the Minkowski vacuum.
"""
import logging
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from curvprobe.models.base import ComputeError
from curvprobe.models.coefficients import LogScale, VarianceBreakdown, WorldFunctionSign
from curvprobe.models.curvature import CurvatureData
from curvprobe.models.quadrature import QuadratureOptions
from curvprobe.models.qubit import MONOPOLE, QubitState
from curvprobe.models.smearing import GaussianSmearing
from curvprobe.services.integration import adaptive_quad, momentum_measure, radial_cutoff
from curvprobe.services.variance import minkowski_variance, variance_breakdown

logger = logging.getLogger(__name__)


class NegativeVariance(ComputeError):
    pass


@dataclass(frozen=True)
class ChannelStrength:
    """
    *xi               lambda^2 <phi(Lambda)^2>, dimensionless and nonnegative
    *variance_source  the breakdown or the raw variance xi was built from
    """

    xi: float
    lambda_coupling: float
    variance_source: Union[VarianceBreakdown, float]

    def __post_init__(self):
        if not (np.isfinite(self.xi) and self.xi >= 0.0):
            raise ValueError(f"xi must be finite and nonnegative, got {self.xi!r}")


@dataclass(frozen=True)
class CorrectedState:
    final: QubitState
    breakdown: VarianceBreakdown
    strength: ChannelStrength


def bit_flip_probability(xi: float) -> float:
    """(1 - exp(-2 xi)) / 2"""
    return float(-0.5 * np.expm1(-2.0 * xi))


def gapless_channel(xi: float, rho0: QubitState) -> QubitState:
    """
    Final state of a gapless detector switched by Lambda:

        rho = exp(-xi) cosh(xi) rho0 + exp(-xi) sinh(xi) mu rho0 mu,    mu = sigma+ + sigma-

    :raises InvalidState: rho0 is not a density matrix
    """
    if not (np.isfinite(xi) and xi >= 0.0):
        raise ValueError(f"xi must be finite and nonnegative, got {xi!r}")
    rho0.validate()
    flip = bit_flip_probability(xi)
    m = rho0.matrix
    return QubitState((1.0 - flip) * m + flip * (MONOPOLE @ m @ MONOPOLE))


def excitation_probability(rho: QubitState) -> float:
    return rho.excited_population


def xi_from_variance(lambda_coupling: float, v: Union[VarianceBreakdown, float]) -> ChannelStrength:
    """
    :param v: breakdown, or a raw variance value
    :raises NegativeVariance: the corrected variance is below zero
    """
    if not np.isfinite(lambda_coupling):
        raise ValueError(f"lambda_coupling must be finite, got {lambda_coupling!r}")
    total = v.total if isinstance(v, VarianceBreakdown) else float(v)
    if total < 0.0:
        raise NegativeVariance(
            f"Smeared variance {total!r} is negative: curvature corrections exceed the flat value"
        )
    return ChannelStrength(xi=lambda_coupling ** 2 * total, lambda_coupling=lambda_coupling, variance_source=v)


def curvature_corrected_state(lambda_coupling: float, s: GaussianSmearing, c: CurvatureData,
                              state_term: float, rho0: QubitState,
                              quad: Optional[QuadratureOptions] = None,
                              log_scale: LogScale = LogScale.L0_SQUARED,
                              sign: WorldFunctionSign = WorldFunctionSign.PLUS) -> CorrectedState:
    """Detector state after the gapless interaction, driven by the curvature-corrected variance"""
    breakdown = variance_breakdown(c, s, state_term, quad, log_scale, sign)
    strength = xi_from_variance(lambda_coupling, breakdown)
    final = gapless_channel(strength.xi, rho0)
    logger.info("Gapless channel with xi=%r: excited population %r", strength.xi, final.excited_population)
    return CorrectedState(final=final, breakdown=breakdown, strength=strength)


def linearized_corrected_state(lambda_coupling: float, s: GaussianSmearing, c: CurvatureData,
                               state_term: float, rho0: QubitState,
                               quad: Optional[QuadratureOptions] = None,
                               log_scale: LogScale = LogScale.L0_SQUARED,
                               sign: WorldFunctionSign = WorldFunctionSign.PLUS) -> QubitState:
    """
    First-order expansion of the corrected state about the flat result:

        rho(xi0) + lambda^2 delta exp(-2 xi0) (mu rho0 mu - rho0)

    with xi0 = lambda^2 * minkowski and delta the sum of the correction terms.
    """
    breakdown = variance_breakdown(c, s, state_term, quad, log_scale, sign)
    xi0 = lambda_coupling ** 2 * minkowski_variance(s.T, s.sigma)
    delta = breakdown.curvature_correction + breakdown.state_term
    flat = gapless_channel(xi0, rho0).matrix
    m = rho0.matrix
    correction = lambda_coupling ** 2 * delta * np.exp(-2.0 * xi0) * (MONOPOLE @ m @ MONOPOLE - m)
    return QubitState(flat + correction)


def gapped_probability_minkowski(lambda_coupling: float, gap_omega: float, T: float, sigma: float,
                                 q: Optional[QuadratureOptions] = None) -> float:
    """
    Leading-order excitation probability of a static gapped detector in the Minkowski vacuum,

        P = lambda^2 / (4 pi^2) int_0^inf kappa exp(-T^2 (kappa + Omega)^2 - sigma^2 kappa^2) dkappa

    :raises QuadratureFailure: radial integral did not meet the tolerance
    """
    if not (np.isfinite(gap_omega) and gap_omega >= 0.0):
        raise ValueError(f"gap_omega must be nonnegative, got {gap_omega!r}")
    q = q or QuadratureOptions()
    width_sum = T ** 2 + sigma ** 2

    def integrand(kappa):
        return momentum_measure(kappa) * np.exp(-T ** 2 * (kappa + gap_omega) ** 2 - sigma ** 2 * kappa ** 2)

    radial = adaptive_quad(integrand, 0.0, radial_cutoff(width_sum), q,
                           scale=minkowski_variance(T, sigma), label="gapped probability")
    probability = lambda_coupling ** 2 * radial
    logger.debug("Gapped probability (Omega=%r, T=%r, sigma=%r): %r", gap_omega, T, sigma, probability)
    return float(probability)

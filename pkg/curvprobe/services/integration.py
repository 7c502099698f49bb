"""
Adaptive quadrature wrappers with explicit error and budget checks.
"""
import logging
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate, special

from curvprobe.models.quadrature import QuadratureFailure, QuadratureOptions

logger = logging.getLogger(__name__)

# exp(-144) is far below any tolerance used here
RADIAL_CUTOFF = 12.0
POLAR_NODES = 8
AZIMUTH_NODES = 8


def radial_cutoff(width_sum: float) -> float:
    """Upper momentum limit for integrands decaying like exp(-width_sum k^2)"""
    return RADIAL_CUTOFF / np.sqrt(width_sum)


def momentum_measure(kappa):
    """d^3k / (2|k| (2 pi)^3) after angular averaging: kappa dkappa / (4 pi^2)"""
    return kappa / (4.0 * np.pi ** 2)


def angular_rule(polar: int = POLAR_NODES, azimuth: int = AZIMUTH_NODES) -> Tuple[np.ndarray, np.ndarray]:
    """
    Product rule on the unit sphere: Gauss-Legendre in cos(theta), trapezoid in phi.

    Exact for polynomials in the direction components up to degree min(2*polar - 1, azimuth - 1).

    :return: unit directions of shape (n, 3) and weights summing to 1
    """
    mu, mu_weights = special.roots_legendre(polar)
    phi = 2.0 * np.pi * np.arange(azimuth) / azimuth
    mu_grid, phi_grid = np.meshgrid(mu, phi, indexing="ij")
    rho = np.sqrt(1.0 - mu_grid ** 2)
    directions = np.stack([rho * np.cos(phi_grid), rho * np.sin(phi_grid), mu_grid], axis=-1).reshape(-1, 3)
    weights = np.repeat(mu_weights, azimuth) / (2.0 * azimuth)
    return directions, weights


def _check(label: str, value, error: float, evaluations: int, q: QuadratureOptions, scale: float):
    magnitude = max(float(np.max(np.abs(value))), scale)
    if evaluations > q.max_evaluations:
        raise QuadratureFailure(
            f"{label}: {evaluations} evaluations exceed the budget of {q.max_evaluations}"
        )
    if not np.isfinite(error) or error > q.tolerance * magnitude:
        raise QuadratureFailure(
            f"{label}: error estimate {error!r} above tolerance {q.tolerance!r} (magnitude {magnitude!r})"
        )
    logger.debug("%s: value %r, error %r, %d evaluations", label, value, error, evaluations)


def adaptive_quad(fn: Callable[[float], float], a: float, b: float, q: QuadratureOptions,
                  scale: float = 0.0, label: str = "quad", points: Optional[Sequence[float]] = None) -> float:
    """
    scipy.integrate.quad with the error estimate and evaluation count checked against q.

    :param scale: magnitude the tolerance is relative to when the integral itself is near zero
    :raises QuadratureFailure: error estimate or evaluation budget exceeded
    """
    limit = max(50, q.max_evaluations // 21)
    result = integrate.quad(fn, a, b, epsabs=0.1 * q.tolerance * scale, epsrel=max(0.1 * q.tolerance, 1e-14),
                            limit=limit, points=points, full_output=1)
    value, error, info = result[0], result[1], result[2]
    if len(result) > 3:
        logger.debug("%s: quad reported %r", label, result[3])
    _check(label, value, error, int(info["neval"]), q, scale)
    return float(value)


def adaptive_quad_vec(fn: Callable[[float], np.ndarray], a: float, b: float, q: QuadratureOptions,
                      scale: float = 0.0, label: str = "quad_vec") -> np.ndarray:
    """Vector-valued counterpart of adaptive_quad, max-norm error"""
    value, error, info = integrate.quad_vec(fn, a, b, epsabs=0.1 * q.tolerance * scale,
                                            epsrel=max(0.1 * q.tolerance, 1e-14), norm="max",
                                            full_output=True)
    if not info.success:
        raise QuadratureFailure(f"{label}: {info.message}")
    _check(label, value, float(error), int(info.neval), q, scale)
    return np.asarray(value)

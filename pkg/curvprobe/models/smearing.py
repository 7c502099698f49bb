import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from numpy.polynomial import hermite_e

from curvprobe.models.base import ETA

logger = logging.getLogger(__name__)

Monomial = Tuple[int, int, int, int]

MAX_MONOMIAL_DEGREE = 2


@dataclass(frozen=True)
class GaussianSmearing:
    """
    Normalized spacetime Gaussian

        Lambda(x) = exp(-t^2/(2T^2) - |x|^2/(2 sigma^2)) / (sqrt(2 pi) T (2 pi)^(3/2) sigma^3)

    *T       temporal width
    *sigma   spatial width
    *l0      scale of the logarithmic Hadamard term
    *center  RNC position of the peak
    """

    T: float
    sigma: float
    l0: float = 1.0
    center: Tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)

    def __post_init__(self):
        for name in ("T", "sigma", "l0"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0.0):
                raise ValueError(f"{name} must be positive and finite, got {value!r}")
        center = tuple(float(v) for v in self.center)
        if len(center) != 4 or not all(np.isfinite(center)):
            raise ValueError(f"center must be 4 finite coordinates, got {self.center!r}")
        object.__setattr__(self, "center", center)

    @property
    def widths(self) -> np.ndarray:
        return np.array([self.T, self.sigma, self.sigma, self.sigma])

    @property
    def size(self) -> float:
        return max(self.T, self.sigma)

    @property
    def width_sum(self) -> float:
        """T^2 + sigma^2, the combination every closed form depends on"""
        return self.T ** 2 + self.sigma ** 2


@dataclass(frozen=True)
class EffectiveSmearing:
    """
    Polynomial-weighted Gaussian x^monomial Lambda(x), optionally differentiated along one raised index.

    The derivative acts on Lambda only: m(x) d^a Lambda(x).
    """

    base: GaussianSmearing
    monomial: Monomial = (0, 0, 0, 0)
    derivative: Optional[int] = None

    def __post_init__(self):
        monomial = tuple(int(p) for p in self.monomial)
        if len(monomial) != 4 or any(p < 0 for p in monomial):
            raise ValueError(f"monomial must be four non-negative powers, got {self.monomial!r}")
        if sum(monomial) > MAX_MONOMIAL_DEGREE:
            raise ValueError(f"monomial degree above {MAX_MONOMIAL_DEGREE}: {monomial!r}")
        if self.derivative is not None and self.derivative not in (0, 1, 2, 3):
            raise ValueError(f"derivative index must be in 0..3, got {self.derivative!r}")
        object.__setattr__(self, "monomial", monomial)


def monomial_of(*indices: int) -> Monomial:
    """Monomial x^a x^b ... as a power tuple"""
    powers = [0, 0, 0, 0]
    for a in indices:
        powers[a] += 1
    return tuple(powers)


def gaussian_value(s: GaussianSmearing, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    y = (x - np.asarray(s.center)) / s.widths
    norm = (2.0 * np.pi) ** 2 * s.T * s.sigma ** 3
    return np.exp(-0.5 * np.sum(y ** 2, axis=-1)) / norm


def normalization(s: GaussianSmearing, nodes: int = 20) -> float:
    """Product Gauss-Hermite estimate of the integral of Lambda over spacetime"""
    points, weights = hermite_e.hermegauss(nodes)
    grids = np.meshgrid(*([points] * 4), indexing="ij")
    x = np.stack([np.asarray(s.center)[a] + s.widths[a] * grids[a] for a in range(4)], axis=-1)
    w = np.einsum("i,j,k,l->ijkl", weights, weights, weights, weights)
    # Gauss-Hermite with weight exp(-y^2/2) already carries the Gaussian factor
    density = gaussian_value(s, x) / np.exp(-0.5 * np.sum(np.stack(grids, axis=-1) ** 2, axis=-1))
    jacobian = float(np.prod(s.widths))
    return float(np.sum(w * density) * jacobian)


def _axis_moment(power: int, width: float, center: float, q: np.ndarray) -> np.ndarray:
    """Integral of x^power exp(i q x) over N(center, width^2)"""
    total = np.zeros_like(q, dtype=complex)
    for m in range(power + 1):
        coefficients = np.zeros(m + 1)
        coefficients[m] = 1.0
        total = total + (math.comb(power, m) * center ** (power - m) * (1j * width) ** m
                         * hermite_e.hermeval(width * q, coefficients))
    return total * np.exp(-0.5 * (width * q) ** 2) * np.exp(1j * q * center)


def _axis_frequencies(k: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """On-shell (k^0, conjugate variables per axis) for the phase exp(-i k^0 t + i k.x)"""
    kappa = np.linalg.norm(k, axis=-1)
    q = np.stack([-kappa, k[..., 0], k[..., 1], k[..., 2]], axis=-1)
    return kappa, q


def _monomial_transform(s: GaussianSmearing, monomial: Monomial, q: np.ndarray) -> np.ndarray:
    result = np.ones(q.shape[:-1], dtype=complex)
    for a in range(4):
        result = result * _axis_moment(monomial[a], s.widths[a], s.center[a], q[..., a])
    return result


def fourier_eff(e: EffectiveSmearing, k) -> np.ndarray:
    """
    Closed-form transform of an effective smearing at on-shell momenta.

    Phase exp(i k.x) with k.x = -k^0 t + k.x and k^0 = |k|. Derivatives are moved onto the
    monomial and the phase by parts: FT[m d^a L] = -eta^aa FT[(d_a m) L] - i k^a FT[m L].

    :param e: effective smearing
    :param k: spatial momenta, shape (..., 3)
    :return: complex array of shape (...)
    """
    k = np.asarray(k, dtype=float)
    kappa, q = _axis_frequencies(k)
    value = _monomial_transform(e.base, e.monomial, q)
    if e.derivative is None:
        return value

    a = e.derivative
    k_upper = kappa if a == 0 else k[..., a - 1]
    result = -1j * k_upper * value
    power = e.monomial[a]
    if power > 0:
        lowered = list(e.monomial)
        lowered[a] -= 1
        result = result - ETA[a, a] * power * _monomial_transform(e.base, tuple(lowered), q)
    return result

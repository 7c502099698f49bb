import enum
import logging
from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np

logger = logging.getLogger(__name__)


class LogScale(str, enum.Enum):
    """Argument of the logarithmic Hadamard term: (x-x')^2/l0^2 or (x-x')^2/(2 l0^2)"""

    L0_SQUARED = "l0_squared"
    HALF_L0_SQUARED = "half_l0_squared"


class WorldFunctionSign(str, enum.Enum):
    """
    Sign of the quartic curvature term in the world function expansion

        sigma = 1/2 eta (x-x')(x-x') +/- 1/6 R_acbd x^a x^b x'^c x'^d

    MINUS is the sign reproduced by numerically solved geodesics. PLUS keeps the Riemann
    coefficient -4 pi^2/3 in the variance corrections.
    """

    PLUS = "plus"
    MINUS = "minus"

    @property
    def factor(self) -> float:
        return 1.0 if self is WorldFunctionSign.PLUS else -1.0


@dataclass(frozen=True)
class CoefficientSet:
    """
    Geometric integrals of the Gaussian smearing entering the curvature corrections.

    *L2       L^ab
    *A2       A^bc
    *B4       B^abcd
    *Ltilde4  (B^abcd + delta^ad A^bc) / (8 pi^2)
    *p_ln     averaged logarithm, None until evaluated
    """

    T: float
    sigma: float
    L2: np.ndarray
    A2: np.ndarray
    B4: np.ndarray
    Ltilde4: np.ndarray
    p_ln: Optional[float] = None

    def with_p_ln(self, value: float) -> "CoefficientSet":
        return CoefficientSet(self.T, self.sigma, self.L2, self.A2, self.B4, self.Ltilde4, float(value))


@dataclass(frozen=True)
class CurvatureCorrections:
    ricci_term: float
    riemann_term: float
    log_term: float
    p_ln: float


@dataclass(frozen=True)
class VarianceBreakdown:
    """
    Leading-order decomposition of the smeared field variance <phi(Lambda)^2>.

    total = minkowski + ricci_term + riemann_term + log_term + state_term
    """

    minkowski: float
    ricci_term: float
    riemann_term: float
    log_term: float
    state_term: float
    total: float
    p_ln: float
    log_scale: LogScale = LogScale.L0_SQUARED
    sign: WorldFunctionSign = WorldFunctionSign.PLUS
    diagnostics: Dict[str, float] = field(default_factory=dict)
    validity_warning: bool = False

    @property
    def curvature_correction(self) -> float:
        return self.ricci_term + self.riemann_term + self.log_term

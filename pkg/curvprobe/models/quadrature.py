import enum
import logging
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from curvprobe.models.base import ComputeError

logger = logging.getLogger(__name__)


class QuadratureFailure(ComputeError):
    pass


class Method(str, enum.Enum):
    DETERMINISTIC_RADIAL = "deterministic_radial"
    MONTE_CARLO = "monte_carlo"


@dataclass(frozen=True)
class QuadratureOptions:
    """
    Options shared by the deterministic and Monte-Carlo integrators.

    *method            deterministic_radial or monte_carlo
    *tolerance         accepted error estimate, relative to the magnitude of the integral
    *max_evaluations   integrand evaluations allowed per adaptive integral
    *seed              root of the per-chunk random streams
    *epsilon_sequence  regulator lengths, strictly decreasing; None picks a default from the smearing
    *samples           Monte-Carlo sample count
    *chunk_size        samples per independently seeded chunk
    *workers           threads used for chunks
    """

    method: Method = Method.DETERMINISTIC_RADIAL
    tolerance: float = 1e-10
    max_evaluations: int = 200000
    seed: int = 42
    epsilon_sequence: Optional[Tuple[float, ...]] = None
    samples: int = 1000000
    chunk_size: int = 250000
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        if not (np.isfinite(self.tolerance) and self.tolerance > 0.0):
            raise ValueError(f"tolerance must be positive, got {self.tolerance!r}")
        if self.max_evaluations < 1:
            raise ValueError(f"max_evaluations must be at least 1, got {self.max_evaluations!r}")
        if self.samples < 2 or self.chunk_size < 2:
            raise ValueError("samples and chunk_size must be at least 2")
        if self.workers < 1:
            raise ValueError(f"workers must be at least 1, got {self.workers!r}")
        if self.epsilon_sequence is not None:
            eps = tuple(float(e) for e in self.epsilon_sequence)
            if not eps:
                raise ValueError("epsilon_sequence must not be empty")
            if any(not np.isfinite(e) or e <= 0.0 for e in eps):
                raise ValueError(f"epsilon_sequence must be positive, got {eps!r}")
            if any(b >= a for a, b in zip(eps, eps[1:])):
                raise ValueError(f"epsilon_sequence must be strictly decreasing, got {eps!r}")
            object.__setattr__(self, "epsilon_sequence", eps)

    def replace(self, **changes) -> "QuadratureOptions":
        values = {name: getattr(self, name) for name in self.__dataclass_fields__}
        values.update(changes)
        return QuadratureOptions(**values)


@dataclass(frozen=True)
class MonteCarloEstimate:
    value: float
    stderr: float
    samples: int
    per_epsilon: Tuple[Tuple[float, float, float], ...] = field(default=())

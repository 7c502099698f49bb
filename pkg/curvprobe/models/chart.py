import enum
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, Mapping, Tuple

import numpy as np

from curvprobe.models.base import ComputeError

logger = logging.getLogger(__name__)


class DomainError(ComputeError):
    pass


class PresetName(str, enum.Enum):
    MINKOWSKI = "minkowski"
    DE_SITTER = "de_sitter"
    SCHWARZSCHILD = "schwarzschild"
    CONSTANT_CURVATURE = "constant_curvature"


PRESET_PARAMETERS: Dict[PresetName, Tuple[str, ...]] = {
    PresetName.MINKOWSKI: (),
    PresetName.DE_SITTER: ("hubble",),
    PresetName.SCHWARZSCHILD: ("mass", "radius"),
    PresetName.CONSTANT_CURVATURE: ("K",),
}


@dataclass(frozen=True)
class PresetSpec:
    """
    Named analytic spacetime with its parameters.

    *de_sitter           hubble H > 0
    *schwarzschild       mass M >= 0, radius r > 2M of the static event
    *constant_curvature  sectional curvature K of either sign
    """

    name: PresetName
    params: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        name = PresetName(self.name)
        object.__setattr__(self, "name", name)
        required = PRESET_PARAMETERS[name]
        params = {key: float(value) for key, value in dict(self.params).items()}
        missing = [key for key in required if key not in params]
        if missing:
            raise ValueError(f"preset {name.value} requires parameters {missing}")
        unknown = [key for key in params if key not in required]
        if unknown:
            raise ValueError(f"preset {name.value} does not accept parameters {unknown}")
        for key, value in params.items():
            if not np.isfinite(value):
                raise ValueError(f"parameter {key} must be finite, got {value!r}")
        if name is PresetName.DE_SITTER and params["hubble"] <= 0.0:
            raise ValueError(f"de_sitter requires hubble > 0, got {params['hubble']!r}")
        if name is PresetName.SCHWARZSCHILD:
            if params["mass"] < 0.0:
                raise ValueError(f"schwarzschild requires mass >= 0, got {params['mass']!r}")
            if params["radius"] <= 2.0 * params["mass"]:
                raise DomainError(
                    f"schwarzschild event r={params['radius']!r} is not outside the horizon 2M={2 * params['mass']!r}"
                )
        object.__setattr__(self, "params", params)

    @property
    def sectional_curvature(self) -> float:
        if self.name is PresetName.DE_SITTER:
            return self.params["hubble"] ** 2
        if self.name is PresetName.CONSTANT_CURVATURE:
            return self.params["K"]
        return 0.0

    @property
    def maximally_symmetric(self) -> bool:
        return self.name is not PresetName.SCHWARZSCHILD


@dataclass(frozen=True)
class MetricChart:
    """
    Analytic metric on a single coordinate chart.

    *metric_fn       x -> g_mn(x), shape (4, 4)
    *christoffel_fn  x -> Gamma^m_nr(x), shape (4, 4, 4)
    *domain_fn       x -> True inside the chart
    """

    name: str
    metric_fn: Callable[[np.ndarray], np.ndarray]
    christoffel_fn: Callable[[np.ndarray], np.ndarray]
    domain_fn: Callable[[np.ndarray], bool]
    dimension: int = 4

    def metric(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if not self.domain_fn(x):
            raise DomainError(f"Point {x.tolist()!r} is outside the {self.name} chart")
        return self.metric_fn(x)

    def christoffel(self, x) -> np.ndarray:
        return self.christoffel_fn(np.asarray(x, dtype=float))

    def contains(self, x) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(np.isfinite(x)) and self.domain_fn(x))

    def norm(self, x, v) -> float:
        v = np.asarray(v, dtype=float)
        return float(v @ self.metric(x) @ v)


@dataclass(frozen=True)
class GeodesicSolution:
    """
    Geodesic joining two events, affinely parametrized on (0, 1).

    *path              states (x, v) at the integrator nodes, shape (n, 8)
    *integrator_stats  steps, evaluations, norm drift and shooting residual
    """

    initial_point: np.ndarray
    final_point: np.ndarray
    initial_velocity: np.ndarray
    affine_span: Tuple[float, float]
    nodes: np.ndarray
    path: np.ndarray
    integrator_stats: Dict[str, float]
    dense: Callable[[float], np.ndarray] = field(repr=False, compare=False, default=None)

    @property
    def norm_drift(self) -> float:
        return float(self.integrator_stats.get("norm_drift", 0.0))

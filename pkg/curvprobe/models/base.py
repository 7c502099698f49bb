import logging

import numpy as np

logger = logging.getLogger(__name__)

SYMMETRY_TOLERANCE = 1e-12
BIANCHI_TOLERANCE = 1e-10
FRAME_TOLERANCE = 1e-12
STATE_TOLERANCE = 1e-12

# signature (-,+,+,+); the same array raises and lowers frame indices
ETA = np.diag([-1.0, 1.0, 1.0, 1.0])
ETA.setflags(write=False)


class CurvprobeError(Exception):
    pass


class ConfigError(CurvprobeError):
    pass


class ComputeError(CurvprobeError):
    pass


class MinkowskiMetric:
    """
    Fixed frame metric eta = diag(-1, +1, +1, +1)
    """

    components = ETA

    @staticmethod
    def lower(vector: np.ndarray) -> np.ndarray:
        return ETA @ np.asarray(vector, dtype=float)

    @staticmethod
    def raise_index(covector: np.ndarray) -> np.ndarray:
        return ETA @ np.asarray(covector, dtype=float)

    @staticmethod
    def dot(u: np.ndarray, v: np.ndarray) -> float:
        return float(np.asarray(u, dtype=float) @ ETA @ np.asarray(v, dtype=float))

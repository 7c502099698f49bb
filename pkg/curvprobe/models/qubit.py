import logging
from dataclasses import dataclass

import numpy as np

from curvprobe.models.base import STATE_TOLERANCE, ComputeError

logger = logging.getLogger(__name__)

# monopole moment sigma+ + sigma- in the {|g>, |e>} basis
MONOPOLE = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
MONOPOLE.setflags(write=False)


class InvalidState(ComputeError):
    pass


@dataclass(frozen=True)
class QubitState:
    """
    Detector density matrix in the {|g>, |e>} basis
    """

    matrix: np.ndarray

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=complex)
        if matrix.shape != (2, 2):
            raise ValueError(f"qubit state must be 2x2, got shape {matrix.shape}")
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)

    @classmethod
    def ground(cls) -> "QubitState":
        return cls(np.array([[1.0, 0.0], [0.0, 0.0]]))

    @classmethod
    def excited(cls) -> "QubitState":
        return cls(np.array([[0.0, 0.0], [0.0, 1.0]]))

    @classmethod
    def from_bloch(cls, x: float, y: float, z: float) -> "QubitState":
        """Bloch vector with z = +1 for |g>"""
        pauli_x = np.array([[0, 1], [1, 0]], dtype=complex)
        pauli_y = np.array([[0, -1j], [1j, 0]], dtype=complex)
        pauli_z = np.array([[1, 0], [0, -1]], dtype=complex)
        return cls(0.5 * (np.eye(2) + x * pauli_x + y * pauli_y + z * pauli_z))

    @property
    def excited_population(self) -> float:
        return float(self.matrix[1, 1].real)

    def violations(self, tol: float = STATE_TOLERANCE) -> list:
        problems = []
        m = self.matrix
        if np.max(np.abs(m - m.conj().T)) > tol:
            problems.append("not hermitian")
        if abs(np.trace(m) - 1.0) > tol:
            problems.append("trace differs from 1")
        hermitian = 0.5 * (m + m.conj().T)
        if np.min(np.linalg.eigvalsh(hermitian)) < -tol:
            problems.append("not positive semidefinite")
        return problems

    def is_valid(self, tol: float = STATE_TOLERANCE) -> bool:
        return not self.violations(tol)

    def validate(self, tol: float = STATE_TOLERANCE) -> "QubitState":
        problems = self.violations(tol)
        if problems:
            raise InvalidState(f"Invalid qubit state: {', '.join(problems)}")
        return self

import itertools
import logging
from dataclasses import dataclass, field
from typing import Iterable, List, Tuple

import numpy as np

from curvprobe.models.base import BIANCHI_TOLERANCE, ETA, SYMMETRY_TOLERANCE, ComputeError

logger = logging.getLogger(__name__)

IndexQuadruple = Tuple[int, int, int, int]


class SymmetryViolation(ComputeError):
    pass


class BianchiViolation(ComputeError):
    pass


@dataclass(frozen=True)
class CurvatureData:
    """
    Riemann tensor R_abcd at a single event, orthonormal frame, lower indices.

    Ricci R_ab = eta^cd R_cadb and the scalar R = eta^ab R_ab are derived on construction.
    """

    riemann: np.ndarray
    ricci: np.ndarray = field(init=False, repr=False)
    scalar: float = field(init=False)

    def __post_init__(self):
        riemann = np.array(self.riemann, dtype=float)
        if riemann.shape != (4, 4, 4, 4):
            raise ValueError(f"Riemann array must have shape (4, 4, 4, 4), got {riemann.shape}")
        if not np.all(np.isfinite(riemann)):
            raise ValueError("Riemann components must be finite")
        riemann.setflags(write=False)
        ricci = np.einsum("cd,cadb->ab", ETA, riemann)
        ricci.setflags(write=False)
        object.__setattr__(self, "riemann", riemann)
        object.__setattr__(self, "ricci", ricci)
        object.__setattr__(self, "scalar", float(np.einsum("ab,ab->", ETA, ricci)))

    @classmethod
    def zero(cls) -> "CurvatureData":
        return cls(riemann=np.zeros((4, 4, 4, 4)))

    @property
    def max_component(self) -> float:
        return float(np.max(np.abs(self.riemann)))

    def is_flat(self, tol: float = 0.0) -> bool:
        return self.max_component <= tol


@dataclass(frozen=True)
class CurvatureSums:
    sum_0i0i: float
    sum_ijij: float
    r00: float
    r_spatial_trace: float


def symmetry_images(index: IndexQuadruple) -> List[Tuple[IndexQuadruple, float]]:
    """
    All index permutations reachable through antisymmetry and pair symmetry, with their signs.

    :param index: (a, b, c, d)
    :return: list of ((a', b', c', d'), sign) with R_a'b'c'd' = sign * R_abcd
    """
    a, b, c, d = index
    return [
        ((a, b, c, d), 1.0), ((b, a, c, d), -1.0), ((a, b, d, c), -1.0), ((b, a, d, c), 1.0),
        ((c, d, a, b), 1.0), ((d, c, a, b), -1.0), ((c, d, b, a), -1.0), ((d, c, b, a), 1.0),
    ]


def bianchi_residual(riemann: np.ndarray) -> np.ndarray:
    """Cyclic sum R_abcd + R_acdb + R_adbc over all index quadruples"""
    return riemann + np.transpose(riemann, (0, 2, 3, 1)) + np.transpose(riemann, (0, 3, 1, 2))


def _relative(value: float, scale: float) -> float:
    return value / scale if scale > 0.0 else value


def build_curvature(components: Iterable[Tuple[IndexQuadruple, float]]) -> CurvatureData:
    """
    Build a CurvatureData from a list of independent components.

    Every symmetry image of a given component is filled in. Components that are not reached stay zero.

    :param components: iterable of ((a, b, c, d), value) pairs, indices in 0..3, values in 1/length^2
    :return: CurvatureData
    :raises SymmetryViolation: two entries contradict the antisymmetry or pair symmetry beyond 1e-12 relative
    :raises BianchiViolation: the cyclic identity fails beyond 1e-10 relative
    """
    riemann = np.zeros((4, 4, 4, 4))
    filled = np.zeros((4, 4, 4, 4), dtype=bool)

    for index, value in components:
        index = tuple(int(i) for i in index)
        if len(index) != 4 or any(i < 0 or i > 3 for i in index):
            raise ValueError(f"Riemann index {index!r} out of range 0..3")
        value = float(value)
        if not np.isfinite(value):
            raise ValueError(f"Riemann component {index!r} is not finite")
        a, b, c, d = index
        if a == b or c == d:
            if value != 0.0:
                raise SymmetryViolation(f"Component R_{a}{b}{c}{d} = {value!r} must vanish by antisymmetry")
            continue
        for image, sign in symmetry_images(index):
            expected = sign * value
            if filled[image]:
                current = riemann[image]
                scale = max(abs(current), abs(expected))
                if _relative(abs(current - expected), scale) > SYMMETRY_TOLERANCE:
                    raise SymmetryViolation(
                        f"Component R_{a}{b}{c}{d} = {value!r} conflicts with "
                        f"R_{''.join(map(str, image))} = {current!r}"
                    )
            else:
                riemann[image] = expected
                filled[image] = True

    scale = float(np.max(np.abs(riemann)))
    residual = float(np.max(np.abs(bianchi_residual(riemann))))
    if _relative(residual, scale) > BIANCHI_TOLERANCE:
        raise BianchiViolation(f"First Bianchi residual {residual!r} exceeds tolerance (scale {scale!r})")

    logger.debug("Built curvature from %d filled components, Bianchi residual %r", int(filled.sum()), residual)
    return CurvatureData(riemann=riemann)


def independent_components(c: CurvatureData) -> List[Tuple[IndexQuadruple, float]]:
    """The 21 pair-ordered components (a<b, c<d, (a,b) <= (c,d)), first Bianchi not applied"""
    pairs = [(a, b) for a in range(4) for b in range(a + 1, 4)]
    result = []
    for i, (a, b) in enumerate(pairs):
        for c_, d in pairs[i:]:
            result.append(((a, b, c_, d), float(c.riemann[a, b, c_, d])))
    return result


def ricci_and_scalar(c: CurvatureData) -> Tuple[np.ndarray, float]:
    return c.ricci.copy(), c.scalar


def curvature_sums(c: CurvatureData) -> CurvatureSums:
    """
    Traces entering the closed-form corrections.

    :param c: curvature data
    :return: sum_i R_0i0i, sum_ij R_ijij, R_00 and sum_i R_ii
    """
    r = c.riemann
    spatial = range(1, 4)
    return CurvatureSums(
        sum_0i0i=float(sum(r[0, i, 0, i] for i in spatial)),
        sum_ijij=float(sum(r[i, j, i, j] for i in spatial for j in spatial)),
        r00=float(c.ricci[0, 0]),
        r_spatial_trace=float(sum(c.ricci[i, i] for i in spatial)),
    )


def kulkarni_nomizu(h: np.ndarray, k: np.ndarray) -> np.ndarray:
    """(h o k)_abcd = h_ac k_bd + h_bd k_ac - h_ad k_bc - h_bc k_ad for symmetric h, k"""
    h = np.asarray(h, dtype=float)
    k = np.asarray(k, dtype=float)
    return (np.einsum("ac,bd->abcd", h, k) + np.einsum("bd,ac->abcd", h, k)
            - np.einsum("ad,bc->abcd", h, k) - np.einsum("bc,ad->abcd", h, k))


def random_curvature(rng: np.random.Generator, terms: int = 3, scale: float = 1.0) -> CurvatureData:
    """Sum of Kulkarni-Nomizu products of random symmetric matrices, a valid curvature tensor by construction"""
    riemann = np.zeros((4, 4, 4, 4))
    for _ in range(terms):
        h, k = rng.normal(size=(2, 4, 4))
        riemann += kulkarni_nomizu(h + h.T, k + k.T)
    return CurvatureData(riemann=scale * riemann / terms)


def _totally_antisymmetric_part(t: np.ndarray) -> np.ndarray:
    result = np.zeros_like(t)
    for perm in itertools.permutations(range(4)):
        inversions = sum(1 for i in range(4) for j in range(i + 1, 4) if perm[i] > perm[j])
        result += (-1.0) ** inversions * np.transpose(t, perm)
    return result / 24.0


def symmetrize_riemann(t: np.ndarray) -> np.ndarray:
    """
    Project an arbitrary rank-4 array onto the algebraic curvature tensors.

    Antisymmetrize both index pairs, symmetrize under pair exchange, then remove the totally
    antisymmetric part so the first Bianchi identity holds.

    :param t: array of shape (4, 4, 4, 4)
    :return: projected array
    """
    t = np.asarray(t, dtype=float)
    t = 0.5 * (t - np.transpose(t, (1, 0, 2, 3)))
    t = 0.5 * (t - np.transpose(t, (0, 1, 3, 2)))
    t = 0.5 * (t + np.transpose(t, (2, 3, 0, 1)))
    return t - _totally_antisymmetric_part(t)

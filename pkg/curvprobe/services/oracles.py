"""
Brute-force evaluations of the smeared-variance integrals, independent of the closed forms.

The primary path works in momentum space with the closed-form transforms of the effective smearings:
an adaptive radial integral times an exact product rule on the sphere. Monte-Carlo oracles sample
positions directly.
"""
import enum
import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from curvprobe.models.base import ComputeError
from curvprobe.models.coefficients import LogScale
from curvprobe.models.curvature import random_curvature
from curvprobe.models.quadrature import Method, MonteCarloEstimate, QuadratureOptions
from curvprobe.models.smearing import EffectiveSmearing, GaussianSmearing, fourier_eff, monomial_of
from curvprobe.services.integration import (adaptive_quad, adaptive_quad_vec, angular_rule, momentum_measure,
                                            radial_cutoff)
from curvprobe.services.variance import (closed_form_coefficients, curvature_corrections, equal_width_correction,
                                         minkowski_variance, p_ln, p_ln_closed_form)

logger = logging.getLogger(__name__)

REFERENCE_P_LN = -0.84961


class ExtrapolationUnstable(ComputeError):
    pass


class Target(str, enum.Enum):
    L2 = "L2"
    A2 = "A2"
    B4 = "B4"


class Kernel(str, enum.Enum):
    W0 = "W0"
    W0_TIMES_MONOMIALS = "W0_times_monomials"


RANK = {Target.L2: 2, Target.A2: 2, Target.B4: 4}


def _transforms(s: GaussianSmearing, k: np.ndarray) -> Dict[str, np.ndarray]:
    """Transforms of Lambda, x^a Lambda, x^a x^b Lambda and x^d d^a Lambda on a direction set"""
    base = fourier_eff(EffectiveSmearing(s), k)
    first = np.stack([fourier_eff(EffectiveSmearing(s, monomial_of(a)), k) for a in range(4)])
    second = np.zeros((4, 4) + base.shape, dtype=complex)
    derivative = np.zeros((4, 4) + base.shape, dtype=complex)
    for a, b in itertools.product(range(4), repeat=2):
        second[a, b] = fourier_eff(EffectiveSmearing(s, monomial_of(a, b)), k)
        derivative[a, b] = fourier_eff(EffectiveSmearing(s, monomial_of(b), derivative=a), k)
    return {"base": base, "first": first, "second": second, "derivative": derivative}


def _tensor_integrand(s: GaussianSmearing, target: Target) -> Callable[[float], np.ndarray]:
    """kappa -> radial integrand of the requested tensor, flattened"""
    directions, weights = angular_rule()

    def integrand(kappa: float) -> np.ndarray:
        ft = _transforms(s, kappa * directions)
        base, first, second = ft["base"], ft["first"], ft["second"]
        if target is Target.L2:
            tensor = (np.einsum("abn,n,n->ab", second, base.conj(), weights)
                      + np.einsum("an,bn,n->ab", first, first.conj(), weights)
                      + np.einsum("bn,an,n->ab", first, first.conj(), weights)
                      + np.einsum("n,abn,n->ab", base, second.conj(), weights))
        elif target is Target.A2:
            tensor = np.einsum("n,bcn,n->bc", base, second.conj(), weights)
        else:
            # B^abcd pairs x^d d^a Lambda with x^b x^c Lambda
            tensor = np.einsum("adn,bcn,n->abcd", ft["derivative"], second.conj(), weights)
        return momentum_measure(kappa) * np.real(tensor).ravel()

    return integrand


def _target_scale(target: Target, width_sum: float) -> float:
    if target is Target.L2:
        return 1.0 / (4.0 * np.pi ** 2)
    if target is Target.A2:
        return 1.0 / (8.0 * np.pi ** 2)
    return 1.0 / (12.0 * np.pi ** 2 * width_sum)


def variance_momentum_quadrature(s: GaussianSmearing, q: Optional[QuadratureOptions] = None) -> float:
    """(2 pi)^-3 int d^3k / (2|k|) |Lambda~(|k|, k)|^2 by radial quadrature and an exact angular rule"""
    q = q or QuadratureOptions()
    directions, weights = angular_rule()
    base = EffectiveSmearing(s)

    def integrand(kappa):
        transform = fourier_eff(base, kappa * directions)
        return momentum_measure(kappa) * float(np.sum(weights * np.abs(transform) ** 2))

    value = adaptive_quad(integrand, 0.0, radial_cutoff(s.width_sum), q,
                          scale=minkowski_variance(s.T, s.sigma), label="minkowski variance")
    logger.info("Momentum-space variance for T=%r, sigma=%r: %r", s.T, s.sigma, value)
    return value


def coefficient_tensor_oracle(T: float, sigma: float, target: Target,
                              q: Optional[QuadratureOptions] = None) -> np.ndarray:
    """Every component of L2, A2 or B4 from one vector-valued radial integral"""
    q = q or QuadratureOptions()
    target = Target(target)
    s = GaussianSmearing(T=T, sigma=sigma)
    values = adaptive_quad_vec(_tensor_integrand(s, target), 0.0, radial_cutoff(s.width_sum), q,
                               scale=_target_scale(target, s.width_sum), label=f"{target.value} tensor")
    return values.reshape((4,) * RANK[target])


def coefficient_oracle(T: float, sigma: float, target: Target, indices: Sequence[int],
                       q: Optional[QuadratureOptions] = None) -> float:
    """
    One component of L2, A2 or B4 by momentum-space quadrature.

    :param indices: index tuple matching the rank of the target
    :raises IndexError: wrong number of indices or an index outside 0..3
    """
    q = q or QuadratureOptions()
    target = Target(target)
    indices = tuple(indices)
    if len(indices) != RANK[target] or any(not 0 <= int(i) <= 3 for i in indices):
        raise IndexError(f"{target.value} takes {RANK[target]} indices in 0..3, got {indices!r}")
    s = GaussianSmearing(T=T, sigma=sigma)
    position = int(np.ravel_multi_index(indices, (4,) * RANK[target]))
    tensor_integrand = _tensor_integrand(s, target)
    label = f"{target.value}{list(indices)}"
    return adaptive_quad(lambda kappa: tensor_integrand(kappa)[position], 0.0, radial_cutoff(s.width_sum), q,
                         scale=_target_scale(target, s.width_sum), label=label)


def _chunks(q: QuadratureOptions) -> List[Tuple[np.random.SeedSequence, int]]:
    sizes = [q.chunk_size] * (q.samples // q.chunk_size)
    if q.samples % q.chunk_size:
        sizes.append(q.samples % q.chunk_size)
    seeds = np.random.SeedSequence(q.seed).spawn(len(sizes))
    return list(zip(seeds, sizes))


def _map_chunks(fn, q: QuadratureOptions) -> list:
    """Chunk results in chunk order, independent of the number of workers"""
    tasks = _chunks(q)
    if q.workers > 1:
        with ThreadPoolExecutor(max_workers=q.workers) as executor:
            return list(executor.map(fn, tasks))
    return [fn(task) for task in tasks]


def _mean_and_error(total: float, squares: float, count: int) -> Tuple[float, float]:
    mean = np.asarray(total) / count
    variance = np.maximum(np.asarray(squares) / count - mean ** 2, 0.0) * count / (count - 1)
    return mean, np.sqrt(variance / count)


def pln_oracle(T: float, sigma: float, l0: float, q: QuadratureOptions,
               log_scale: LogScale = LogScale.L0_SQUARED) -> MonteCarloEstimate:
    """
    Monte-Carlo average of ln|(x - x')^2| / l0^2 over the Gaussian separation.

    :raises ValueError: q.method is not monte_carlo
    """
    if q.method is not Method.MONTE_CARLO:
        raise ValueError(f"pln_oracle needs method monte_carlo, got {q.method.value}")
    shift = 2.0 * np.log(l0) + (np.log(2.0) if LogScale(log_scale) is LogScale.HALF_L0_SQUARED else 0.0)

    def chunk(task):
        seed, size = task
        rng = np.random.default_rng(seed)
        dt = rng.normal(0.0, np.sqrt(2.0) * T, size)
        dx = rng.normal(0.0, np.sqrt(2.0) * sigma, (size, 3))
        values = np.log(np.abs(np.sum(dx ** 2, axis=1) - dt ** 2)) - shift
        return float(np.sum(values)), float(np.sum(values ** 2)), size

    results = _map_chunks(chunk, q)
    count = sum(r[2] for r in results)
    mean, stderr = _mean_and_error(sum(r[0] for r in results), sum(r[1] for r in results), count)
    logger.info("Monte-Carlo p_ln(T=%r, sigma=%r, l0=%r) = %r +- %r (%d samples)", T, sigma, l0, mean, stderr, count)
    return MonteCarloEstimate(value=float(mean), stderr=float(stderr), samples=count)


def default_epsilons(s: GaussianSmearing, terms: int = 4) -> Tuple[float, ...]:
    start = 0.8 * min(s.T, s.sigma)
    return tuple(start / 2 ** k for k in range(terms))


def richardson_weights(epsilons: Sequence[float]) -> np.ndarray:
    """Weights of the polynomial through (eps_k, A_k) evaluated at eps = 0"""
    eps = np.asarray(epsilons, dtype=float)
    weights = np.ones_like(eps)
    for k in range(len(eps)):
        for j in range(len(eps)):
            if j != k:
                weights[k] *= eps[j] / (eps[j] - eps[k])
    return weights


def regulated_wightman_real(dt: np.ndarray, r2: np.ndarray, epsilon: float) -> np.ndarray:
    """Re W0 with t - t' -> t - t' - i eps: u / (4 pi^2 (u^2 + v^2))"""
    u = r2 - dt ** 2 + epsilon ** 2
    v = 2.0 * epsilon * dt
    return u / (4.0 * np.pi ** 2 * (u ** 2 + v ** 2))


def position_space_mc(s: GaussianSmearing, kernel: Kernel, q: QuadratureOptions,
                      indices: Tuple[int, ...] = ()) -> MonteCarloEstimate:
    """
    Monte-Carlo value of the double smearing of Re W0, extrapolated to vanishing regulator.

    The same samples serve every regulator value, so the extrapolated estimator and its standard error
    come from one combined per-sample quantity.

    :param kernel: W0, or W0 weighted with (x + x')^a (x + x')^b for indices (a, b)
    :raises ExtrapolationUnstable: successive regulator values change direction beyond three standard errors
    """
    kernel = Kernel(kernel)
    epsilons = q.epsilon_sequence or default_epsilons(s)
    if kernel is Kernel.W0_TIMES_MONOMIALS and not indices:
        raise ValueError("W0_times_monomials needs the monomial indices")
    if kernel is Kernel.W0:
        indices = ()
    weights = richardson_weights(epsilons)
    center = np.asarray(s.center)

    def chunk(task):
        seed, size = task
        rng = np.random.default_rng(seed)
        x = center + s.widths * rng.standard_normal((size, 4))
        y = center + s.widths * rng.standard_normal((size, 4))
        dt = x[:, 0] - y[:, 0]
        r2 = np.sum((x[:, 1:] - y[:, 1:]) ** 2, axis=1)
        insertion = np.ones(size)
        for a in indices:
            insertion = insertion * (x[:, a] + y[:, a])
        values = np.stack([insertion * regulated_wightman_real(dt, r2, e) for e in epsilons])
        combined = weights @ values
        steps = np.diff(values, axis=0)
        return {
            "sum": values.sum(axis=1), "squares": (values ** 2).sum(axis=1),
            "combined": combined.sum(), "combined_squares": (combined ** 2).sum(),
            "steps": steps.sum(axis=1), "step_squares": (steps ** 2).sum(axis=1),
            "count": size,
        }

    results = _map_chunks(chunk, q)
    count = sum(r["count"] for r in results)

    def reduce(key_sum, key_squares):
        return _mean_and_error(sum(r[key_sum] for r in results), sum(r[key_squares] for r in results), count)

    per_eps_mean, per_eps_error = reduce("sum", "squares")
    step_mean, step_error = reduce("steps", "step_squares")
    per_epsilon = tuple((float(e), float(m), float(se)) for e, m, se in zip(epsilons, per_eps_mean, per_eps_error))
    for k in range(len(step_mean) - 1):
        significant = (abs(step_mean[k]) > 3.0 * step_error[k]
                       and abs(step_mean[k + 1]) > 3.0 * step_error[k + 1])
        if significant and np.sign(step_mean[k]) != np.sign(step_mean[k + 1]):
            raise ExtrapolationUnstable(f"Regulator sequence is not monotone beyond noise: {per_epsilon!r}")

    value, stderr = reduce("combined", "combined_squares")
    logger.info("Position-space MC %s%r: %r +- %r over eps %r", kernel.value, tuple(indices), value, stderr, epsilons)
    return MonteCarloEstimate(value=float(value), stderr=float(stderr), samples=count, per_epsilon=per_epsilon)


@dataclass(frozen=True)
class ValidationRow:
    check: str
    T: float
    sigma: float
    closed_form: float
    oracle: float
    abs_diff: float
    rel_diff: float
    tolerance: float
    status: str


def _row(check: str, T: float, sigma: float, closed: float, oracle: float, tolerance: float,
         relative: bool = True, informational: bool = False) -> ValidationRow:
    abs_diff = abs(oracle - closed)
    rel_diff = abs_diff / abs(closed) if closed != 0.0 else float("inf") if abs_diff else 0.0
    passed = (rel_diff if relative else abs_diff) <= tolerance
    status = "info" if informational else ("pass" if passed else "fail")
    if status == "fail":
        logger.error("Check %s failed at T=%r, sigma=%r: closed %r, oracle %r", check, T, sigma, closed, oracle)
    return ValidationRow(check, T, sigma, float(closed), float(oracle), float(abs_diff), float(rel_diff),
                         float(tolerance), status)


def _odd_parity(index: Tuple[int, ...]) -> bool:
    return any(index.count(axis) % 2 for axis in (1, 2, 3))


def listed_b_components() -> List[Tuple[int, int, int, int]]:
    """Index quadruples of the B^abcd families covered by closed_form_coefficients"""
    spatial = range(1, 4)
    listed = []
    for i, j in itertools.product(spatial, repeat=2):
        listed += [(0, i, 0, j), (i, 0, 0, j), (0, i, j, 0)]
    listed += list(itertools.product(spatial, repeat=4))
    return listed


def _compare_tensor(name: str, T: float, sigma: float, closed: np.ndarray, oracle: np.ndarray,
                    indices: Iterable[Tuple[int, ...]], rel_tol: float, zero_tol: float) -> List[ValidationRow]:
    rows = []
    for index in indices:
        label = f"{name}[{','.join(map(str, index))}]"
        if closed[index] == 0.0:
            rows.append(_row(label, T, sigma, 0.0, oracle[index], zero_tol, relative=False))
        else:
            rows.append(_row(label, T, sigma, closed[index], oracle[index], rel_tol))
    return rows


def validate_coefficients(T: float, sigma: float, q: Optional[QuadratureOptions] = None,
                          rel_tol: float = 1e-6, zero_tol: float = 1e-8) -> List[ValidationRow]:
    """Closed forms against momentum-space oracles for one (T, sigma)"""
    q = q or QuadratureOptions()
    s = GaussianSmearing(T=T, sigma=sigma)
    closed = closed_form_coefficients(T, sigma)
    rows = [_row("minkowski_variance", T, sigma, minkowski_variance(T, sigma),
                 variance_momentum_quadrature(s, q), 1e-8)]

    L2 = coefficient_tensor_oracle(T, sigma, Target.L2, q)
    A2 = coefficient_tensor_oracle(T, sigma, Target.A2, q)
    B4 = coefficient_tensor_oracle(T, sigma, Target.B4, q)
    pairs = list(itertools.product(range(4), repeat=2))
    rows += _compare_tensor("L2", T, sigma, closed.L2, L2, pairs, rel_tol, zero_tol)
    rows += _compare_tensor("A2", T, sigma, closed.A2, A2, pairs, rel_tol, zero_tol)

    listed = listed_b_components()
    odd = [i for i in itertools.product(range(4), repeat=4) if _odd_parity(i)]
    rows += _compare_tensor("B4", T, sigma, closed.B4, B4, listed + odd, rel_tol, zero_tol)

    Ltilde = (B4 + np.einsum("ad,bc->abcd", np.eye(4), A2)) / (8.0 * np.pi ** 2)
    rows += _compare_tensor("Ltilde4", T, sigma, closed.Ltilde4, Ltilde, listed + odd, rel_tol, zero_tol)

    # B^i0j0 pairs with R_i0j0 but closed_form_coefficients leaves it at zero
    unlisted = -T ** 4 * sigma ** 2 / (12.0 * np.pi ** 2 * (T ** 2 + sigma ** 2) ** 3)
    for i in range(1, 4):
        rows.append(_row(f"B4[{i},0,{i},0] unlisted", T, sigma, unlisted, B4[i, 0, i, 0], rel_tol,
                         informational=True))
    return rows


def validate_p_ln(T: float, sigma: float, l0: float, q: QuadratureOptions,
                  mc: Optional[QuadratureOptions] = None) -> List[ValidationRow]:
    """Deterministic, closed-form and Monte-Carlo P_ln, plus the tabulated reference constant"""
    rows = []
    deterministic = {}
    for scale in LogScale:
        deterministic[scale] = p_ln(T, sigma, l0, q, scale)
        rows.append(_row(f"p_ln[{scale.value}] closed_form", T, sigma, p_ln_closed_form(T, sigma, l0, scale),
                         deterministic[scale], 1e-8))
    if mc is not None:
        estimate = pln_oracle(T, sigma, l0, mc)
        tolerance = 3.0 * estimate.stderr
        rows.append(_row(f"p_ln[{LogScale.L0_SQUARED.value}] monte_carlo", T, sigma,
                         deterministic[LogScale.L0_SQUARED], estimate.value, tolerance, relative=False))
    if T == sigma == l0:
        for scale in LogScale:
            rows.append(_row(f"p_ln[{scale.value}] reference_constant", T, sigma, REFERENCE_P_LN,
                             deterministic[scale], 5e-4, relative=False, informational=True))
    return rows


def validate_equal_width(T: float, count: int = 1000, seed: int = 42, rel_tol: float = 1e-12) -> ValidationRow:
    """General-width Ricci plus Riemann corrections at T = sigma against -(5R + 3R_00)/(576 pi^2)"""
    rng = np.random.default_rng(seed)
    coefficients = closed_form_coefficients(T, T).with_p_ln(0.0)
    worst = None
    for _ in range(count):
        c = random_curvature(rng)
        corrections = curvature_corrections(c, T, T, 1.0, coefficients=coefficients)
        general = corrections.ricci_term + corrections.riemann_term
        reduced = equal_width_correction(c)
        scale = c.max_component * minkowski_variance(T, T)
        rel_diff = abs(general - reduced) / max(abs(reduced), scale)
        if worst is None or rel_diff > worst[0]:
            worst = (rel_diff, reduced, general)
    rel_diff, reduced, general = worst
    status = "pass" if rel_diff <= rel_tol else "fail"
    if status == "fail":
        logger.error("Equal-width reduction failed at T=%r: %r vs %r", T, general, reduced)
    return ValidationRow(f"equal_width_reduction[{count} tensors]", T, T, float(reduced), float(general),
                         float(abs(general - reduced)), float(rel_diff), rel_tol, status)


def validate_position_space(T: float, sigma: float, q: QuadratureOptions, rel_tol: float = 0.05) -> ValidationRow:
    """Minkowski variance against the extrapolated position-space Monte-Carlo average of Re W0"""
    s = GaussianSmearing(T=T, sigma=sigma)
    estimate = position_space_mc(s, Kernel.W0, q.replace(method=Method.MONTE_CARLO))
    return _row("minkowski_variance position_space_mc", T, sigma, minkowski_variance(T, sigma), estimate.value,
                rel_tol)

"""
Geodesic boundary-value solving, the numeric world function and Riemann normal coordinates.
"""
import itertools
import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import solve_ivp

from curvprobe.models.base import ComputeError, MinkowskiMetric
from curvprobe.models.chart import GeodesicSolution, MetricChart
from curvprobe.models.quadrature import QuadratureOptions
from curvprobe.services.integration import adaptive_quad
from curvprobe.services.presets import orthonormal_frame, sqrt_minus_g

logger = logging.getLogger(__name__)

DEFAULT_TOLERANCE = 1e-10
MAX_ITERATIONS = 30
INTEGRATOR_FLOOR = 1e-13
MIN_DAMPING = 1.0 / 64.0


class NoConvergence(ComputeError):
    pass


class DomainExit(ComputeError):
    pass


def integrator_tolerances(tol: float, scale: float, magnitude: float = 0.0) -> Tuple[float, float]:
    """
    (rtol, atol) for DOP853, two orders tighter than the shooting tolerance on a chord of length scale.

    :param magnitude: coordinate size of the states; large coordinates tighten rtol so the absolute
        position error stays below the chord tolerance
    """
    ratio = min(1.0, scale / magnitude) if magnitude > 0.0 else 1.0
    rtol = min(max(1e-2 * tol * ratio, INTEGRATOR_FLOOR), 1e-6)
    return rtol, rtol * max(scale, 1e-12)


def _geodesic_rhs(chart: MetricChart):
    def rhs(_, state):
        position, velocity = state[:4], state[4:]
        if not chart.contains(position):
            raise DomainExit(f"Geodesic left the {chart.name} chart at {position.tolist()!r}")
        acceleration = -np.einsum("abc,b,c->a", chart.christoffel(position), velocity, velocity)
        return np.concatenate([velocity, acceleration])

    return rhs


def shoot(chart: MetricChart, x, v, rtol: float, atol: float, dense: bool = False):
    """Integrate the geodesic equation from x with initial velocity v over the affine span (0, 1)"""
    state = np.concatenate([np.asarray(x, dtype=float), np.asarray(v, dtype=float)])
    solution = solve_ivp(_geodesic_rhs(chart), (0.0, 1.0), state, method="DOP853", rtol=rtol, atol=atol,
                         dense_output=dense)
    if not solution.success:
        raise NoConvergence(f"Geodesic integration failed: {solution.message}")
    return solution


def _norm_drift(chart: MetricChart, path: np.ndarray) -> float:
    norms = np.array([state[4:] @ chart.metric(state[:4]) @ state[4:] for state in path])
    first = path[0]
    reference = float(np.abs(first[4:]) @ np.abs(chart.metric(first[:4])) @ np.abs(first[4:]))
    if reference == 0.0:
        return 0.0
    return float((norms.max() - norms.min()) / reference)


def geodesic_connect(chart: MetricChart, x, x_prime, tol: float = DEFAULT_TOLERANCE,
                     max_iterations: int = MAX_ITERATIONS,
                     initial_velocity: Optional[np.ndarray] = None) -> GeodesicSolution:
    """
    Geodesic from x at lambda = 0 to x' at lambda = 1 by damped Newton shooting on the initial velocity.

    The Jacobian of the endpoint map is taken by forward differences; the first guess is the chord.

    :param tol: accepted endpoint miss relative to the coordinate separation
    :raises DomainExit: an endpoint or an intermediate geodesic leaves the chart
    :raises NoConvergence: the endpoint miss stays above tol after max_iterations
    """
    x = np.asarray(x, dtype=float)
    x_prime = np.asarray(x_prime, dtype=float)
    for point in (x, x_prime):
        if not chart.contains(point):
            raise DomainExit(f"Point {point.tolist()!r} is outside the {chart.name} chart")

    chord = x_prime - x
    scale = float(np.linalg.norm(chord))
    if scale == 0.0:
        path = np.tile(np.concatenate([x, np.zeros(4)]), (2, 1))
        return GeodesicSolution(x, x_prime, np.zeros(4), (0.0, 1.0), np.array([0.0, 1.0]), path,
                                {"steps": 0, "evaluations": 0, "iterations": 0, "residual": 0.0,
                                 "norm_drift": 0.0})

    rtol, atol = integrator_tolerances(tol, scale, max(float(np.linalg.norm(x)), float(np.linalg.norm(x_prime))))

    def miss(velocity):
        return shoot(chart, x, velocity, rtol, atol).y[:4, -1] - x_prime

    velocity = chord.copy() if initial_velocity is None else np.asarray(initial_velocity, dtype=float)
    residual = miss(velocity)
    iterations = 0
    while np.linalg.norm(residual) > tol * scale:
        if iterations >= max_iterations:
            raise NoConvergence(
                f"Shooting residual {np.linalg.norm(residual) / scale!r} above {tol!r} after {iterations} iterations"
            )
        iterations += 1
        step = 1e-7 * max(float(np.linalg.norm(velocity)), scale)
        jacobian = np.empty((4, 4))
        for j in range(4):
            shifted = velocity.copy()
            shifted[j] += step
            jacobian[:, j] = (miss(shifted) - residual) / step
        try:
            update = np.linalg.solve(jacobian, -residual)
        except np.linalg.LinAlgError as err:
            raise NoConvergence(f"Singular shooting Jacobian: {err!r}") from err

        damping = 1.0
        while True:
            candidate = velocity + damping * update
            try:
                candidate_residual = miss(candidate)
            except (DomainExit, NoConvergence):
                candidate_residual = None
            if candidate_residual is not None and np.linalg.norm(candidate_residual) < np.linalg.norm(residual):
                velocity, residual = candidate, candidate_residual
                break
            damping *= 0.5
            if damping < MIN_DAMPING:
                raise NoConvergence(f"Line search stalled at residual {np.linalg.norm(residual) / scale!r}")
        logger.debug("Shooting iteration %d: residual %r, damping %r",
                     iterations, np.linalg.norm(residual) / scale, damping)

    solution = shoot(chart, x, velocity, rtol, atol, dense=True)
    path = solution.y.T
    drift = _norm_drift(chart, path)
    if drift > 10.0 * rtol:
        logger.warning("Geodesic norm drifted by %r, above 10x integrator tolerance %r", drift, rtol)
    stats = {
        "steps": int(len(solution.t) - 1),
        "evaluations": int(solution.nfev),
        "iterations": iterations,
        "residual": float(np.linalg.norm(residual) / scale),
        "norm_drift": drift,
    }
    logger.debug("Connected %r -> %r in %d iterations", x.tolist(), x_prime.tolist(), iterations)
    return GeodesicSolution(x, x_prime, velocity, (0.0, 1.0), solution.t, path, stats, dense=solution.sol)


def world_function_numeric(chart: MetricChart, x, x_prime, tol: float = DEFAULT_TOLERANCE) -> float:
    """sigma(x, x') = 1/2 g(v0, v0) for the connecting geodesic on the unit affine span"""
    solution = geodesic_connect(chart, x, x_prime, tol)
    return 0.5 * chart.norm(solution.initial_point, solution.initial_velocity)


def world_function_integral(chart: MetricChart, solution: GeodesicSolution,
                            q: Optional[QuadratureOptions] = None) -> float:
    """sigma = 1/2 (lambda2 - lambda1) int g(dx/dlambda, dx/dlambda) dlambda along the dense output"""
    if solution.dense is None:
        return 0.0
    q = q or QuadratureOptions(tolerance=1e-9)
    low, high = solution.affine_span

    def integrand(lam):
        state = solution.dense(lam)
        return float(state[4:] @ chart.metric(state[:4]) @ state[4:])

    scale = float(np.abs(solution.initial_velocity) @ np.abs(chart.metric(solution.initial_point))
                  @ np.abs(solution.initial_velocity))
    return 0.5 * (high - low) * adaptive_quad(integrand, low, high, q, scale=scale, label="world function")


@dataclass(frozen=True)
class RncChart:
    """
    Riemann normal coordinates at z built from the exponential map.

    *frame  rows are the chart components of the orthonormal legs e_a, e_0 timelike
    """

    chart: MetricChart
    base_event: np.ndarray
    frame: np.ndarray
    tol: float = DEFAULT_TOLERANCE

    def forward(self, x) -> np.ndarray:
        """exp_z(x^a e_a)"""
        x = np.asarray(x, dtype=float)
        if not np.any(x):
            return self.base_event.copy()
        velocity = self.frame.T @ x
        rtol, atol = integrator_tolerances(self.tol, float(np.linalg.norm(velocity)),
                                           float(np.linalg.norm(self.base_event)))
        return shoot(self.chart, self.base_event, velocity, rtol, atol).y[:4, -1]

    def inverse(self, point) -> np.ndarray:
        """Frame components x^a = eta^aa g(v0, e_a) of the initial velocity reaching the point"""
        solution = geodesic_connect(self.chart, self.base_event, point, self.tol)
        g = self.chart.metric(self.base_event)
        return MinkowskiMetric.raise_index(self.frame @ g @ solution.initial_velocity)

    def jacobian(self, x, h: float) -> np.ndarray:
        """Central-difference Jacobian d(chart)/d(RNC), columns indexed by the RNC direction"""
        x = np.asarray(x, dtype=float)
        columns = []
        for a in range(4):
            step = np.zeros(4)
            step[a] = h
            columns.append((self.forward(x + step) - self.forward(x - step)) / (2.0 * h))
        return np.stack(columns, axis=1)

    def pulled_back_metric(self, x, h: float) -> np.ndarray:
        jacobian = self.jacobian(x, h)
        return jacobian.T @ self.chart.metric(self.forward(x)) @ jacobian

    def sqrt_minus_g(self, x, h: float) -> float:
        det = float(np.linalg.det(self.pulled_back_metric(x, h)))
        return float(np.sqrt(-det))


def rnc_chart(chart: MetricChart, z, tol: float = DEFAULT_TOLERANCE) -> RncChart:
    z = np.asarray(z, dtype=float)
    frame = orthonormal_frame(chart.metric(z))
    return RncChart(chart=chart, base_event=z, frame=frame, tol=tol)


def geodesic_size(chart: MetricChart, events: Sequence, tol: float = DEFAULT_TOLERANCE) -> float:
    """Largest sqrt(2 |sigma|) over all pairs of events"""
    size = 0.0
    for first, second in itertools.combinations(events, 2):
        size = max(size, float(np.sqrt(2.0 * abs(world_function_numeric(chart, first, second, tol)))))
    return size


def vanvleck_numeric(chart: MetricChart, x, x_prime, h: Optional[float] = None,
                     tol: float = DEFAULT_TOLERANCE) -> float:
    """
    Van Vleck determinant -det(-d_a d_b' sigma) / (sqrt(-g) sqrt(-g')) from mixed central differences of
    the numeric world function. Slow: 64 boundary-value solves.
    """
    x = np.asarray(x, dtype=float)
    x_prime = np.asarray(x_prime, dtype=float)
    if h is None:
        h = 1e-3 * float(np.linalg.norm(x_prime - x))
    basis = np.eye(4) * h
    mixed = np.empty((4, 4))
    for a, b in itertools.product(range(4), repeat=2):
        corners = [(1, 1, 1.0), (1, -1, -1.0), (-1, 1, -1.0), (-1, -1, 1.0)]
        mixed[a, b] = sum(sign * world_function_numeric(chart, x + sa * basis[a], x_prime + sb * basis[b], tol)
                          for sa, sb, sign in corners) / (4.0 * h ** 2)
    return float(-np.linalg.det(-mixed) / (sqrt_minus_g(chart, x) * sqrt_minus_g(chart, x_prime)))

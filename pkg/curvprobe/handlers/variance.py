import logging

from curvprobe.config import RunConfig
from curvprobe.handlers.common import (add_curvature_source, add_expansion_choices, add_output, add_quadrature,
                                       add_smearing, emit, load_curvature)
from curvprobe.models.smearing import GaussianSmearing
from curvprobe.services.variance import VALIDITY_THRESHOLD, variance_breakdown

logger = logging.getLogger(__name__)


def breakdown_row(breakdown, s: GaussianSmearing) -> dict:
    return {
        "T": s.T,
        "sigma": s.sigma,
        "l0": s.l0,
        "minkowski": breakdown.minkowski,
        "ricci_term": breakdown.ricci_term,
        "riemann_term": breakdown.riemann_term,
        "log_term": breakdown.log_term,
        "state_term": breakdown.state_term,
        "total": breakdown.total,
        "p_ln": breakdown.p_ln,
        "ell_times_sqrt_curvature": breakdown.diagnostics["ell_times_sqrt_curvature"],
        "validity_warning": breakdown.validity_warning,
    }


def validity_warnings(breakdowns) -> list:
    flagged = [b for b in breakdowns if b.validity_warning]
    if not flagged:
        return []
    worst = max(b.diagnostics["ell_times_sqrt_curvature"] for b in flagged)
    return [f"smearing size times sqrt(curvature) reaches {worst:.6g}, above {VALIDITY_THRESHOLD}: "
            f"the leading-order expansion may be unreliable"]


def variance_report(run: RunConfig) -> int:
    c = load_curvature(run)
    s = GaussianSmearing(T=run.T, sigma=run.sigma, l0=run.l0)
    breakdown = variance_breakdown(c, s, run.state_term, run.quad, run.log_scale, run.sign)
    emit(run, breakdown, [breakdown_row(breakdown, s)], diagnostics=breakdown.diagnostics,
         warnings=validity_warnings([breakdown]))
    return 0


def register_variance(subparsers):
    parser = subparsers.add_parser("variance", help="curvature-corrected smeared variance <phi(Lambda)^2>")
    add_curvature_source(parser)
    add_smearing(parser)
    add_quadrature(parser)
    add_expansion_choices(parser)
    add_output(parser)
    parser.set_defaults(handler=variance_report, needs_curvature=True)

import logging

import numpy as np

from curvprobe.config import RunConfig
from curvprobe.handlers.common import (add_curvature_source, add_expansion_choices, add_output, add_quadrature,
                                       emit, load_curvature)
from curvprobe.handlers.variance import breakdown_row, validity_warnings
from curvprobe.models.smearing import GaussianSmearing
from curvprobe.services.variance import variance_breakdown

logger = logging.getLogger(__name__)


def sweep_lengths(options: dict) -> np.ndarray:
    if options.get("ell"):
        return np.asarray(options["ell"], dtype=float)
    return np.geomspace(options["ell_min"], options["ell_max"], options["points"])


def sweep_report(run: RunConfig) -> int:
    """Breakdowns over a grid of smearing sizes at fixed curvature, one row per size"""
    options = run.options
    c = load_curvature(run)
    rows, breakdowns = [], []
    for ell in sweep_lengths(options):
        s = GaussianSmearing(T=options["T_ratio"] * ell, sigma=options["sigma_ratio"] * ell,
                             l0=options["l0_ratio"] * ell)
        breakdown = variance_breakdown(c, s, run.state_term, run.quad, run.log_scale, run.sign)
        breakdowns.append(breakdown)
        rows.append({"ell": float(ell), **breakdown_row(breakdown, s),
                     "relative_correction": breakdown.curvature_correction / breakdown.minkowski})
    logger.info("Sweep over %d sizes finished, %d flagged", len(rows), sum(b.validity_warning for b in breakdowns))
    emit(run, {"rows": rows}, rows, warnings=validity_warnings(breakdowns))
    return 0


def _options(args) -> dict:
    ratios = {"T_ratio": args.T_ratio, "sigma_ratio": args.sigma_ratio, "l0_ratio": args.l0_ratio}
    for name, value in ratios.items():
        if not value > 0.0:
            raise ValueError(f"{name} must be positive, got {value!r}")
    if args.ell:
        if any(not ell > 0.0 for ell in args.ell):
            raise ValueError(f"--ell values must be positive, got {args.ell!r}")
    elif not (0.0 < args.ell_min < args.ell_max and args.points >= 2):
        raise ValueError("need 0 < --ell-min < --ell-max and --points >= 2")
    return {"ell": args.ell, "ell_min": args.ell_min, "ell_max": args.ell_max, "points": args.points, **ratios}


def register_sweep(subparsers):
    parser = subparsers.add_parser("sweep", help="variance breakdown over a grid of smearing sizes")
    add_curvature_source(parser)
    add_quadrature(parser)
    add_expansion_choices(parser)
    add_output(parser)
    parser.add_argument("--ell", type=float, nargs="+", help="explicit sizes")
    parser.add_argument("--ell-min", type=float, default=0.01)
    parser.add_argument("--ell-max", type=float, default=1.0)
    parser.add_argument("--points", type=int, default=21)
    parser.add_argument("--T-ratio", dest="T_ratio", type=float, default=1.0)
    parser.add_argument("--sigma-ratio", type=float, default=1.0)
    parser.add_argument("--l0-ratio", type=float, default=1.0)
    parser.set_defaults(handler=sweep_report, needs_curvature=True, collect_options=_options,
                        T=1.0, sigma=1.0, l0=1.0)

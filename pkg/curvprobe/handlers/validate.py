import dataclasses
import itertools
import logging
from typing import List

from curvprobe.config import RunConfig
from curvprobe.handlers.common import add_output, add_quadrature, add_smearing, emit
from curvprobe.models.quadrature import Method
from curvprobe.services.oracles import (ValidationRow, validate_coefficients, validate_equal_width, validate_p_ln,
                                        validate_position_space)

logger = logging.getLogger(__name__)

GRID_WIDTHS = (0.5, 1.0, 2.0)
P_LN_CHECK_SAMPLES = 10_000_000


def collect_rows(run: RunConfig) -> List[ValidationRow]:
    options = run.options
    deterministic = run.quad.replace(method=Method.DETERMINISTIC_RADIAL)
    monte_carlo = run.quad.replace(method=Method.MONTE_CARLO)
    widths = list(itertools.product(GRID_WIDTHS, repeat=2)) if options.get("grid") else [(run.T, run.sigma)]

    rows: List[ValidationRow] = []
    for T, sigma in widths:
        rows += validate_coefficients(T, sigma, deterministic)
    # an explicit --samples wins over the 1e7 default of the P_ln check, MC_SAMPLES does not
    pln_monte_carlo = monte_carlo.replace(samples=options.get("samples") or P_LN_CHECK_SAMPLES)
    rows += validate_p_ln(run.T, run.sigma, run.l0, deterministic,
                          pln_monte_carlo if options.get("monte_carlo") else None)
    rows.append(validate_equal_width(run.T, options.get("reduction_samples", 1000), run.quad.seed))
    if options.get("position_space"):
        rows.append(validate_position_space(run.T, run.sigma, monte_carlo))
    return rows


def validate_report(run: RunConfig) -> int:
    rows = collect_rows(run)
    failed = [r for r in rows if r.status == "fail"]
    counts = {status: sum(1 for r in rows if r.status == status) for status in ("pass", "fail", "info")}
    logger.info("Validation finished: %d pass, %d fail, %d info", counts["pass"], counts["fail"], counts["info"])
    warnings = [f"{r.check} at T={r.T}, sigma={r.sigma}: closed {r.closed_form!r}, oracle {r.oracle!r}"
                for r in failed]
    results = {"status": "fail" if failed else "pass", "counts": counts, "rows": rows}
    emit(run, results, [dataclasses.asdict(r) for r in rows], warnings=warnings)
    return 1 if failed else 0


def _options(args) -> dict:
    if args.reduction_samples < 1:
        raise ValueError(f"--reduction-samples must be positive, got {args.reduction_samples!r}")
    return {
        "grid": args.grid,
        "monte_carlo": args.monte_carlo,
        "position_space": args.position_space,
        "reduction_samples": args.reduction_samples,
        "samples": args.samples,
    }


def register_validate(subparsers):
    parser = subparsers.add_parser("validate", help="closed forms against independent oracles")
    add_smearing(parser)
    add_quadrature(parser)
    add_output(parser)
    parser.add_argument("--grid", action="store_true", help="check coefficients on (T, sigma) in {0.5, 1, 2}^2")
    parser.add_argument("--monte-carlo", action="store_true", help="add the Monte-Carlo P_ln check, 1e7 samples unless --samples is given")
    parser.add_argument("--position-space", action="store_true",
                        help="add the position-space Monte-Carlo check of the Minkowski variance")
    parser.add_argument("--reduction-samples", type=int, default=1000,
                        help="random curvature tensors for the T = sigma reduction")
    parser.set_defaults(handler=validate_report, collect_options=_options)

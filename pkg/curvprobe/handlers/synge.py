import dataclasses
import logging

import numpy as np

from curvprobe.config import RunConfig
from curvprobe.handlers.common import add_curvature_source, add_output, emit, floats
from curvprobe.models.coefficients import WorldFunctionSign
from curvprobe.services.presets import preset_chart, preset_curvature, preset_event
from curvprobe.services.synge import DEFAULT_SCALES, determinant_scaling, scaling_test

logger = logging.getLogger(__name__)

DEFAULT_P = (0.3, 0.5, -0.2, 0.4)
DEFAULT_Q = (-0.2, 0.1, 0.6, -0.3)
SYMMETRIC_THRESHOLD = 5.5
GENERAL_THRESHOLD = 4.5


def _passes(run: RunConfig, exponent) -> bool:
    if preset_curvature(run.preset).is_flat():
        return exponent is None
    if exponent is None:
        return False
    threshold = SYMMETRIC_THRESHOLD if run.preset.maximally_symmetric else GENERAL_THRESHOLD
    return exponent >= threshold


def synge_report(run: RunConfig) -> int:
    options = run.options
    chart = preset_chart(run.preset)
    event = preset_event(run.preset)
    base = np.asarray(options["base"], dtype=float) if options.get("base") is not None else event
    # preset curvature refers to the preset event only
    curvature = preset_curvature(run.preset) if np.array_equal(base, event) else None
    sign = WorldFunctionSign(options.get("sigma_sign", WorldFunctionSign.MINUS.value))

    report = scaling_test(chart, base, (options["p"], options["q"]), options["scales"], run.geodesic_tolerance,
                          curvature=curvature, sign=sign)
    passed = _passes(run, report.fitted_exponent)
    results = {"status": "pass" if passed else "fail", "fitted_exponent": report.fitted_exponent,
               "sign": sign.value, "rows": report.rows}
    if options.get("determinant"):
        results["determinant"] = determinant_scaling(chart, base, options["p"], options["scales"][:4],
                                                     run.geodesic_tolerance, curvature=curvature)
    warnings = [] if passed else [f"world-function mismatch order {report.fitted_exponent!r} below the expected order"]
    emit(run, results, [dataclasses.asdict(r) for r in report.rows], warnings=warnings)
    return 0 if passed else 1


def _options(args) -> dict:
    scales = [float(s) for s in (args.scales or DEFAULT_SCALES)]
    return {
        "base": floats(4, "--base", args.base),
        "p": floats(4, "--p", args.p) or list(DEFAULT_P),
        "q": floats(4, "--q", args.q) or list(DEFAULT_Q),
        "scales": scales,
        "determinant": args.determinant,
        "sigma_sign": args.sigma_sign,
    }


def register_synge(subparsers):
    parser = subparsers.add_parser("synge", help="world-function expansion against solved geodesics")
    add_curvature_source(parser)
    add_output(parser)
    parser.add_argument("--base", type=float, nargs=4, help="chart coordinates of the RNC origin")
    parser.add_argument("--p", type=float, nargs=4, help="first RNC direction")
    parser.add_argument("--q", type=float, nargs=4, help="second RNC direction")
    parser.add_argument("--scales", type=float, nargs="+", help="strictly decreasing scale factors")
    parser.add_argument("--sigma-sign", choices=[s.value for s in WorldFunctionSign],
                        default=WorldFunctionSign.MINUS.value)
    parser.add_argument("--geodesic-tolerance", type=float)
    parser.add_argument("--determinant", action="store_true", help="add the Van Vleck and sqrt(-g) scaling")
    parser.set_defaults(handler=synge_report, needs_preset=True, collect_options=_options,
                        T=1.0, sigma=1.0, l0=1.0)

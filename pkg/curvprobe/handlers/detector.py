import logging

import numpy as np

from curvprobe.config import RunConfig
from curvprobe.handlers.common import (add_curvature_source, add_expansion_choices, add_output, add_quadrature,
                                       add_smearing, emit, floats, load_curvature)
from curvprobe.handlers.variance import breakdown_row, validity_warnings
from curvprobe.models.qubit import QubitState
from curvprobe.models.smearing import GaussianSmearing
from curvprobe.services.detector import (curvature_corrected_state, gapped_probability_minkowski,
                                         linearized_corrected_state)

logger = logging.getLogger(__name__)


def _initial_state(options: dict) -> QubitState:
    bloch = options.get("bloch")
    if bloch is not None:
        return QubitState.from_bloch(*bloch)
    return QubitState.excited() if options.get("state") == "excited" else QubitState.ground()


def _state_fields(prefix: str, rho: QubitState) -> dict:
    m = rho.matrix
    return {
        f"{prefix}_rho_gg": float(m[0, 0].real),
        f"{prefix}_rho_ee": float(m[1, 1].real),
        f"{prefix}_rho_ge_re": float(m[0, 1].real),
        f"{prefix}_rho_ge_im": float(m[0, 1].imag),
    }


def detector_report(run: RunConfig) -> int:
    c = load_curvature(run)
    s = GaussianSmearing(T=run.T, sigma=run.sigma, l0=run.l0)
    rho0 = _initial_state(run.options).validate()
    corrected = curvature_corrected_state(run.lambda_coupling, s, c, run.state_term, rho0, run.quad,
                                          run.log_scale, run.sign)
    linearized = linearized_corrected_state(run.lambda_coupling, s, c, run.state_term, rho0, run.quad,
                                            run.log_scale, run.sign)
    gapped = gapped_probability_minkowski(run.lambda_coupling, run.gap_omega, run.T, run.sigma, run.quad)

    results = {
        "xi": corrected.strength.xi,
        "final_state": corrected.final.matrix,
        "excited_population": corrected.final.excited_population,
        "linearized_state": linearized.matrix,
        "linearized_excited_population": linearized.excited_population,
        "gapped_probability_minkowski": gapped,
        "breakdown": corrected.breakdown,
    }
    row = {"lambda_coupling": run.lambda_coupling, "gap_omega": run.gap_omega, "xi": corrected.strength.xi,
           **_state_fields("final", corrected.final), **_state_fields("linearized", linearized),
           "gapped_probability_minkowski": gapped, **breakdown_row(corrected.breakdown, s)}
    diagnostics = dict(corrected.breakdown.diagnostics)
    diagnostics["linearization_gap"] = float(np.max(np.abs(linearized.matrix - corrected.final.matrix)))
    emit(run, results, [row], diagnostics=diagnostics, warnings=validity_warnings([corrected.breakdown]))
    return 0


def _options(args) -> dict:
    return {"state": args.state, "bloch": floats(3, "--bloch", args.bloch)}


def register_detector(subparsers):
    parser = subparsers.add_parser("detector", help="gapless detector state driven by the corrected variance")
    add_curvature_source(parser)
    add_smearing(parser)
    add_quadrature(parser)
    add_expansion_choices(parser)
    add_output(parser)
    parser.add_argument("--lambda", dest="lambda_coupling", type=float, help="coupling strength")
    parser.add_argument("--gap-omega", type=float, help="gap of the detector for the Minkowski probability")
    parser.add_argument("--state", choices=["ground", "excited"], default="ground")
    parser.add_argument("--bloch", type=float, nargs=3, metavar=("X", "Y", "Z"),
                        help="initial Bloch vector, Z = +1 is the ground state")
    parser.set_defaults(handler=detector_report, needs_curvature=True, collect_options=_options)

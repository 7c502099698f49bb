import argparse
import logging
import sys
from typing import Any, Dict, List, Optional, Sequence

from curvprobe.config import OutputFormat, RunConfig
from curvprobe.misc.utils import build_report, dumps, read_curvature_file, write_csv
from curvprobe.models.chart import PresetName
from curvprobe.models.coefficients import LogScale, WorldFunctionSign
from curvprobe.models.curvature import CurvatureData
from curvprobe.models.quadrature import Method
from curvprobe.services.presets import preset_curvature

logger = logging.getLogger(__name__)


def add_curvature_source(parser: argparse.ArgumentParser):
    group = parser.add_argument_group("curvature source (one of --preset, --curvature-file)")
    group.add_argument("--preset", choices=[p.value for p in PresetName])
    group.add_argument("--hubble", type=float, help="de_sitter Hubble rate H")
    group.add_argument("--mass", type=float, help="schwarzschild mass M")
    group.add_argument("--radius", type=float, help="schwarzschild areal radius of the event, r > 2M")
    group.add_argument("--K", type=float, help="constant_curvature sectional curvature")
    group.add_argument("--curvature-file", help="key-value file with lines like 'R_0101 = -2.0e-3'")


def add_smearing(parser: argparse.ArgumentParser):
    group = parser.add_argument_group("smearing (lengths in the global unit)")
    group.add_argument("--T", type=float, default=1.0, help="temporal width")
    group.add_argument("--sigma", type=float, default=1.0, help="spatial width")
    group.add_argument("--l0", type=float, default=1.0, help="length inside the logarithmic term")


def add_quadrature(parser: argparse.ArgumentParser):
    group = parser.add_argument_group("quadrature")
    group.add_argument("--method", choices=[m.value for m in Method])
    group.add_argument("--tolerance", type=float)
    group.add_argument("--max-evaluations", type=int)
    group.add_argument("--samples", type=int)
    group.add_argument("--seed", type=int)
    group.add_argument("--chunk-size", type=int)
    group.add_argument("--workers", type=int)
    group.add_argument("--epsilons", type=float, nargs="+", help="decreasing regulator lengths")


def add_expansion_choices(parser: argparse.ArgumentParser):
    parser.add_argument("--log-scale", choices=[s.value for s in LogScale])
    parser.add_argument("--sign", choices=[s.value for s in WorldFunctionSign],
                        help="sign of the quartic world-function term")
    parser.add_argument("--state-term", type=float, help="state-dependent constant added to the variance")


def add_output(parser: argparse.ArgumentParser):
    parser.add_argument("--output", choices=[f.value for f in OutputFormat])
    parser.add_argument("--out", help="CSV file for the report rows; the JSON report still goes to stdout")


def floats(count: int, name: str, values: Optional[Sequence[float]]) -> Optional[List[float]]:
    if values is None:
        return None
    if len(values) != count:
        raise ValueError(f"{name} needs {count} numbers, got {len(values)}")
    return [float(v) for v in values]


def load_curvature(run: RunConfig) -> CurvatureData:
    if run.preset is not None:
        return preset_curvature(run.preset)
    return read_curvature_file(run.curvature_file)


def emit(run: RunConfig, results: Any, rows: List[Dict[str, Any]], diagnostics: Optional[Dict[str, Any]] = None,
         warnings: Sequence[str] = (), stream=None):
    """JSON report to stdout, or CSV rows when asked; --out always receives the CSV rows"""
    stream = stream or sys.stdout
    if run.out:
        with open(run.out, "w", encoding="utf-8", newline="") as handle:
            write_csv(handle, rows)
        logger.info("Wrote %d rows to %s", len(rows), run.out)
    if run.output is OutputFormat.CSV and not run.out:
        write_csv(stream, rows)
        return
    report = build_report(run.schema_version, run.inputs_echo(), results, diagnostics, warnings)
    stream.write(dumps(report) + "\n")

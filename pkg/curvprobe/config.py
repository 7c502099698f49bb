import enum
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Optional

from environs import Env, EnvError
from marshmallow.validate import OneOf, Range

from curvprobe.models.base import ConfigError
from curvprobe.models.chart import PRESET_PARAMETERS, DomainError, PresetName, PresetSpec
from curvprobe.models.coefficients import LogScale, WorldFunctionSign
from curvprobe.models.quadrature import Method, QuadratureOptions

logger = logging.getLogger(__name__)

SCHEMA_VERSION = "1.0"
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")


@dataclass
class QuadratureConfig:
    tolerance: float
    max_evaluations: int


@dataclass
class MonteCarloConfig:
    samples: int
    seed: int
    chunk_size: int
    workers: int


@dataclass
class GeodesicConfig:
    tolerance: float
    max_iterations: int


@dataclass
class Miscellaneous:
    log_level: str = "INFO"
    schema_version: str = SCHEMA_VERSION


@dataclass
class Config:
    quad: QuadratureConfig
    monte_carlo: MonteCarloConfig
    geodesic: GeodesicConfig
    misc: Miscellaneous


def load_config(path: str = None) -> Config:
    """
    Read defaults from the environment, optionally seeded from a dotenv file.

    :raises ConfigError: a variable is present but malformed
    """
    env = Env()
    env.read_env(path)

    positive = Range(min=0.0, min_inclusive=False)
    try:
        return Config(
            quad=QuadratureConfig(
                tolerance=env.float("QUAD_TOLERANCE", 1e-10, validate=positive),
                max_evaluations=env.int("QUAD_MAX_EVALUATIONS", 200000, validate=Range(min=1)),
            ),
            monte_carlo=MonteCarloConfig(
                samples=env.int("MC_SAMPLES", 1000000, validate=Range(min=2)),
                seed=env.int("MC_SEED", 42, validate=Range(min=0)),
                chunk_size=env.int("MC_CHUNK_SIZE", 250000, validate=Range(min=2)),
                workers=env.int("MC_WORKERS", 1, validate=Range(min=1)),
            ),
            geodesic=GeodesicConfig(
                tolerance=env.float("GEODESIC_TOLERANCE", 1e-10, validate=positive),
                max_iterations=env.int("GEODESIC_MAX_ITERATIONS", 30, validate=Range(min=1)),
            ),
            misc=Miscellaneous(
                log_level=env.str("LOG_LEVEL", "INFO", validate=OneOf(LOG_LEVELS)).upper(),
            ),
        )
    except EnvError as err:
        raise ConfigError(f"Invalid environment configuration: {err}") from err


class Subcommand(str, enum.Enum):
    VARIANCE = "variance"
    DETECTOR = "detector"
    VALIDATE = "validate"
    SYNGE = "synge"
    SWEEP = "sweep"


class OutputFormat(str, enum.Enum):
    JSON = "json"
    CSV = "csv"


@dataclass
class RunConfig:
    """
    One validated invocation.

    *preset / curvature_file  at most one is set; subcommands needing curvature require exactly one
    *options                  subcommand-specific settings taken from the parser
    """

    subcommand: Subcommand
    T: float
    sigma: float
    l0: float
    quad: QuadratureOptions
    preset: Optional[PresetSpec] = None
    curvature_file: Optional[str] = None
    lambda_coupling: float = 1.0
    gap_omega: float = 0.0
    state_term: float = 0.0
    log_scale: LogScale = LogScale.L0_SQUARED
    sign: WorldFunctionSign = WorldFunctionSign.PLUS
    geodesic_tolerance: float = 1e-10
    geodesic_max_iterations: int = 30
    output: OutputFormat = OutputFormat.JSON
    out: Optional[str] = None
    schema_version: str = SCHEMA_VERSION
    options: Dict[str, Any] = field(default_factory=dict)

    def inputs_echo(self) -> Dict[str, Any]:
        return {
            "subcommand": self.subcommand.value,
            "preset": None if self.preset is None else {"name": self.preset.name.value,
                                                        "params": dict(self.preset.params)},
            "curvature_file": self.curvature_file,
            "T": self.T,
            "sigma": self.sigma,
            "l0": self.l0,
            "lambda_coupling": self.lambda_coupling,
            "gap_omega": self.gap_omega,
            "state_term": self.state_term,
            "log_scale": self.log_scale.value,
            "sign": self.sign.value,
            "method": self.quad.method.value,
            "tolerance": self.quad.tolerance,
            "seed": self.quad.seed,
            "samples": self.quad.samples,
            "units": "geometric (c = hbar = 1), one global length unit",
        }


def _preset_from_args(args) -> Optional[PresetSpec]:
    if getattr(args, "preset", None) is None:
        given = [key for keys in PRESET_PARAMETERS.values() for key in keys if getattr(args, key, None) is not None]
        if given:
            raise ConfigError(f"Preset parameters {sorted(set(given))} given without --preset")
        return None
    name = PresetName(args.preset)
    params = {}
    for keys in PRESET_PARAMETERS.values():
        for key in keys:
            value = getattr(args, key, None)
            if value is not None:
                params[key] = value
    try:
        return PresetSpec(name=name, params=params)
    except (ValueError, DomainError) as err:
        raise ConfigError(f"Invalid preset {name.value}: {err}") from err


def _collect_options(args) -> Dict[str, Any]:
    collect = getattr(args, "collect_options", None)
    return dict(collect(args)) if collect is not None else {}


def build_run_config(args, config: Config) -> RunConfig:
    """
    Merge parsed arguments over the loaded config and validate the result.

    :raises ConfigError: conflicting or missing curvature source, non-positive lengths, bad options
    """
    subcommand = Subcommand(args.subcommand)
    preset = _preset_from_args(args)
    curvature_file = getattr(args, "curvature_file", None)
    if preset is not None and curvature_file is not None:
        raise ConfigError("Give either --preset or --curvature-file, not both")
    if getattr(args, "needs_curvature", False) and preset is None and curvature_file is None:
        raise ConfigError(f"{subcommand.value} needs a curvature source: --preset or --curvature-file")
    if getattr(args, "needs_preset", False) and preset is None:
        raise ConfigError(f"{subcommand.value} needs a --preset with a metric chart")

    lengths = {"T": args.T, "sigma": args.sigma, "l0": args.l0}
    for name, value in lengths.items():
        if not value > 0.0:
            raise ConfigError(f"--{name} must be positive, got {value!r}")

    def pick(flag: str, default):
        value = getattr(args, flag, None)
        return default if value is None else value

    try:
        quad = QuadratureOptions(
            method=Method(pick("method", Method.DETERMINISTIC_RADIAL.value)),
            tolerance=pick("tolerance", config.quad.tolerance),
            max_evaluations=pick("max_evaluations", config.quad.max_evaluations),
            seed=pick("seed", config.monte_carlo.seed),
            epsilon_sequence=pick("epsilons", None),
            samples=pick("samples", config.monte_carlo.samples),
            chunk_size=pick("chunk_size", config.monte_carlo.chunk_size),
            workers=pick("workers", config.monte_carlo.workers),
        )
        gap_omega = float(pick("gap_omega", 0.0))
        if gap_omega < 0.0:
            raise ValueError(f"--gap-omega must be nonnegative, got {gap_omega!r}")
        run = RunConfig(
            subcommand=subcommand,
            T=float(args.T),
            sigma=float(args.sigma),
            l0=float(args.l0),
            quad=quad,
            preset=preset,
            curvature_file=curvature_file,
            lambda_coupling=float(pick("lambda_coupling", 1.0)),
            gap_omega=gap_omega,
            state_term=float(pick("state_term", 0.0)),
            log_scale=LogScale(pick("log_scale", LogScale.L0_SQUARED.value)),
            sign=WorldFunctionSign(pick("sign", WorldFunctionSign.PLUS.value)),
            geodesic_tolerance=pick("geodesic_tolerance", config.geodesic.tolerance),
            geodesic_max_iterations=config.geodesic.max_iterations,
            output=OutputFormat(pick("output", OutputFormat.JSON.value)),
            out=getattr(args, "out", None),
            schema_version=config.misc.schema_version,
            options=_collect_options(args),
        )
    except ValueError as err:
        raise ConfigError(str(err)) from err
    logger.debug("Run config: %r", run)
    return run

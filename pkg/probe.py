import argparse
import logging
import sys

from curvprobe import __version__
from curvprobe.config import SCHEMA_VERSION, build_run_config, load_config
from curvprobe.handlers import register_all_handlers
from curvprobe.misc.utils import dumps, error_report
from curvprobe.models.base import ComputeError, ConfigError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_COMPUTE = 1
EXIT_CONFIG = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="probe",
        description="Curvature corrections to the Gaussian-smeared variance of a massless scalar field. "
                    "Geometric units (c = hbar = 1) with one global length unit; curvature in 1/length^2.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--env-file", default=".env", help="dotenv file with configuration defaults")
    parser.add_argument("--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    subparsers = parser.add_subparsers(dest="subcommand", required=True)
    register_all_handlers(subparsers)
    return parser


def _echo(args) -> dict:
    return {key: value for key, value in sorted(vars(args).items())
            if not callable(value) and key not in ("needs_curvature", "needs_preset")}


def _fail(error: Exception, args, code: int, schema_version: str) -> int:
    logger.error("%s: %s", type(error).__name__, error)
    sys.stdout.write(dumps(error_report(schema_version, error, _echo(args))) + "\n")
    return code


def main(argv=None) -> int:
    logging.basicConfig(
        level=logging.INFO,
        format=u'%(filename)s:%(lineno)d #%(levelname)-8s [%(asctime)s] - %(name)s - %(message)s',
        stream=sys.stderr,
    )
    args = build_parser().parse_args(argv)

    schema_version = SCHEMA_VERSION
    try:
        config = load_config(args.env_file)
        schema_version = config.misc.schema_version
        logging.getLogger().setLevel(args.log_level or config.misc.log_level)
        run = build_run_config(args, config)
    except ConfigError as err:
        return _fail(err, args, EXIT_CONFIG, schema_version)

    logger.info("Running %s", run.subcommand.value)
    try:
        return args.handler(run)
    except ConfigError as err:
        return _fail(err, args, EXIT_CONFIG, schema_version)
    except ValueError as err:
        return _fail(ConfigError(str(err)), args, EXIT_CONFIG, schema_version)
    except ComputeError as err:
        return _fail(err, args, EXIT_COMPUTE, schema_version)


if __name__ == '__main__':
    sys.exit(main())

from curvprobe.handlers.detector import register_detector
from curvprobe.handlers.sweep import register_sweep
from curvprobe.handlers.synge import register_synge
from curvprobe.handlers.validate import register_validate
from curvprobe.handlers.variance import register_variance


def register_all_handlers(subparsers):
    register_variance(subparsers)
    register_detector(subparsers)
    register_validate(subparsers)
    register_synge(subparsers)
    register_sweep(subparsers)

"""Curvature corrections to smeared field fluctuations and detector states."""

__version__ = "0.1.0"

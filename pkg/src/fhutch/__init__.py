"""Generalized F-Hutchinson operators on b-metric spaces.

Finite point sets stand in for compact sets. The package computes
Pompeiu-Hausdorff distances, iterates the Hutchinson operator of an affine
IFS to its attractor, and checks the contraction conditions by sampling.
"""

from .compact import PointSet, hausdorff, hausdorff_accelerated
from .config import SystemConfig, parse_config, preset_config
from .errors import (
    ConfigError,
    DimensionError,
    DomainError,
    FhutchError,
    InputError,
    UnsupportedMetricError,
)
from .hutchinson import AffineMap, IfsSystem, hutchinson_step, iterate
from .metric import BMetric, FGenerator, TauGenerator, abs_diff, euclidean, snowflake

__version__ = "0.1.0"

__all__ = [
    "AffineMap",
    "BMetric",
    "ConfigError",
    "DimensionError",
    "DomainError",
    "FGenerator",
    "FhutchError",
    "IfsSystem",
    "InputError",
    "PointSet",
    "SystemConfig",
    "TauGenerator",
    "UnsupportedMetricError",
    "abs_diff",
    "euclidean",
    "hausdorff",
    "hausdorff_accelerated",
    "hutchinson_step",
    "iterate",
    "parse_config",
    "preset_config",
    "snowflake",
]

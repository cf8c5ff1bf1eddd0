"""Pretrial risk-assessment toolkit.

A configurable replica of a nine-factor pretrial scoring pipeline, an
abstaining decision tree/forest that hands uncertain cases to a human with
empirical error rates attached, fairness-audit mathematics, baseline policy
evaluation, a batch CLI, and an HTTP decision service with an append-only
audit log.
"""

from .errors import ConfigError, DataError, PretrialError, ValidationError
from .forest import ForestPrediction, HandoffForestClassifier, fit_forest
from .model_io import load_model, load_model_bytes, model_version
from .tree import (
    HANDOFF,
    HIGH_RISK,
    VERY_LOW_RISK,
    HandoffTreeClassifier,
    LeafStats,
    Prediction,
    fit_tree,
)

__version__ = "0.1.0"

__all__ = [
    "HANDOFF",
    "HIGH_RISK",
    "VERY_LOW_RISK",
    "ConfigError",
    "DataError",
    "ForestPrediction",
    "HandoffForestClassifier",
    "HandoffTreeClassifier",
    "LeafStats",
    "Prediction",
    "PretrialError",
    "ValidationError",
    "__version__",
    "fit_forest",
    "fit_tree",
    "load_model",
    "load_model_bytes",
    "model_version",
]

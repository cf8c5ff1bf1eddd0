"""Configurable replica of the pretrial scoring pipeline."""

from .config import (
    CONFIG_SCHEMA,
    EXCLUSIONS_SCHEMA,
    FACTORS_SCHEMA,
    MATRIX_CELLS,
    OR_MINIMUM,
    OR_NAS,
    OUTCOMES,
    RELEASE_NOT_RECOMMENDED,
    SFPDP_ACM,
    ExclusionConfig,
    ExclusionRule,
    FrameworkMatrix,
    PsaConfig,
    WeightTable,
    bundled_resource_path,
    config_from_dict,
    default_config,
    load_config,
    load_exclusions,
    load_factors_file,
    sf_exclusions,
)
from .engine import (
    RiskAssessment,
    assess,
    compute_raw_scores,
    lookup_recommendation,
    nvca_flag,
    round_half_up,
    scale_scores,
)
from .factors import FactorVector
from .report import render_court_report

__all__ = [
    "CONFIG_SCHEMA",
    "EXCLUSIONS_SCHEMA",
    "FACTORS_SCHEMA",
    "MATRIX_CELLS",
    "OR_MINIMUM",
    "OR_NAS",
    "OUTCOMES",
    "RELEASE_NOT_RECOMMENDED",
    "SFPDP_ACM",
    "ExclusionConfig",
    "ExclusionRule",
    "FactorVector",
    "FrameworkMatrix",
    "PsaConfig",
    "RiskAssessment",
    "WeightTable",
    "assess",
    "bundled_resource_path",
    "compute_raw_scores",
    "config_from_dict",
    "default_config",
    "load_config",
    "load_exclusions",
    "load_factors_file",
    "lookup_recommendation",
    "nvca_flag",
    "render_court_report",
    "round_half_up",
    "scale_scores",
    "sf_exclusions",
]

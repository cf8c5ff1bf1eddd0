from __future__ import annotations

import pytest

from pretrial.datasets import load_population_spec, synthesize_population
from pretrial.psa.config import (
    bundled_resource_path,
    default_config,
    load_factors_file,
    sf_exclusions,
)


@pytest.fixture(scope="session")
def psa_config():
    return default_config()


@pytest.fixture(scope="session")
def psa_config_sf(psa_config):
    return psa_config.with_exclusions(sf_exclusions())


@pytest.fixture(scope="session")
def appendix1():
    """(factors, offenses, metadata) of the bundled sample court report case."""
    return load_factors_file(bundled_resource_path("appendix1_case.json"))


@pytest.fixture(scope="session")
def figure2_records():
    """The two-feature narrative population: a confident very-low-risk block at
    ages 33-60 with no prior failures, a chronic 4+ prior-failure block, and
    ambiguous half-and-half regions elsewhere."""
    spec = load_population_spec(bundled_resource_path("figure2.json"))
    return synthesize_population(spec, 40_000, seed=11)


@pytest.fixture(scope="session")
def figure2_tree_params():
    return dict(
        target_outcome="fta",
        min_cluster_size=4500,
        max_depth=3,
        high_risk_max_fpr=0.65,
        very_low_max_fnr=0.2,
        feature_priority=("prior_fta", "age"),
    )

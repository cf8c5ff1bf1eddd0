from __future__ import annotations

import math

import numpy as np
import pytest

from pretrial.datasets import (
    Distribution,
    GroupSpec,
    PopulationSpec,
    dataset_to_csv,
    load_population_spec,
    synthesize_population,
)
from pretrial.errors import ConfigError
from pretrial.psa.config import bundled_resource_path


def one_group_spec(base_rate: float, seed: int = 7, link=None) -> PopulationSpec:
    return PopulationSpec(
        groups=(
            GroupSpec(
                name="main",
                weight=1.0,
                base_rates={"fta": base_rate},
                features={
                    "age": Distribution(kind="uniform_int", low=18, high=70),
                    "prior_fta": Distribution(
                        kind="choice", values=(0, 1, 2, 3), weights=(0.6, 0.2, 0.1, 0.1)
                    ),
                },
                link=link or {},
            ),
        ),
        seed=seed,
    )


def test_base_rate_converges_at_scale():
    records = synthesize_population(one_group_spec(0.148), 100_000)
    rate = sum(r.outcome("fta") for r in records) / len(records)
    assert rate == pytest.approx(0.148, abs=0.01)


def test_zero_base_rate_yields_zero_positives():
    records = synthesize_population(one_group_spec(0.0), 5000)
    assert not any(r.outcome("fta") for r in records)


def test_same_seed_is_byte_identical():
    spec = load_population_spec(bundled_resource_path("kentucky_like.json"))
    first = dataset_to_csv(synthesize_population(spec, 2000), spec.schema())
    second = dataset_to_csv(synthesize_population(spec, 2000), spec.schema())
    assert first.encode() == second.encode()


def test_all_records_released_with_outcomes():
    records = synthesize_population(one_group_spec(0.3), 500)
    assert all(r.released for r in records)
    assert all(r.has_outcome("fta") for r in records)


def test_logistic_link_still_hits_base_rate_and_correlates():
    spec = one_group_spec(0.148, link={"prior_fta": 1.2})
    records = synthesize_population(spec, 60_000)
    rate = sum(r.outcome("fta") for r in records) / len(records)
    assert rate == pytest.approx(0.148, abs=0.01)
    with_priors = [r for r in records if r.features["prior_fta"] >= 2]
    without = [r for r in records if r.features["prior_fta"] == 0]
    rate_with = sum(r.outcome("fta") for r in with_priors) / len(with_priors)
    rate_without = sum(r.outcome("fta") for r in without) / len(without)
    assert rate_with > rate_without + 0.05


def test_group_counts_within_three_sigma_of_multinomial():
    spec = PopulationSpec(
        groups=(
            GroupSpec(
                name="a",
                weight=0.3,
                base_rates={"fta": 0.1},
                features={"age": Distribution(kind="constant", value=30)},
                protected={"race": "black"},
            ),
            GroupSpec(
                name="b",
                weight=0.7,
                base_rates={"fta": 0.2},
                features={"age": Distribution(kind="constant", value=40)},
                protected={"race": "white"},
            ),
        ),
        seed=19,
    )
    n = 20_000
    records = synthesize_population(spec, n)
    count_a = sum(1 for r in records if (r.protected or {}).get("race") == "black")
    sigma = math.sqrt(n * 0.3 * 0.7)
    assert abs(count_a - 0.3 * n) <= 3 * sigma


def test_two_group_rates_recovered():
    spec = PopulationSpec(
        groups=(
            GroupSpec(
                name="low",
                weight=0.5,
                base_rates={"fta": 0.10},
                features={"age": Distribution(kind="uniform_int", low=18, high=70)},
                protected={"race": "a"},
            ),
            GroupSpec(
                name="high",
                weight=0.5,
                base_rates={"fta": 0.20},
                features={"age": Distribution(kind="uniform_int", low=18, high=70)},
                protected={"race": "b"},
            ),
        ),
        seed=23,
    )
    records = synthesize_population(spec, 20_000)
    by_group: dict[str, list[bool]] = {"a": [], "b": []}
    for record in records:
        by_group[(record.protected or {})["race"]].append(record.outcome("fta"))
    assert np.mean(by_group["a"]) == pytest.approx(0.10, abs=0.02)
    assert np.mean(by_group["b"]) == pytest.approx(0.20, abs=0.02)


def test_invalid_specs_rejected():
    with pytest.raises(ConfigError, match="sum to 1"):
        PopulationSpec(
            groups=(
                GroupSpec(
                    name="only",
                    weight=0.5,
                    base_rates={"fta": 0.1},
                    features={"age": Distribution(kind="constant", value=30)},
                ),
            )
        ).validate()
    with pytest.raises(ConfigError, match="base rate"):
        PopulationSpec(
            groups=(
                GroupSpec(
                    name="only",
                    weight=1.0,
                    base_rates={"fta": 1.4},
                    features={"age": Distribution(kind="constant", value=30)},
                ),
            )
        ).validate()
    with pytest.raises(ConfigError, match="n must be >= 1"):
        synthesize_population(one_group_spec(0.1), 0)

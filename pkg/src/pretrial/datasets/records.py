"""Case records, dataset schemas, and basic dataset operations."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from ..errors import ValidationError
from ..psa.factors import FactorVector

OUTCOME_NAMES = ("fta", "nca", "nvca")
RESERVED_COLUMNS = ("case_id", "released")

FeatureValue = float | int | str


@dataclass(frozen=True)
class CaseRecord:
    """One defendant's case: features, release status, observed outcomes.

    Outcomes exist only for released defendants; there is no counterfactual
    for the detained, so a record with outcomes and released=False is invalid.
    """

    case_id: str
    features: Mapping[str, FeatureValue]
    released: bool
    protected: Mapping[str, str] | None = None
    outcomes: Mapping[str, bool] | None = None
    psa_factors: FactorVector | None = None

    def __post_init__(self) -> None:
        if self.outcomes is not None and not self.released:
            raise ValidationError(
                f"record {self.case_id!r} has outcomes but released=false; outcomes "
                "are observable only for released defendants",
                invariant="released_only_outcomes",
            )

    def outcome(self, name: str) -> bool:
        if self.outcomes is None or name not in self.outcomes:
            raise ValidationError(
                f"record {self.case_id!r} has no {name!r} outcome label"
            )
        return bool(self.outcomes[name])

    def has_outcome(self, name: str) -> bool:
        return self.outcomes is not None and name in self.outcomes


@dataclass(frozen=True)
class FeatureSpec:
    name: str
    kind: str  # "numeric" | "categorical"
    low: float | None = None
    high: float | None = None
    levels: tuple[str, ...] | None = None

    def check(self, value: FeatureValue) -> None:
        if self.kind == "numeric":
            if isinstance(value, str) or isinstance(value, bool):
                raise ValidationError(f"{self.name} must be numeric, got {value!r}")
            if self.low is not None and value < self.low:
                raise ValidationError(f"{self.name}={value} below minimum {self.low}")
            if self.high is not None and value > self.high:
                raise ValidationError(f"{self.name}={value} above maximum {self.high}")
        elif self.kind == "categorical":
            if not isinstance(value, str):
                raise ValidationError(f"{self.name} must be categorical, got {value!r}")
            if self.levels is not None and value not in self.levels:
                raise ValidationError(
                    f"{self.name}={value!r} is not one of {list(self.levels)}"
                )
        else:
            raise ValidationError(f"unknown feature kind {self.kind!r}")


@dataclass(frozen=True)
class DatasetSchema:
    features: tuple[FeatureSpec, ...]
    protected: tuple[str, ...] = ()
    outcomes: tuple[str, ...] = OUTCOME_NAMES

    def __post_init__(self) -> None:
        names = [spec.name for spec in self.features]
        names += list(self.protected) + list(self.outcomes) + list(RESERVED_COLUMNS)
        duplicates = {name for name in names if names.count(name) > 1}
        if duplicates:
            raise ValidationError(f"duplicate column name(s): {sorted(duplicates)}")

    @property
    def columns(self) -> tuple[str, ...]:
        return (
            *RESERVED_COLUMNS,
            *(spec.name for spec in self.features),
            *self.protected,
            *self.outcomes,
        )

    def feature(self, name: str) -> FeatureSpec:
        for spec in self.features:
            if spec.name == name:
                return spec
        raise ValidationError(f"schema has no feature {name!r}")


@dataclass(frozen=True)
class DatasetSummary:
    n_records: int
    n_released: int
    outcome_rates: Mapping[str, tuple[int, int, float]]  # name -> (eligible, positives, rate)
    group_rates: Mapping[tuple[tuple[str, str], ...], Mapping[str, tuple[int, int, float]]] = field(
        default_factory=dict
    )


def filter_training_eligible(
    records: Iterable[CaseRecord], outcomes: Sequence[str] = OUTCOME_NAMES
) -> list[CaseRecord]:
    """Released records carrying every requested outcome label. Idempotent."""
    return [
        record
        for record in records
        if record.released and all(record.has_outcome(name) for name in outcomes)
    ]


def split(
    records: Sequence[CaseRecord],
    test_fraction: float,
    seed: int,
    stratify_on: str | None = None,
) -> tuple[list[CaseRecord], list[CaseRecord]]:
    """Disjoint, exhaustive train/test split; deterministic for a fixed seed."""
    if not (0.0 <= test_fraction <= 1.0):
        raise ValidationError(f"test_fraction must be in [0, 1], got {test_fraction}")
    rng = np.random.default_rng(seed)
    indices = np.arange(len(records))
    test_idx: set[int] = set()
    if stratify_on is None:
        shuffled = rng.permutation(indices)
        n_test = round(len(records) * test_fraction)
        test_idx = set(shuffled[:n_test].tolist())
    else:
        strata: dict[bool, list[int]] = {}
        for i, record in enumerate(records):
            strata.setdefault(record.outcome(stratify_on), []).append(i)
        for key in sorted(strata):
            members = np.array(strata[key])
            shuffled = members[rng.permutation(len(members))]
            n_test = round(len(members) * test_fraction)
            test_idx.update(shuffled[:n_test].tolist())
    train = [records[i] for i in indices if i not in test_idx]
    test = [records[i] for i in indices if i in test_idx]
    return train, test


def _rates(records: Sequence[CaseRecord]) -> dict[str, tuple[int, int, float]]:
    rates: dict[str, tuple[int, int, float]] = {}
    for name in OUTCOME_NAMES:
        eligible = [r for r in records if r.has_outcome(name)]
        if not eligible:
            continue
        positives = sum(r.outcome(name) for r in eligible)
        rates[name] = (len(eligible), positives, positives / len(eligible))
    return rates


def summarize(records: Sequence[CaseRecord]) -> DatasetSummary:
    """Counts and positive rates, overall and per protected group."""
    if not records:
        raise ValidationError("no eligible records")
    groups: dict[tuple[tuple[str, str], ...], list[CaseRecord]] = {}
    for record in records:
        if record.protected:
            key = tuple(sorted(record.protected.items()))
            groups.setdefault(key, []).append(record)
    return DatasetSummary(
        n_records=len(records),
        n_released=sum(r.released for r in records),
        outcome_rates=_rates(records),
        group_rates={key: _rates(members) for key, members in sorted(groups.items())},
    )


def schema_from_dict(raw: Mapping[str, Any]) -> DatasetSchema:
    if raw.get("schema") != "dataset-schema/v1":
        raise ValidationError(
            f"expected schema 'dataset-schema/v1', got {raw.get('schema')!r}"
        )
    features = []
    for spec in raw.get("features", ()):
        features.append(
            FeatureSpec(
                name=str(spec["name"]),
                kind=str(spec.get("kind", "numeric")),
                low=spec.get("low"),
                high=spec.get("high"),
                levels=tuple(spec["levels"]) if spec.get("levels") else None,
            )
        )
    return DatasetSchema(
        features=tuple(features),
        protected=tuple(raw.get("protected", ())),
        outcomes=tuple(raw.get("outcomes", OUTCOME_NAMES)),
    )


def schema_to_dict(schema: DatasetSchema) -> dict[str, Any]:
    features = []
    for spec in schema.features:
        entry: dict[str, Any] = {"name": spec.name, "kind": spec.kind}
        if spec.low is not None:
            entry["low"] = spec.low
        if spec.high is not None:
            entry["high"] = spec.high
        if spec.levels is not None:
            entry["levels"] = list(spec.levels)
        features.append(entry)
    return {
        "schema": "dataset-schema/v1",
        "features": features,
        "protected": list(schema.protected),
        "outcomes": list(schema.outcomes),
    }

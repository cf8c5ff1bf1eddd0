"""Seeded synthetic population generator.

Groups are mixture components, each with its own feature distributions and
per-outcome base rates. Outcome probabilities follow a logistic link over
standardized features, with the intercept solved numerically so the group's
realized mean probability hits the configured base rate exactly; a group with
no link weights degenerates to a constant-rate draw. Everything is released
with outcomes, so the output is training-eligible by construction.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from ..errors import ConfigError
from .records import CaseRecord, DatasetSchema, FeatureSpec

POPULATION_SCHEMA = "population-spec/v1"


@dataclass(frozen=True)
class Distribution:
    """A one-dimensional feature sampler described as data."""

    kind: str  # "uniform_int" | "choice" | "constant" | "normal_int"
    low: int = 0
    high: int = 0
    values: tuple[float, ...] = ()
    weights: tuple[float, ...] = ()
    value: float = 0.0
    mean: float = 0.0
    sd: float = 1.0

    def validate(self, name: str) -> None:
        if self.kind == "uniform_int":
            if self.low > self.high:
                raise ConfigError(f"{name}: uniform_int needs low <= high")
        elif self.kind == "choice":
            if not self.values:
                raise ConfigError(f"{name}: choice needs values")
            if self.weights and len(self.weights) != len(self.values):
                raise ConfigError(f"{name}: weights must match values")
            if self.weights and abs(sum(self.weights) - 1.0) > 1e-9:
                raise ConfigError(f"{name}: choice weights must sum to 1")
        elif self.kind == "normal_int":
            if self.sd <= 0:
                raise ConfigError(f"{name}: normal_int needs sd > 0")
            if self.low > self.high:
                raise ConfigError(f"{name}: normal_int needs low <= high")
        elif self.kind != "constant":
            raise ConfigError(f"{name}: unknown distribution kind {self.kind!r}")

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.kind == "uniform_int":
            return rng.integers(self.low, self.high + 1, size=size).astype(float)
        if self.kind == "choice":
            weights = np.array(self.weights) if self.weights else None
            return rng.choice(np.array(self.values, dtype=float), size=size, p=weights)
        if self.kind == "constant":
            return np.full(size, float(self.value))
        draws = np.rint(rng.normal(self.mean, self.sd, size=size))
        return np.clip(draws, self.low, self.high)


@dataclass(frozen=True)
class GroupSpec:
    name: str
    weight: float
    base_rates: Mapping[str, float]
    features: Mapping[str, Distribution]
    link: Mapping[str, float] = field(default_factory=dict)
    protected: Mapping[str, str] | None = None

    def validate(self) -> None:
        if self.weight < 0:
            raise ConfigError(f"group {self.name!r}: weight must be non-negative")
        if not self.features:
            raise ConfigError(f"group {self.name!r}: needs at least one feature")
        for outcome, rate in self.base_rates.items():
            if not (0.0 <= rate <= 1.0):
                raise ConfigError(
                    f"group {self.name!r}: base rate for {outcome!r} must be in [0, 1]"
                )
        for feature in self.link:
            if feature not in self.features:
                raise ConfigError(
                    f"group {self.name!r}: link references unknown feature {feature!r}"
                )
        for name, dist in self.features.items():
            dist.validate(f"group {self.name!r} feature {name!r}")


@dataclass(frozen=True)
class PopulationSpec:
    groups: tuple[GroupSpec, ...]
    seed: int = 0

    def validate(self) -> None:
        if not self.groups:
            raise ConfigError("population spec needs at least one group")
        for group in self.groups:
            group.validate()
        total = sum(group.weight for group in self.groups)
        if abs(total - 1.0) > 1e-9:
            raise ConfigError(f"group weights must sum to 1, got {total}")
        names = [g.name for g in self.groups]
        if len(set(names)) != len(names):
            raise ConfigError("group names must be unique")
        first = set(self.groups[0].features)
        for group in self.groups[1:]:
            if set(group.features) != first:
                raise ConfigError("all groups must declare the same feature names")

    @property
    def feature_names(self) -> tuple[str, ...]:
        return tuple(sorted(self.groups[0].features))

    def schema(self) -> DatasetSchema:
        protected = sorted({k for g in self.groups for k in (g.protected or {})})
        outcomes = sorted({o for g in self.groups for o in g.base_rates})
        return DatasetSchema(
            features=tuple(FeatureSpec(name=n, kind="numeric") for n in self.feature_names),
            protected=tuple(protected),
            outcomes=tuple(outcomes),
        )


def _solve_intercept(target: float, offsets: np.ndarray) -> float:
    """Bisection for b with mean(sigmoid(b + offsets)) = target."""
    low, high = -40.0, 40.0
    for _ in range(100):
        mid = (low + high) / 2.0
        if np.mean(1.0 / (1.0 + np.exp(-(mid + offsets)))) < target:
            low = mid
        else:
            high = mid
    return (low + high) / 2.0


def _group_probabilities(
    group: GroupSpec, outcome: str, features: dict[str, np.ndarray]
) -> np.ndarray:
    size = len(next(iter(features.values())))
    rate = group.base_rates[outcome]
    if rate <= 0.0:
        return np.zeros(size)
    if rate >= 1.0:
        return np.ones(size)
    if not group.link:
        return np.full(size, rate)
    offsets = np.zeros(size)
    for name, weight in sorted(group.link.items()):
        column = features[name]
        sd = column.std()
        z = (column - column.mean()) / sd if sd > 0 else np.zeros(size)
        offsets += weight * z
    intercept = _solve_intercept(rate, offsets)
    return 1.0 / (1.0 + np.exp(-(intercept + offsets)))


def synthesize_population(spec: PopulationSpec, n: int, seed: int | None = None) -> list[CaseRecord]:
    """Draws ``n`` released records; byte-identical output for a fixed seed."""
    spec.validate()
    if n < 1:
        raise ConfigError(f"n must be >= 1, got {n}")
    rng = np.random.default_rng(spec.seed if seed is None else seed)
    weights = np.array([group.weight for group in spec.groups])
    assignment = rng.choice(len(spec.groups), size=n, p=weights)

    feature_names = spec.feature_names
    columns = {name: np.zeros(n) for name in feature_names}
    outcome_names = sorted({o for g in spec.groups for o in g.base_rates})
    outcome_columns = {name: np.zeros(n, dtype=bool) for name in outcome_names}
    outcome_known = {name: np.zeros(n, dtype=bool) for name in outcome_names}

    for index, group in enumerate(spec.groups):
        member_idx = np.flatnonzero(assignment == index)
        if member_idx.size == 0:
            continue
        group_features = {
            name: group.features[name].sample(rng, member_idx.size)
            for name in feature_names
        }
        for name in feature_names:
            columns[name][member_idx] = group_features[name]
        for outcome in outcome_names:
            if outcome not in group.base_rates:
                continue
            probabilities = _group_probabilities(group, outcome, group_features)
            draws = rng.random(member_idx.size) < probabilities
            outcome_columns[outcome][member_idx] = draws
            outcome_known[outcome][member_idx] = True

    records: list[CaseRecord] = []
    width = len(str(n))
    for i in range(n):
        group = spec.groups[assignment[i]]
        features = {}
        for name in feature_names:
            value = columns[name][i]
            features[name] = int(value) if float(value).is_integer() else float(value)
        outcomes = {
            name: bool(outcome_columns[name][i])
            for name in outcome_names
            if outcome_known[name][i]
        }
        records.append(
            CaseRecord(
                case_id=f"synth-{i:0{width}d}",
                features=features,
                released=True,
                protected=dict(group.protected) if group.protected else None,
                outcomes=outcomes or None,
            )
        )
    return records


def _distribution_from_dict(raw: Mapping[str, Any], name: str) -> Distribution:
    kind = raw.get("kind")
    if not isinstance(kind, str):
        raise ConfigError(f"{name}: distribution needs a kind")
    dist = Distribution(
        kind=kind,
        low=int(raw.get("low", 0)),
        high=int(raw.get("high", 0)),
        values=tuple(float(v) for v in raw.get("values", ())),
        weights=tuple(float(w) for w in raw.get("weights", ())),
        value=float(raw.get("value", 0.0)),
        mean=float(raw.get("mean", 0.0)),
        sd=float(raw.get("sd", 1.0)),
    )
    dist.validate(name)
    return dist


def population_from_dict(raw: Mapping[str, Any]) -> PopulationSpec:
    if raw.get("schema") != POPULATION_SCHEMA:
        raise ConfigError(f"expected schema {POPULATION_SCHEMA!r}, got {raw.get('schema')!r}")
    groups = []
    for group_raw in raw.get("groups", ()):
        name = str(group_raw.get("name", f"group-{len(groups)}"))
        features = {
            str(fname): _distribution_from_dict(dist, f"group {name!r} feature {fname!r}")
            for fname, dist in group_raw.get("features", {}).items()
        }
        groups.append(
            GroupSpec(
                name=name,
                weight=float(group_raw.get("weight", 0.0)),
                base_rates={
                    str(k): float(v) for k, v in group_raw.get("base_rates", {}).items()
                },
                features=features,
                link={str(k): float(v) for k, v in group_raw.get("link", {}).items()},
                protected=(
                    {str(k): str(v) for k, v in group_raw["protected"].items()}
                    if group_raw.get("protected")
                    else None
                ),
            )
        )
    spec = PopulationSpec(groups=tuple(groups), seed=int(raw.get("seed", 0)))
    spec.validate()
    return spec


def load_population_spec(path: str | Path) -> PopulationSpec:
    with open(path, encoding="utf-8") as handle:
        return population_from_dict(json.load(handle))

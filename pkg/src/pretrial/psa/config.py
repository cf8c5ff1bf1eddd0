"""Weight tables, the decision-framework matrix, and exclusion rules.

All three ship as one self-contained JSON document (schema ``psa-config/v1``)
so a jurisdiction can swap weights or add exclusion rules without touching
code. The bundled default transcribes the publicly documented point values.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Any, Mapping, Sequence

from ..errors import ConfigError
from .factors import FactorVector

CONFIG_SCHEMA = "psa-config/v1"
EXCLUSIONS_SCHEMA = "psa-exclusions/v1"
FACTORS_SCHEMA = "psa-factors/v1"

OR_NAS = "OR - NAS"
OR_MINIMUM = "OR - MINIMUM"
SFPDP_ACM = "SFPDP - ACM"
RELEASE_NOT_RECOMMENDED = "Release Not Recommended"
MATRIX_CELLS = (OR_NAS, OR_MINIMUM, SFPDP_ACM, RELEASE_NOT_RECOMMENDED)

OUTCOMES = ("fta", "nca", "nvca")

_MIN_POINTS = 0
_MAX_POINTS = 4


def _check_points(value: Any, where: str) -> int:
    if not isinstance(value, int) or isinstance(value, bool):
        raise ConfigError(f"{where}: points must be an integer, got {value!r}")
    if not (_MIN_POINTS <= value <= _MAX_POINTS):
        raise ConfigError(
            f"{where}: points must be within [{_MIN_POINTS}, {_MAX_POINTS}], got {value}"
        )
    return value


@dataclass(frozen=True)
class BooleanItem:
    """Scores ``points`` when the boolean factor is true."""

    factor: str
    points: int

    @property
    def max_points(self) -> int:
        return self.points

    def contribution(self, factors: FactorVector, smoothing: bool) -> int:
        return self.points if getattr(factors, self.factor) else 0


@dataclass(frozen=True)
class CountBandItem:
    """Scores by count band; a band covers counts >= its floor up to the next."""

    factor: str
    bands: tuple[tuple[int, int], ...]  # (count floor, points), ascending floors

    @property
    def max_points(self) -> int:
        return max(points for _, points in self.bands)

    def contribution(self, factors: FactorVector, smoothing: bool) -> int:
        count = getattr(factors, self.factor)
        points = 0
        for floor, band_points in self.bands:
            if count >= floor:
                points = band_points
        return points


@dataclass(frozen=True)
class AgeUnderItem:
    """Scores ``points`` below the age threshold.

    In smoothing mode the step becomes a linear ramp: full points at or below
    ``ramp_full``, zero at or above ``ramp_zero``, exact rationals between.
    """

    factor: str
    threshold: int
    points: int
    ramp_full: int
    ramp_zero: int

    @property
    def max_points(self) -> int:
        return self.points

    def contribution(self, factors: FactorVector, smoothing: bool) -> int | Fraction:
        age = getattr(factors, self.factor)
        if not smoothing:
            return self.points if age < self.threshold else 0
        if age <= self.ramp_full:
            return self.points
        if age >= self.ramp_zero:
            return 0
        return Fraction(self.points * (self.ramp_zero - age), self.ramp_zero - self.ramp_full)


WeightItem = BooleanItem | CountBandItem | AgeUnderItem


def _parse_item(raw: Mapping[str, Any], where: str) -> WeightItem:
    factor = raw.get("factor")
    if not isinstance(factor, str):
        raise ConfigError(f"{where}: item is missing a factor name")
    kind = raw.get("kind")
    if kind == "boolean":
        return BooleanItem(factor=factor, points=_check_points(raw.get("points"), where))
    if kind == "count_bands":
        bands_raw = raw.get("bands")
        if not isinstance(bands_raw, Sequence) or not bands_raw:
            raise ConfigError(f"{where}: count_bands item needs a non-empty bands list")
        bands: list[tuple[int, int]] = []
        for band in bands_raw:
            floor = band.get("count")
            if not isinstance(floor, int) or floor < 0:
                raise ConfigError(f"{where}: band count must be a non-negative integer")
            bands.append((floor, _check_points(band.get("points"), where)))
        floors = [floor for floor, _ in bands]
        if floors != sorted(floors) or len(set(floors)) != len(floors):
            raise ConfigError(f"{where}: band counts must be strictly ascending")
        return CountBandItem(factor=factor, bands=tuple(bands))
    if kind == "age_under":
        ramp = raw.get("smoothing_ramp") or {}
        item = AgeUnderItem(
            factor=factor,
            threshold=int(raw.get("threshold", 0)),
            points=_check_points(raw.get("points"), where),
            ramp_full=int(ramp.get("full_at", raw.get("threshold", 0) - 2)),
            ramp_zero=int(ramp.get("zero_at", raw.get("threshold", 0) + 2)),
        )
        if item.ramp_full >= item.ramp_zero:
            raise ConfigError(f"{where}: smoothing ramp must have full_at < zero_at")
        return item
    raise ConfigError(f"{where}: unknown item kind {kind!r}")


@dataclass(frozen=True)
class OutcomeWeights:
    """Point items plus either a raw-to-scale conversion or a flag threshold."""

    outcome: str
    items: tuple[WeightItem, ...]
    max_raw: int
    conversion: tuple[int, ...] | None = None  # index = raw score
    flag_threshold: int | None = None

    def validate(self) -> None:
        where = f"weights.{self.outcome}"
        declared_max = sum(item.max_points for item in self.items)
        if declared_max != self.max_raw:
            raise ConfigError(
                f"{where}: max_raw {self.max_raw} does not match the items' "
                f"maximum total {declared_max}"
            )
        if self.outcome == "nvca":
            if self.flag_threshold is None:
                raise ConfigError(f"{where}: nvca requires a flag_threshold")
            if not (0 < self.flag_threshold <= self.max_raw):
                raise ConfigError(
                    f"{where}: flag_threshold must be within (0, {self.max_raw}]"
                )
            return
        if self.conversion is None:
            raise ConfigError(f"{where}: missing conversion table")
        if len(self.conversion) != self.max_raw + 1:
            raise ConfigError(
                f"{where}: conversion must be total over raw scores 0..{self.max_raw}"
            )
        if any(not (1 <= s <= 6) for s in self.conversion):
            raise ConfigError(f"{where}: conversion values must be scale points 1..6")
        if any(b < a for a, b in zip(self.conversion, self.conversion[1:])):
            raise ConfigError(f"{where}: conversion must be monotone nondecreasing")
        if set(self.conversion) != set(range(1, 7)):
            raise ConfigError(f"{where}: conversion range must be exactly {{1..6}}")


@dataclass(frozen=True)
class WeightTable:
    fta: OutcomeWeights
    nca: OutcomeWeights
    nvca: OutcomeWeights

    def validate(self) -> None:
        for weights in (self.fta, self.nca, self.nvca):
            weights.validate()
        if self.nca.max_raw != 13:
            raise ConfigError("weights.nca: raw maximum must be 13")
        age_items = [item for item in self.nca.items if isinstance(item, AgeUnderItem)]
        if len(age_items) != 1 or age_items[0].threshold != 23 or age_items[0].points != 2:
            raise ConfigError(
                "weights.nca: exactly one age-under-23 item worth 2 points is required"
            )


@dataclass(frozen=True)
class FrameworkMatrix:
    """6x6 lookup from (FTA scale, NCA scale) to a recommendation cell.

    ``None`` marks a cell the weight tables should never reach; landing on one
    is a configuration mismatch, not a defendant outcome.
    """

    cells: tuple[tuple[str | None, ...], ...]

    def validate(self) -> None:
        if len(self.cells) != 6 or any(len(row) != 6 for row in self.cells):
            raise ConfigError("matrix must be 6x6")
        for row in self.cells:
            for cell in row:
                if cell is not None and cell not in MATRIX_CELLS:
                    raise ConfigError(f"unknown matrix cell {cell!r}")

    def cell(self, scaled_fta: int, scaled_nca: int) -> str | None:
        if not (1 <= scaled_fta <= 6 and 1 <= scaled_nca <= 6):
            raise ConfigError(
                f"scale values must be 1..6, got FTA {scaled_fta}, NCA {scaled_nca}"
            )
        return self.cells[scaled_fta - 1][scaled_nca - 1]


@dataclass(frozen=True)
class ExclusionRule:
    """Forces "Release Not Recommended" when it matches.

    A rule matches when any booked offense starts with one of its prefixes
    (or it declares none) and every factor_equals test passes.
    """

    name: str
    offense_prefixes: tuple[str, ...] = ()
    factor_equals: tuple[tuple[str, bool], ...] = ()

    def matches(self, factors: FactorVector, offenses: Sequence[str]) -> bool:
        if self.offense_prefixes:
            normalized = [offense.strip() for offense in offenses]
            if not any(
                code.startswith(prefix)
                for code in normalized
                for prefix in self.offense_prefixes
            ):
                return False
        elif not self.factor_equals:
            return False
        return all(getattr(factors, name) == value for name, value in self.factor_equals)


@dataclass(frozen=True)
class ExclusionConfig:
    enabled: bool = False
    rules: tuple[ExclusionRule, ...] = ()

    def first_match(
        self, factors: FactorVector, offenses: Sequence[str]
    ) -> ExclusionRule | None:
        if not self.enabled:
            return None
        for rule in self.rules:
            if rule.matches(factors, offenses):
                return rule
        return None


@dataclass(frozen=True)
class PsaConfig:
    weights: WeightTable
    matrix: FrameworkMatrix
    exclusions: ExclusionConfig = field(default_factory=ExclusionConfig)
    name: str = "unnamed"

    def validate(self) -> None:
        self.weights.validate()
        self.matrix.validate()

    def with_exclusions(self, exclusions: ExclusionConfig) -> "PsaConfig":
        return PsaConfig(
            weights=self.weights, matrix=self.matrix, exclusions=exclusions, name=self.name
        )


def _parse_outcome_weights(outcome: str, raw: Mapping[str, Any]) -> OutcomeWeights:
    where = f"weights.{outcome}"
    items_raw = raw.get("items")
    if not isinstance(items_raw, Sequence) or not items_raw:
        raise ConfigError(f"{where}: needs a non-empty items list")
    items = tuple(_parse_item(item, where) for item in items_raw)
    max_raw = raw.get("max_raw")
    if not isinstance(max_raw, int):
        raise ConfigError(f"{where}: max_raw must be an integer")
    conversion = None
    if "conversion" in raw:
        table = raw["conversion"]
        try:
            conversion = tuple(int(table[str(i)]) for i in range(max_raw + 1))
        except KeyError as exc:
            raise ConfigError(f"{where}: conversion is missing raw score {exc}") from exc
    flag_threshold = raw.get("flag_threshold")
    return OutcomeWeights(
        outcome=outcome,
        items=items,
        max_raw=max_raw,
        conversion=conversion,
        flag_threshold=flag_threshold,
    )


def _parse_exclusions(raw: Mapping[str, Any]) -> ExclusionConfig:
    rules = []
    for index, rule_raw in enumerate(raw.get("rules", ())):
        name = rule_raw.get("name") or f"rule-{index}"
        prefixes = tuple(str(p) for p in rule_raw.get("offense_prefixes", ()))
        factor_equals = tuple(
            (str(key), bool(value))
            for key, value in sorted(rule_raw.get("factor_equals", {}).items())
        )
        rules.append(
            ExclusionRule(name=name, offense_prefixes=prefixes, factor_equals=factor_equals)
        )
    return ExclusionConfig(enabled=bool(raw.get("enabled", False)), rules=tuple(rules))


def config_from_dict(raw: Mapping[str, Any]) -> PsaConfig:
    if raw.get("schema") != CONFIG_SCHEMA:
        raise ConfigError(
            f"expected schema {CONFIG_SCHEMA!r}, got {raw.get('schema')!r}"
        )
    weights_raw = raw.get("weights")
    if not isinstance(weights_raw, Mapping):
        raise ConfigError("config is missing the weights section")
    missing = [o for o in OUTCOMES if o not in weights_raw]
    if missing:
        raise ConfigError(f"weights section is missing outcome(s): {missing}")
    weights = WeightTable(
        fta=_parse_outcome_weights("fta", weights_raw["fta"]),
        nca=_parse_outcome_weights("nca", weights_raw["nca"]),
        nvca=_parse_outcome_weights("nvca", weights_raw["nvca"]),
    )
    matrix_raw = raw.get("matrix")
    if not isinstance(matrix_raw, Sequence):
        raise ConfigError("config is missing the matrix section")
    matrix = FrameworkMatrix(cells=tuple(tuple(row) for row in matrix_raw))
    exclusions = _parse_exclusions(raw.get("exclusions", {}))
    config = PsaConfig(
        weights=weights,
        matrix=matrix,
        exclusions=exclusions,
        name=str(raw.get("name", "unnamed")),
    )
    config.validate()
    return config


def load_config(path: str | Path) -> PsaConfig:
    with open(path, encoding="utf-8") as handle:
        return config_from_dict(json.load(handle))


def load_exclusions(path: str | Path) -> ExclusionConfig:
    with open(path, encoding="utf-8") as handle:
        raw = json.load(handle)
    if raw.get("schema") != EXCLUSIONS_SCHEMA:
        raise ConfigError(
            f"expected schema {EXCLUSIONS_SCHEMA!r}, got {raw.get('schema')!r}"
        )
    return _parse_exclusions(raw)


def _resource_text(name: str) -> str:
    return resources.files("pretrial.resources").joinpath(name).read_text(encoding="utf-8")


def default_config() -> PsaConfig:
    """The bundled transcription of the publicly documented tables."""
    return config_from_dict(json.loads(_resource_text("psa_default.json")))


def sf_exclusions() -> ExclusionConfig:
    """The bundled San Francisco exclusion fixture."""
    raw = json.loads(_resource_text("sf_exclusions.json"))
    return _parse_exclusions(raw)


def load_factors_file(path: str | Path) -> tuple[FactorVector, list[str], dict[str, str]]:
    """Reads a factors document: (factors, booked offenses, case metadata)."""
    with open(path, encoding="utf-8") as handle:
        raw = json.load(handle)
    if raw.get("schema") != FACTORS_SCHEMA:
        raise ConfigError(f"expected schema {FACTORS_SCHEMA!r}, got {raw.get('schema')!r}")
    factors = FactorVector.from_mapping(raw.get("factors", {}))
    offenses = [str(code) for code in raw.get("offenses", ())]
    metadata = {str(k): str(v) for k, v in raw.get("metadata", {}).items()}
    return factors, offenses, metadata


def bundled_resource_path(name: str) -> Path:
    """Filesystem path of a bundled resource (for CLI/test fixtures)."""
    return Path(str(resources.files("pretrial.resources").joinpath(name)))

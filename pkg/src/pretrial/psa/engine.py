"""Deterministic scoring pipeline: factors -> raw -> scaled -> recommendation."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from ..errors import ConfigError
from .config import (
    RELEASE_NOT_RECOMMENDED,
    ExclusionConfig,
    FrameworkMatrix,
    OutcomeWeights,
    PsaConfig,
    WeightTable,
)
from .factors import FactorVector

RawScore = int | Fraction


@dataclass(frozen=True)
class RiskAssessment:
    raw_fta: RawScore
    raw_nca: RawScore
    raw_nvca: RawScore
    scaled_fta: int
    scaled_nca: int
    nvca_flag: bool
    recommendation: str
    step2_applied: bool
    step2_rule: str | None = None

    def as_dict(self) -> dict:
        return {
            "raw_fta": _raw_repr(self.raw_fta),
            "raw_nca": _raw_repr(self.raw_nca),
            "raw_nvca": _raw_repr(self.raw_nvca),
            "scaled_fta": self.scaled_fta,
            "scaled_nca": self.scaled_nca,
            "nvca_flag": self.nvca_flag,
            "recommendation": self.recommendation,
            "step2_applied": self.step2_applied,
            "step2_rule": self.step2_rule,
        }


def _raw_repr(value: RawScore) -> int | float:
    if isinstance(value, Fraction):
        return int(value) if value.denominator == 1 else float(value)
    return value


def round_half_up(value: RawScore) -> int:
    """Rounds .5 upward (2.5 -> 3), unlike banker's rounding."""
    if isinstance(value, int):
        return value
    return int((Fraction(value) + Fraction(1, 2)).__floor__())


def _sum_items(weights: OutcomeWeights, factors: FactorVector, smoothing: bool) -> RawScore:
    total: RawScore = 0
    for item in weights.items:
        total += item.contribution(factors, smoothing)
    if isinstance(total, Fraction) and total.denominator == 1:
        return int(total)
    return total


def compute_raw_scores(
    factors: FactorVector, weights: WeightTable, smoothing: bool = False
) -> tuple[RawScore, RawScore, RawScore]:
    """Raw point totals for (FTA, NCA, NVCA).

    With smoothing on, the age step in the NCA table becomes a linear ramp and
    the NCA total may be a rational; the other totals stay integers.
    """
    return (
        _sum_items(weights.fta, factors, smoothing),
        _sum_items(weights.nca, factors, smoothing),
        _sum_items(weights.nvca, factors, smoothing),
    )


def _check_raw_range(raw: RawScore, weights: OutcomeWeights) -> int:
    rounded = round_half_up(raw)
    if not (0 <= rounded <= weights.max_raw):
        raise ConfigError(
            f"raw {weights.outcome} score {raw} outside [0, {weights.max_raw}]; "
            "weight table and inputs disagree"
        )
    return rounded


def scale_scores(
    raw_fta: RawScore, raw_nca: RawScore, weights: WeightTable
) -> tuple[int, int]:
    """Table lookup onto the 1..6 scales; rationals are rounded half-up first."""
    fta_idx = _check_raw_range(raw_fta, weights.fta)
    nca_idx = _check_raw_range(raw_nca, weights.nca)
    assert weights.fta.conversion is not None and weights.nca.conversion is not None
    return weights.fta.conversion[fta_idx], weights.nca.conversion[nca_idx]


def nvca_flag(raw_nvca: RawScore, weights: WeightTable) -> bool:
    rounded = _check_raw_range(raw_nvca, weights.nvca)
    assert weights.nvca.flag_threshold is not None
    return rounded >= weights.nvca.flag_threshold


def lookup_recommendation(
    scaled_fta: int,
    scaled_nca: int,
    flag: bool,
    matrix: FrameworkMatrix,
    exclusions: ExclusionConfig,
    offenses: Sequence[str],
    factors: FactorVector,
) -> tuple[str, bool, str | None]:
    """Returns (recommendation cell, step2_applied, matching rule name).

    An enabled exclusion match overrides the matrix outright. Reaching a blank
    matrix cell is reported as a configuration mismatch rather than silently
    defaulting.
    """
    rule = exclusions.first_match(factors, offenses)
    if rule is not None:
        return RELEASE_NOT_RECOMMENDED, True, rule.name
    cell = matrix.cell(scaled_fta, scaled_nca)
    if cell is None:
        raise ConfigError(
            f"framework matrix cell (FTA {scaled_fta}, NCA {scaled_nca}) is marked "
            "unreachable; weight table and matrix disagree"
        )
    return cell, False, None


def assess(
    factors: FactorVector,
    offenses: Sequence[str],
    config: PsaConfig,
    smoothing: bool = False,
) -> RiskAssessment:
    """Full pipeline composition; deterministic for fixed inputs and config."""
    raw_fta, raw_nca, raw_nvca = compute_raw_scores(factors, config.weights, smoothing)
    scaled_fta, scaled_nca = scale_scores(raw_fta, raw_nca, config.weights)
    flag = nvca_flag(raw_nvca, config.weights)
    recommendation, step2_applied, rule = lookup_recommendation(
        scaled_fta, scaled_nca, flag, config.matrix, config.exclusions, offenses, factors
    )
    return RiskAssessment(
        raw_fta=raw_fta,
        raw_nca=raw_nca,
        raw_nvca=raw_nvca,
        scaled_fta=scaled_fta,
        scaled_nca=scaled_nca,
        nvca_flag=flag,
        recommendation=recommendation,
        step2_applied=step2_applied,
        step2_rule=rule,
    )

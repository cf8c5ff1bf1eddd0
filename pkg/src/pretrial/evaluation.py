"""Baselines and policy comparisons that put risk-tool accuracy in context."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Protocol, Sequence

from .datasets.records import OUTCOME_NAMES, CaseRecord
from .errors import ValidationError
from .forest import HandoffForestClassifier
from .psa.config import RELEASE_NOT_RECOMMENDED, PsaConfig
from .psa.engine import assess
from .tree import HANDOFF, HIGH_RISK, VERY_LOW_RISK, HandoffTreeClassifier

DETAIN = "detain"
RELEASE = "release"

SCALE_VALUES = (1, 2, 3, 4, 5, 6)

# Table rows condition on the scale built for each outcome: the appearance
# scale for FTA, the criminal-activity scale for NCA and for the violence flag
# (which has no 1..6 scale of its own).
_SCALE_FOR_OUTCOME = {"fta": "scaled_fta", "nca": "scaled_nca", "nvca": "scaled_nca"}


def baseline_release_all(records: Sequence[CaseRecord], outcome: str) -> float:
    """Accuracy of always predicting "no offense": exactly 1 - base rate."""
    if not records:
        raise ValidationError("no eligible records")
    positives = 0
    for record in records:
        positives += record.outcome(outcome)
    return 1.0 - positives / len(records)


@dataclass(frozen=True)
class ScoreRateCell:
    outcome: str
    score: int
    count: int
    rate: float | None


@dataclass(frozen=True)
class ScoreRateTable:
    cells: tuple[ScoreRateCell, ...]

    def cell(self, outcome: str, score: int) -> ScoreRateCell:
        for cell in self.cells:
            if cell.outcome == outcome and cell.score == score:
                return cell
        raise KeyError((outcome, score))

    def rate(self, outcome: str, score: int) -> float | None:
        return self.cell(outcome, score).rate

    def count(self, outcome: str, score: int) -> int:
        return self.cell(outcome, score).count

    def to_rows(self) -> list[dict[str, object]]:
        return [
            {"outcome": c.outcome, "score": c.score, "count": c.count, "rate": c.rate}
            for c in self.cells
        ]


def rates_by_score(pairs: Sequence[tuple[CaseRecord, "object"]]) -> ScoreRateTable:
    """Observed offense rates among released defendants at each scale value.

    ``pairs`` couples each record with its scoring result (anything exposing
    ``scaled_fta`` and ``scaled_nca``). Detained or unlabeled records are an
    error: the table only makes sense where outcomes were observable.
    """
    if not pairs:
        raise ValidationError("no scored records")
    for record, _ in pairs:
        if not record.released:
            raise ValidationError(
                f"record {record.case_id!r} is detained; offense rates are "
                "observable only for released defendants"
            )
        for outcome in OUTCOME_NAMES:
            if not record.has_outcome(outcome):
                raise ValidationError(
                    f"record {record.case_id!r} lacks the {outcome!r} outcome label"
                )
    cells: list[ScoreRateCell] = []
    for outcome in OUTCOME_NAMES:
        scale_attr = _SCALE_FOR_OUTCOME[outcome]
        for score in SCALE_VALUES:
            members = [
                record
                for record, assessment in pairs
                if getattr(assessment, scale_attr) == score
            ]
            if members:
                positives = sum(record.outcome(outcome) for record in members)
                cells.append(
                    ScoreRateCell(outcome, score, len(members), positives / len(members))
                )
            else:
                cells.append(ScoreRateCell(outcome, score, 0, None))
    return ScoreRateTable(cells=tuple(cells))


def false_positive_framing(table: ScoreRateTable) -> ScoreRateTable:
    """Complement view: the empirical non-offense rate among would-be-detained
    defendants at each score (rate r becomes 1 - r)."""
    return ScoreRateTable(
        cells=tuple(
            ScoreRateCell(
                outcome=c.outcome,
                score=c.score,
                count=c.count,
                rate=None if c.rate is None else 1.0 - c.rate,
            )
            for c in table.cells
        )
    )


class Policy(Protocol):
    name: str

    def decide(self, record: CaseRecord) -> str: ...


@dataclass(frozen=True)
class ReleaseAllPolicy:
    name: str = "release-all"

    def decide(self, record: CaseRecord) -> str:
        return RELEASE


@dataclass(frozen=True)
class DetainAllPolicy:
    name: str = "detain-all"

    def decide(self, record: CaseRecord) -> str:
        return DETAIN


@dataclass(frozen=True)
class PsaMatrixPolicy:
    """Detain exactly when the framework matrix answers "Release Not
    Recommended" for the record's factor responses."""

    config: PsaConfig
    smoothing: bool = False
    name: str = "psa-matrix"

    def decide(self, record: CaseRecord) -> str:
        if record.psa_factors is None:
            raise ValidationError(
                f"record {record.case_id!r} carries no factor responses; the "
                "matrix policy cannot score it"
            )
        result = assess(record.psa_factors, (), self.config, smoothing=self.smoothing)
        return DETAIN if result.recommendation == RELEASE_NOT_RECOMMENDED else RELEASE


@dataclass(frozen=True)
class HandoffModelPolicy:
    """Detain on HighRisk, release on VeryLowRisk, hand off otherwise."""

    model: HandoffTreeClassifier | HandoffForestClassifier
    name: str = "handoff-model"

    def decide(self, record: CaseRecord) -> str:
        label = self.model.predict(record.features).label
        if label == HIGH_RISK:
            return DETAIN
        if label == VERY_LOW_RISK:
            return RELEASE
        return HANDOFF.lower()


@dataclass(frozen=True)
class PolicyResult:
    name: str
    n: int
    detention_rate: float
    handoff_rate: float
    released_offense_rates: Mapping[str, float | None]
    detained_non_offense_rates: Mapping[str, float | None]
    caveat: str | None = None

    def to_row(self) -> dict[str, object]:
        row: dict[str, object] = {
            "policy": self.name,
            "n": self.n,
            "detention_rate": self.detention_rate,
            "handoff_rate": self.handoff_rate,
        }
        for outcome in OUTCOME_NAMES:
            row[f"released_{outcome}_rate"] = self.released_offense_rates.get(outcome)
            row[f"detained_non_{outcome}_rate"] = self.detained_non_offense_rates.get(outcome)
        if self.caveat:
            row["caveat"] = self.caveat
        return row


def _rate(numerator: int, denominator: int) -> float | None:
    return numerator / denominator if denominator else None


def compare_policies(
    records: Sequence[CaseRecord],
    policies: Sequence[Policy],
    handoff_fallback: str = RELEASE,
) -> list[PolicyResult]:
    """Evaluates every policy on the same records.

    Handoffs are resolved by the fallback (default: release, the presumption
    of innocence posture) and reported separately. Counterfactual rates among
    the detained are computed only when every record carries the outcome;
    otherwise that cell is withheld and a caveat says why.
    """
    if handoff_fallback not in (RELEASE, DETAIN):
        raise ValidationError(
            f"handoff_fallback must be 'release' or 'detain', got {handoff_fallback!r}"
        )
    if not records:
        raise ValidationError("no eligible records")
    results: list[PolicyResult] = []
    for policy in policies:
        detained = 0
        handoffs = 0
        released_records: list[CaseRecord] = []
        detained_records: list[CaseRecord] = []
        for record in records:
            decision = policy.decide(record)
            if decision == HANDOFF.lower():
                handoffs += 1
                decision = handoff_fallback
            if decision == DETAIN:
                detained += 1
                detained_records.append(record)
            else:
                released_records.append(record)
        released_rates: dict[str, float | None] = {}
        detained_rates: dict[str, float | None] = {}
        caveat = None
        for outcome in OUTCOME_NAMES:
            labeled_released = [r for r in released_records if r.has_outcome(outcome)]
            released_rates[outcome] = _rate(
                sum(r.outcome(outcome) for r in labeled_released), len(labeled_released)
            )
            if all(r.has_outcome(outcome) for r in detained_records):
                positives = sum(r.outcome(outcome) for r in detained_records)
                detained_rates[outcome] = (
                    1.0 - positives / len(detained_records) if detained_records else None
                )
            else:
                detained_rates[outcome] = None
                caveat = (
                    "some detained records lack outcome labels; counterfactual "
                    "rates are withheld (released-only metrics shown)"
                )
        results.append(
            PolicyResult(
                name=policy.name,
                n=len(records),
                detention_rate=detained / len(records),
                handoff_rate=handoffs / len(records),
                released_offense_rates=released_rates,
                detained_non_offense_rates=detained_rates,
                caveat=caveat,
            )
        )
    return results


def labeled_prediction_accuracy(
    model: HandoffTreeClassifier | HandoffForestClassifier,
    records: Sequence[CaseRecord],
    outcome: str,
) -> tuple[int, int, float | None, float]:
    """(labeled count, correct count, accuracy over labeled, handoff rate)."""
    labeled = correct = handoffs = 0
    for record in records:
        prediction = model.predict(record.features)
        if prediction.label == HANDOFF:
            handoffs += 1
            continue
        labeled += 1
        actual = record.outcome(outcome)
        if (prediction.label == HIGH_RISK) == actual:
            correct += 1
    accuracy = correct / labeled if labeled else None
    return labeled, correct, accuracy, handoffs / len(records) if records else 0.0

"""Group-fairness mathematics: AUC, error-rate balance, calibration, and an
empirical demonstration that calibration and error-rate balance cannot both
hold under unequal base rates and an imperfect scorer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.special import ndtr, ndtri

from .errors import ValidationError


@dataclass(frozen=True)
class ScoredCase:
    score: float
    outcome: bool
    group: str = "all"


def _as_arrays(cases: Iterable[ScoredCase]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    cases = list(cases)
    scores = np.array([c.score for c in cases], dtype=np.float64)
    outcomes = np.array([c.outcome for c in cases], dtype=bool)
    groups = np.array([c.group for c in cases], dtype=object)
    return scores, outcomes, groups


def auc(cases: Iterable[ScoredCase]) -> float:
    """Probability a random positive outscores a random negative, ties at 1/2.

    Computed with the rank statistic (average ranks over ties); invariant
    under any strictly monotone transform of the scores.
    """
    scores, outcomes, _ = _as_arrays(cases)
    return _auc_arrays(scores, outcomes)


def _auc_arrays(scores: np.ndarray, outcomes: np.ndarray) -> float:
    n_pos = int(outcomes.sum())
    n_neg = len(outcomes) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValidationError("auc requires at least one positive and one negative case")
    _, inverse, counts = np.unique(scores, return_inverse=True, return_counts=True)
    ends = np.cumsum(counts)
    starts = ends - counts
    average_ranks = (starts + ends + 1) / 2.0  # 1-based rank averaged across each tie run
    rank_sum = float(average_ranks[inverse][outcomes].sum())
    return (rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def group_auc(cases: Iterable[ScoredCase]) -> dict[str, float | None]:
    """Per-group AUC; a single-class group is reported as None."""
    scores, outcomes, groups = _as_arrays(cases)
    result: dict[str, float | None] = {}
    for group in sorted(set(groups.tolist())):
        mask = groups == group
        try:
            result[group] = _auc_arrays(scores[mask], outcomes[mask])
        except ValidationError:
            result[group] = None
    return result


@dataclass(frozen=True)
class GroupErrorRates:
    group: str
    tp: int
    fp: int
    tn: int
    fn: int
    abstained: int

    @property
    def fpr(self) -> float | None:
        negatives = self.fp + self.tn
        return self.fp / negatives if negatives else None

    @property
    def fnr(self) -> float | None:
        positives = self.fn + self.tp
        return self.fn / positives if positives else None

    @property
    def abstention_rate(self) -> float:
        total = self.tp + self.fp + self.tn + self.fn + self.abstained
        return self.abstained / total if total else 0.0


@dataclass(frozen=True)
class ErrorRateReport:
    groups: Mapping[str, GroupErrorRates]
    fpr_gap: float | None
    fnr_gap: float | None


def _max_gap(values: Sequence[float | None]) -> float | None:
    defined = [v for v in values if v is not None]
    if not defined:
        return None
    if len(defined) == 1:
        return 0.0
    return max(defined) - min(defined)


def error_rate_balance(
    predictions: Sequence[bool | None],
    outcomes: Sequence[bool],
    groups: Sequence[str],
) -> ErrorRateReport:
    """Per-group FPR/FNR plus the largest cross-group gaps.

    ``None`` predictions are abstentions: excluded from the confusion counts
    and reported as a separate per-group abstention rate, so a group-skewed
    handoff pattern stays visible.
    """
    if not (len(predictions) == len(outcomes) == len(groups)):
        raise ValidationError("predictions, outcomes and groups must align")
    counts: dict[str, dict[str, int]] = {}
    for prediction, outcome, group in zip(predictions, outcomes, groups):
        cell = counts.setdefault(group, {"tp": 0, "fp": 0, "tn": 0, "fn": 0, "abstained": 0})
        if prediction is None:
            cell["abstained"] += 1
        elif prediction and outcome:
            cell["tp"] += 1
        elif prediction and not outcome:
            cell["fp"] += 1
        elif not prediction and outcome:
            cell["fn"] += 1
        else:
            cell["tn"] += 1
    group_rates = {
        group: GroupErrorRates(group=group, **cells) for group, cells in sorted(counts.items())
    }
    return ErrorRateReport(
        groups=group_rates,
        fpr_gap=_max_gap([g.fpr for g in group_rates.values()]),
        fnr_gap=_max_gap([g.fnr for g in group_rates.values()]),
    )


@dataclass(frozen=True)
class CalibrationBin:
    group: str
    bin_index: int
    low: float
    high: float
    count: int
    mean_score: float | None
    observed_rate: float | None

    @property
    def gap(self) -> float | None:
        if self.mean_score is None or self.observed_rate is None:
            return None
        return abs(self.mean_score - self.observed_rate)


def default_bin_edges(scores: Sequence[float]) -> np.ndarray:
    """Six per-value bins for 1..6 scale scores, ten equal-width bins otherwise."""
    array = np.asarray(scores, dtype=np.float64)
    values = set(np.unique(array).tolist())
    if values <= {1.0, 2.0, 3.0, 4.0, 5.0, 6.0}:
        return np.arange(0.5, 7.0, 1.0)
    low, high = float(array.min()), float(array.max())
    if low == high:
        high = low + 1.0
    return np.linspace(low, high, 11)


def quantile_bin_edges(scores: Sequence[float], bins: int = 10) -> np.ndarray:
    edges = np.quantile(np.asarray(scores, dtype=np.float64), np.linspace(0, 1, bins + 1))
    return np.unique(edges)


def calibration_table(
    cases: Iterable[ScoredCase], bin_edges: Sequence[float] | None = None
) -> list[CalibrationBin]:
    """Per group per score bin: mean score (predicted), observed rate, count."""
    scores, outcomes, groups = _as_arrays(cases)
    if len(scores) == 0:
        raise ValidationError("calibration_table requires at least one case")
    edges = np.asarray(bin_edges if bin_edges is not None else default_bin_edges(scores))
    if len(edges) < 2:
        raise ValidationError("bin edges must define at least one bin")
    n_bins = len(edges) - 1
    rows: list[CalibrationBin] = []
    for group in sorted(set(groups.tolist())):
        mask = groups == group
        group_scores = scores[mask]
        group_outcomes = outcomes[mask]
        assignments = np.clip(np.searchsorted(edges, group_scores, side="right") - 1, 0, n_bins - 1)
        for bin_index in range(n_bins):
            in_bin = assignments == bin_index
            count = int(in_bin.sum())
            rows.append(
                CalibrationBin(
                    group=group,
                    bin_index=bin_index,
                    low=float(edges[bin_index]),
                    high=float(edges[bin_index + 1]),
                    count=count,
                    mean_score=float(group_scores[in_bin].mean()) if count else None,
                    observed_rate=float(group_outcomes[in_bin].mean()) if count else None,
                )
            )
    return rows


def max_calibration_gap(rows: Iterable[CalibrationBin]) -> float | None:
    gaps = [row.gap for row in rows if row.gap is not None]
    return max(gaps) if gaps else None


# ----------------------------------------------------------------------
# binormal construction: the workhorse for synthetic audits
# ----------------------------------------------------------------------


def binormal_separation(target_auc: float) -> float:
    """Class-mean separation d with unit-variance classes achieving the AUC."""
    if not (0.5 <= target_auc <= 1.0):
        raise ValidationError(f"target AUC must be in [0.5, 1], got {target_auc}")
    if target_auc == 1.0:
        return math.inf
    return math.sqrt(2.0) * float(ndtri(target_auc))


def _logit(p: float) -> float:
    return math.log(p / (1.0 - p))


def binormal_scores(
    n: int, base_rate: float, target_auc: float, rng: np.random.Generator, group: str = "all"
) -> list[ScoredCase]:
    """Calibrated-by-construction scores: each case's score is its true
    posterior outcome probability under the binormal model."""
    if not (0.0 < base_rate < 1.0):
        raise ValidationError(f"base_rate must be in (0, 1), got {base_rate}")
    outcomes = rng.random(n) < base_rate
    d = binormal_separation(target_auc)
    if math.isinf(d):
        scores = outcomes.astype(np.float64)
    else:
        raw = rng.normal(0.0, 1.0, n) + d * outcomes
        logits = _logit(base_rate) + d * raw - d * d / 2.0
        scores = 1.0 / (1.0 + np.exp(-logits))
    return [
        ScoredCase(score=float(s), outcome=bool(o), group=group)
        for s, o in zip(scores, outcomes)
    ]


def binormal_operating_point(
    base_rate: float, target_auc: float, threshold: float
) -> tuple[float, float]:
    """Closed-form (FPR, FNR) of thresholding the calibrated posterior."""
    if target_auc == 1.0:
        return 0.0, 0.0
    d = binormal_separation(target_auc)
    s_star = (_logit(threshold) - _logit(base_rate) + d * d / 2.0) / d
    fpr = float(1.0 - ndtr(s_star))
    fnr = float(ndtr(s_star - d))
    return fpr, fnr


@dataclass(frozen=True)
class TradeoffGroup:
    group: str
    n: int
    base_rate: float
    target_auc: float
    fpr: float | None
    fnr: float | None
    analytic_fpr: float
    analytic_fnr: float
    max_calibration_gap: float | None
    calibration: tuple[CalibrationBin, ...]


@dataclass(frozen=True)
class TradeoffReport:
    groups: tuple[TradeoffGroup, ...]
    threshold: float
    fpr_gap: float | None
    fnr_gap: float | None
    analytic_fpr_gap: float
    max_calibration_gap: float | None
    fpr_gap_noise_2sigma: float
    note: str | None = None

    def to_text(self) -> str:
        lines = [
            f"threshold on calibrated score: {self.threshold:g}",
            "group        n      base   FPR      FNR      FPR*     FNR*     max cal gap",
        ]
        for g in self.groups:
            lines.append(
                f"{g.group:<12}{g.n:<7}{g.base_rate:<7.3f}"
                f"{_fmt(g.fpr):<9}{_fmt(g.fnr):<9}"
                f"{g.analytic_fpr:<9.3f}{g.analytic_fnr:<9.3f}{_fmt(g.max_calibration_gap)}"
            )
        lines.append(
            f"FPR gap {_fmt(self.fpr_gap)} (analytic {self.analytic_fpr_gap:.3f}, "
            f"2-sigma noise {self.fpr_gap_noise_2sigma:.4f}); "
            f"FNR gap {_fmt(self.fnr_gap)}; max calibration gap {_fmt(self.max_calibration_gap)}"
        )
        if self.note:
            lines.append(f"note: {self.note}")
        return "\n".join(lines)


def _fmt(value: float | None) -> str:
    return "n/a" if value is None else f"{value:.3f}"


def tradeoff_demo(
    group_base_rates: Mapping[str, float],
    target_auc: float = 0.655,
    n_per_group: int = 20_000,
    threshold: float = 0.25,
    seed: int = 0,
    calibration_bins: int = 10,
) -> TradeoffReport:
    """Empirical face of the calibration vs error-rate-balance impossibility.

    Scores are calibrated within each group by construction; thresholding them
    equalizes treatment per score, yet unequal base rates force unequal
    false-positive and false-negative rates whenever the scorer is imperfect.
    Quantile bins keep every calibration cell well populated.
    """
    if len(group_base_rates) < 2:
        raise ValidationError("tradeoff_demo needs at least two groups")
    rng = np.random.default_rng(seed)
    groups: list[TradeoffGroup] = []
    fpr_variances: list[float] = []
    for group in sorted(group_base_rates):
        base_rate = group_base_rates[group]
        cases = binormal_scores(n_per_group, base_rate, target_auc, rng, group=group)
        scores = [c.score for c in cases]
        predictions = [c.score >= threshold for c in cases]
        outcomes = [c.outcome for c in cases]
        report = error_rate_balance(predictions, outcomes, [group] * len(cases))
        rates = report.groups[group]
        if target_auc == 1.0:
            calibration: tuple[CalibrationBin, ...] = ()
        else:
            edges = quantile_bin_edges(scores, calibration_bins)
            calibration = tuple(calibration_table(cases, edges))
        analytic_fpr, analytic_fnr = binormal_operating_point(base_rate, target_auc, threshold)
        n_neg = rates.fp + rates.tn
        if n_neg:
            fpr_variances.append(analytic_fpr * (1.0 - analytic_fpr) / n_neg)
        groups.append(
            TradeoffGroup(
                group=group,
                n=n_per_group,
                base_rate=base_rate,
                target_auc=target_auc,
                fpr=rates.fpr,
                fnr=rates.fnr,
                analytic_fpr=analytic_fpr,
                analytic_fnr=analytic_fnr,
                max_calibration_gap=max_calibration_gap(calibration),
                calibration=calibration,
            )
        )
    note = None
    if target_auc == 1.0:
        note = (
            "perfect scorer: calibration and error-rate balance hold together; "
            "the tradeoff binds only for imperfect prediction"
        )
    fprs = [g.fpr for g in groups]
    fnrs = [g.fnr for g in groups]
    analytic = [g.analytic_fpr for g in groups]
    gaps = [g.max_calibration_gap for g in groups if g.max_calibration_gap is not None]
    return TradeoffReport(
        groups=tuple(groups),
        threshold=threshold,
        fpr_gap=_max_gap(fprs),
        fnr_gap=_max_gap(fnrs),
        analytic_fpr_gap=max(analytic) - min(analytic),
        max_calibration_gap=max(gaps) if gaps else None,
        fpr_gap_noise_2sigma=2.0 * math.sqrt(sum(fpr_variances)) if fpr_variances else 0.0,
        note=note,
    )


# ----------------------------------------------------------------------
# combined audit report
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class GroupAudit:
    group: str
    n: int
    auc: float | None
    fpr: float | None
    fnr: float | None
    abstention_rate: float | None
    calibration: tuple[CalibrationBin, ...] = ()


@dataclass(frozen=True)
class AuditReport:
    groups: tuple[GroupAudit, ...]
    fpr_gap: float | None
    fnr_gap: float | None
    auc_gap: float | None
    max_calibration_gap: float | None

    def to_rows(self) -> list[dict[str, object]]:
        rows: list[dict[str, object]] = []
        for g in self.groups:
            rows.append(
                {
                    "group": g.group,
                    "n": g.n,
                    "auc": g.auc,
                    "fpr": g.fpr,
                    "fnr": g.fnr,
                    "abstention_rate": g.abstention_rate,
                    "max_calibration_gap": max_calibration_gap(g.calibration),
                }
            )
        return rows

    def calibration_rows(self) -> list[dict[str, object]]:
        rows: list[dict[str, object]] = []
        for g in self.groups:
            for bin_row in g.calibration:
                rows.append(
                    {
                        "group": bin_row.group,
                        "bin": bin_row.bin_index,
                        "low": bin_row.low,
                        "high": bin_row.high,
                        "count": bin_row.count,
                        "mean_score": bin_row.mean_score,
                        "observed_rate": bin_row.observed_rate,
                    }
                )
        return rows

    def to_text(self) -> str:
        lines = ["group        n      AUC      FPR      FNR      abstain  max cal gap"]
        for g in self.groups:
            lines.append(
                f"{g.group:<12}{g.n:<7}{_fmt(g.auc):<9}{_fmt(g.fpr):<9}{_fmt(g.fnr):<9}"
                f"{_fmt(g.abstention_rate):<9}{_fmt(max_calibration_gap(g.calibration))}"
            )
        lines.append(
            f"gaps: AUC {_fmt(self.auc_gap)}, FPR {_fmt(self.fpr_gap)}, "
            f"FNR {_fmt(self.fnr_gap)}, calibration {_fmt(self.max_calibration_gap)}"
        )
        return "\n".join(lines)


def audit_scores(
    cases: Sequence[ScoredCase],
    threshold: float | None = None,
    predictions: Sequence[bool | None] | None = None,
    bin_edges: Sequence[float] | None = None,
) -> AuditReport:
    """One-stop audit: per-group AUC and calibration, plus FPR/FNR when binary
    predictions are supplied (directly or via a score threshold)."""
    if not cases:
        raise ValidationError("audit requires at least one case")
    scores, outcomes, groups = _as_arrays(cases)
    aucs = group_auc(cases)
    if predictions is None and threshold is not None:
        predictions = [c.score >= threshold for c in cases]
    error_report = None
    if predictions is not None:
        error_report = error_rate_balance(predictions, outcomes.tolist(), groups.tolist())
    calibration = calibration_table(cases, bin_edges)
    group_rows: list[GroupAudit] = []
    for group in sorted(set(groups.tolist())):
        group_bins = tuple(row for row in calibration if row.group == group)
        rates = error_report.groups.get(group) if error_report else None
        group_rows.append(
            GroupAudit(
                group=group,
                n=int((groups == group).sum()),
                auc=aucs[group],
                fpr=rates.fpr if rates else None,
                fnr=rates.fnr if rates else None,
                abstention_rate=rates.abstention_rate if rates else None,
                calibration=group_bins,
            )
        )
    return AuditReport(
        groups=tuple(group_rows),
        fpr_gap=error_report.fpr_gap if error_report else None,
        fnr_gap=error_report.fnr_gap if error_report else None,
        auc_gap=_max_gap([g.auc for g in group_rows]),
        max_calibration_gap=max_calibration_gap(calibration),
    )

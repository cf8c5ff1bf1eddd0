"""Abstaining decision tree: labels only confident leaves, otherwise hands off.

Leaves carry their training support and positive count. A leaf is labeled
HighRisk only when its false-positive rate (1 - p) stays within the configured
ceiling, VeryLowRisk only when its false-negative rate (p) does, and both only
at sufficient support; every other leaf abstains and the decision goes to a
human. Labeled predictions always bundle the leaf's empirical error rate.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .base import ParamsMixin, check_fraction, check_is_fitted, check_positive_int, wilson_interval
from .datasets.records import CaseRecord
from .errors import ConfigError, ValidationError

HIGH_RISK = "HighRisk"
VERY_LOW_RISK = "VeryLowRisk"
HANDOFF = "Handoff"
LABELS = (HIGH_RISK, VERY_LOW_RISK, HANDOFF)

TREE_FORMAT = "handoff-tree/v1"

_GAIN_FLOOR = 1e-12  # float-noise guard: gains at or below this are "no improvement"
_RATE_EPS = 1e-9  # tolerance when comparing count ratios against float thresholds

TARGET_OUTCOMES = ("fta", "nca", "nvca")


@dataclass(frozen=True)
class SplitCondition:
    """Binary split: numeric ``value <= threshold`` or categorical membership."""

    feature: str
    threshold: float | None = None
    levels: tuple[str, ...] | None = None

    @property
    def is_numeric(self) -> bool:
        return self.threshold is not None

    def describe(self, went_left: bool) -> str:
        if self.is_numeric:
            op = "<=" if went_left else ">"
            return f"{self.feature} {op} {self.threshold:g}"
        joined = ", ".join(self.levels or ())
        op = "in" if went_left else "not in"
        return f"{self.feature} {op} {{{joined}}}"

    def evaluate(self, value: float | str) -> bool:
        if self.is_numeric:
            return float(value) <= float(self.threshold)  # type: ignore[arg-type]
        return str(value) in (self.levels or ())


@dataclass(frozen=True)
class LeafStats:
    leaf_id: int
    n: int
    k: int
    label: str

    @property
    def positive_rate(self) -> float:
        return self.k / self.n

    @property
    def error_rate(self) -> float | None:
        if self.label == HIGH_RISK:
            return 1.0 - self.positive_rate
        if self.label == VERY_LOW_RISK:
            return self.positive_rate
        return None


@dataclass(frozen=True)
class TreeNode:
    n: int
    k: int
    condition: SplitCondition | None = None
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None
    gain: float = 0.0
    leaf: LeafStats | None = None

    @property
    def is_leaf(self) -> bool:
        return self.leaf is not None


@dataclass(frozen=True)
class Prediction:
    """A routed case: label, bundled error rate, and the full decision path.

    ``k`` and ``error_rate`` are withheld on Handoff: the tree refuses to
    suggest an average risk for cases it abstains on.
    """

    label: str
    error_rate: float | None
    leaf_id: int
    path: tuple[str, ...]
    n: int
    k: int | None

    def as_dict(self) -> dict[str, Any]:
        data: dict[str, Any] = {
            "label": self.label,
            "leaf_id": self.leaf_id,
            "path": list(self.path),
            "n": self.n,
        }
        if self.label != HANDOFF:
            data["error_rate"] = self.error_rate
            data["k"] = self.k
        return data


@dataclass(frozen=True)
class LeafRegion:
    leaf_id: int
    label: str
    n: int
    k: int
    positive_rate: float
    error_rate: float | None
    conditions: tuple[tuple[SplitCondition, bool], ...]
    description: str

    def contains(self, features: Mapping[str, float | str]) -> bool:
        return all(
            condition.evaluate(features[condition.feature]) == went_left
            for condition, went_left in self.conditions
        )


@dataclass(frozen=True)
class LeafValidation:
    leaf_id: int
    label: str
    train_rate: float
    holdout_rate: float | None
    holdout_n: int
    gap: float | None
    flagged: bool


def _label_for(n: int, k: int, min_cluster_size: int, max_fpr: float, max_fnr: float) -> str:
    # Integer-count comparisons sidestep float drift on exact threshold hits.
    # A HighRisk label tolerates a false-positive rate (1 - p) up to max_fpr,
    # so a leaf can be HighRisk with a minority of positives, exactly as a
    # high-risk cluster can carry a 60% error rate. If both labels are
    # admissible (possible when max_fpr + max_fnr >= 1), the smaller-error
    # side wins, HighRisk on an exact tie.
    if n < min_cluster_size:
        return HANDOFF
    high_ok = (n - k) <= max_fpr * n + _RATE_EPS
    low_ok = k <= max_fnr * n + _RATE_EPS
    if high_ok and low_ok:
        return HIGH_RISK if 2 * k >= n else VERY_LOW_RISK
    if high_ok:
        return HIGH_RISK
    if low_ok:
        return VERY_LOW_RISK
    return HANDOFF


def _gini(k: int, n: int) -> float:
    p = k / n
    return 2.0 * p * (1.0 - p)


class HandoffTreeClassifier(ParamsMixin):
    """Greedy Gini tree over case records with abstaining leaf labels.

    Parameters
    ----------
    target_outcome : which observed outcome to model ("fta", "nca" or "nvca").
    min_cluster_size : minimum leaf support for a labeled (non-handoff) leaf;
        branches stop splitting below twice this size.
    max_depth : maximum number of splits on any root-to-leaf path.
    high_risk_max_fpr : largest tolerated leaf false-positive rate for a
        HighRisk label.
    very_low_max_fnr : largest tolerated leaf false-negative rate for a
        VeryLowRisk label.
    feature_priority : features preferred when candidate splits' impurity
        reductions are within ``impurity_tie_epsilon`` of the best.
    include_protected : offer protected attributes as split candidates.
    impurity_tie_epsilon : absolute gain difference treated as a tie.
    seed : recorded for provenance and consumed by ensemble resampling; the
        fit itself is deterministic.
    """

    def __init__(
        self,
        target_outcome: str = "fta",
        min_cluster_size: int = 50,
        max_depth: int = 8,
        high_risk_max_fpr: float = 0.6,
        very_low_max_fnr: float = 0.15,
        feature_priority: Sequence[str] = (),
        include_protected: bool = False,
        impurity_tie_epsilon: float = 0.01,
        seed: int = 0,
    ):
        self.target_outcome = target_outcome
        self.min_cluster_size = min_cluster_size
        self.max_depth = max_depth
        self.high_risk_max_fpr = high_risk_max_fpr
        self.very_low_max_fnr = very_low_max_fnr
        self.feature_priority = tuple(feature_priority)
        self.include_protected = include_protected
        self.impurity_tie_epsilon = impurity_tie_epsilon
        self.seed = seed

    # ------------------------------------------------------------------
    # fitting
    # ------------------------------------------------------------------

    def _check_params(self) -> None:
        if self.target_outcome not in TARGET_OUTCOMES:
            raise ValidationError(
                f"target_outcome must be one of {TARGET_OUTCOMES}, got "
                f"{self.target_outcome!r}"
            )
        check_positive_int("min_cluster_size", self.min_cluster_size)
        check_positive_int("max_depth", self.max_depth, minimum=0)
        check_fraction("high_risk_max_fpr", self.high_risk_max_fpr)
        check_fraction("very_low_max_fnr", self.very_low_max_fnr)
        if self.impurity_tie_epsilon < 0:
            raise ValidationError("impurity_tie_epsilon must be non-negative")

    def _extract_columns(
        self, records: Sequence[CaseRecord]
    ) -> tuple[list[str], dict[str, str], dict[str, np.ndarray], dict[str, tuple[str, ...]]]:
        feature_names = sorted(records[0].features)
        for record in records:
            if sorted(record.features) != feature_names:
                raise ValidationError(
                    f"record {record.case_id!r} declares different features than the "
                    "first record"
                )
        protected_names: list[str] = []
        if self.include_protected:
            protected_names = sorted(
                {name for record in records for name in (record.protected or {})}
            )
            if not protected_names:
                raise ValidationError(
                    "include_protected=True but no record carries protected attributes"
                )
            overlap = set(protected_names) & set(feature_names)
            if overlap:
                raise ValidationError(
                    f"protected attribute name(s) collide with features: {sorted(overlap)}"
                )
            for record in records:
                missing = [n for n in protected_names if n not in (record.protected or {})]
                if missing:
                    raise ValidationError(
                        f"record {record.case_id!r} is missing protected attribute(s) "
                        f"{missing}"
                    )

        def raw_value(record: CaseRecord, name: str) -> float | str:
            if name in protected_names:
                return (record.protected or {})[name]
            return record.features[name]

        all_names = feature_names + protected_names
        kinds: dict[str, str] = {}
        columns: dict[str, np.ndarray] = {}
        levels: dict[str, tuple[str, ...]] = {}
        for name in all_names:
            values = [raw_value(record, name) for record in records]
            if all(isinstance(v, str) for v in values):
                kinds[name] = "categorical"
                level_names = tuple(sorted(set(values)))  # type: ignore[arg-type]
                levels[name] = level_names
                code_of = {level: i for i, level in enumerate(level_names)}
                columns[name] = np.array([code_of[v] for v in values], dtype=np.int64)
            elif all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in values):
                kinds[name] = "numeric"
                columns[name] = np.array(values, dtype=np.float64)
            else:
                raise ValidationError(
                    f"feature {name!r} mixes numeric and categorical values"
                )
        if not all_names:
            raise ValidationError("no usable features: records carry no feature values")
        return all_names, kinds, columns, levels

    def fit(self, records: Sequence[CaseRecord]) -> "HandoffTreeClassifier":
        self._check_params()
        records = list(records)
        if not records:
            raise ValidationError("fit requires at least one record")
        for record in records:
            if not record.released:
                raise ValidationError(
                    f"record {record.case_id!r} is not released; only released "
                    "defendants with observed outcomes can train the model",
                    invariant="released_only_training",
                )
            if not record.has_outcome(self.target_outcome):
                raise ValidationError(
                    f"record {record.case_id!r} lacks the {self.target_outcome!r} "
                    "outcome label; apply filter_training_eligible first",
                    invariant="released_only_training",
                )
        if len(records) < 2 * self.min_cluster_size:
            raise ValidationError(
                f"need at least {2 * self.min_cluster_size} records "
                f"(2 x min_cluster_size), got {len(records)}"
            )

        # Canonical order makes the fit independent of input record order.
        records.sort(
            key=lambda r: (
                r.case_id,
                tuple(sorted((k, str(v)) for k, v in r.features.items())),
                r.outcome(self.target_outcome),
            )
        )
        names, kinds, columns, levels = self._extract_columns(records)
        y = np.array([records[i].outcome(self.target_outcome) for i in range(len(records))])

        self.feature_names_ = tuple(names)
        self.feature_kinds_ = dict(kinds)
        self.categorical_levels_ = dict(levels)
        self.n_samples_ = len(records)
        self._leaf_counter = 0
        self.root_ = self._build(columns, y, np.arange(len(records)), depth=0)
        self.leaves_ = tuple(self._collect_leaves(self.root_))
        del self._leaf_counter
        return self

    def _priority_index(self, feature: str) -> int:
        try:
            return self.feature_priority.index(feature)
        except ValueError:
            return len(self.feature_priority)

    def _numeric_candidates(
        self, values: np.ndarray, y: np.ndarray
    ) -> tuple[np.ndarray, np.ndarray]:
        n = len(values)
        order = np.argsort(values, kind="stable")
        sorted_vals = values[order]
        sorted_y = y[order].astype(np.float64)
        change = np.flatnonzero(sorted_vals[:-1] != sorted_vals[1:])
        if change.size == 0:
            return np.empty(0), np.empty(0)
        k_total = float(sorted_y.sum())
        cum_pos = np.cumsum(sorted_y)
        left_n = (change + 1).astype(np.float64)
        left_k = cum_pos[change]
        right_n = n - left_n
        right_k = k_total - left_k
        gini_left = 2.0 * (left_k / left_n) * (1.0 - left_k / left_n)
        gini_right = 2.0 * (right_k / right_n) * (1.0 - right_k / right_n)
        weighted = (left_n * gini_left + right_n * gini_right) / n
        gains = _gini(int(k_total), n) - weighted
        thresholds = (sorted_vals[change] + sorted_vals[change + 1]) / 2.0
        return thresholds, gains

    def _categorical_candidates(
        self, codes: np.ndarray, y: np.ndarray, level_names: tuple[str, ...]
    ) -> tuple[list[tuple[str, ...]], np.ndarray]:
        n = len(codes)
        n_levels = len(level_names)
        counts = np.bincount(codes, minlength=n_levels).astype(np.float64)
        positives = np.bincount(codes, weights=y.astype(np.float64), minlength=n_levels)
        present = np.flatnonzero(counts > 0)
        if present.size < 2:
            return [], np.empty(0)
        rates = positives[present] / counts[present]
        # Breiman ordering: scanning prefixes of rate-sorted levels covers the
        # optimal binary partition; code order breaks rate ties determinimally.
        order = present[np.lexsort((present, rates))]
        k_total = float(positives.sum())
        left_n = np.cumsum(counts[order])[:-1]
        left_k = np.cumsum(positives[order])[:-1]
        right_n = n - left_n
        right_k = k_total - left_k
        gini_left = 2.0 * (left_k / left_n) * (1.0 - left_k / left_n)
        gini_right = 2.0 * (right_k / right_n) * (1.0 - right_k / right_n)
        weighted = (left_n * gini_left + right_n * gini_right) / n
        gains = _gini(int(k_total), n) - weighted
        level_sets = [
            tuple(sorted(level_names[code] for code in order[: j + 1]))
            for j in range(len(order) - 1)
        ]
        return level_sets, gains

    def _best_split(
        self, columns: dict[str, np.ndarray], y: np.ndarray, idx: np.ndarray
    ) -> tuple[SplitCondition, float] | None:
        # Per feature: the max-gain candidate (exact gain ties -> smaller
        # threshold / lexicographically first level set). Across features:
        # candidates within impurity_tie_epsilon of the best gain compete by
        # feature_priority position, then feature name.
        per_feature: dict[str, tuple[SplitCondition, float]] = {}
        best_gain = -np.inf
        for name in self.feature_names_:
            values = columns[name][idx]
            if self.feature_kinds_[name] == "numeric":
                thresholds, gains = self._numeric_candidates(values, y[idx])
                if len(gains) == 0:
                    continue
                top = float(gains.max())
                ties = gains == top
                pick = int(np.flatnonzero(ties)[np.argmin(thresholds[ties])])
                condition = SplitCondition(feature=name, threshold=float(thresholds[pick]))
            else:
                level_sets, gains = self._categorical_candidates(
                    values, y[idx], self.categorical_levels_[name]
                )
                if len(gains) == 0:
                    continue
                top = float(gains.max())
                pick = min(
                    (i for i in range(len(level_sets)) if gains[i] == top),
                    key=lambda i: level_sets[i],
                )
                condition = SplitCondition(feature=name, levels=level_sets[pick])
            per_feature[name] = (condition, top)
            best_gain = max(best_gain, top)
        if not per_feature or best_gain <= _GAIN_FLOOR:
            return None
        cutoff = best_gain - self.impurity_tie_epsilon
        winner = min(
            (name for name, (_, gain) in per_feature.items() if gain >= cutoff),
            key=lambda name: (self._priority_index(name), name),
        )
        return per_feature[winner]

    def _make_leaf(self, n: int, k: int) -> TreeNode:
        label = _label_for(
            n, k, self.min_cluster_size, self.high_risk_max_fpr, self.very_low_max_fnr
        )
        leaf = LeafStats(leaf_id=self._leaf_counter, n=n, k=k, label=label)
        self._leaf_counter += 1
        return TreeNode(n=n, k=k, leaf=leaf)

    def _build(
        self, columns: dict[str, np.ndarray], y: np.ndarray, idx: np.ndarray, depth: int
    ) -> TreeNode:
        n = len(idx)
        k = int(y[idx].sum())
        if depth >= self.max_depth or n < 2 * self.min_cluster_size or k in (0, n):
            return self._make_leaf(n, k)
        found = self._best_split(columns, y, idx)
        if found is None:
            return self._make_leaf(n, k)
        condition, gain = found
        values = columns[condition.feature][idx]
        if condition.is_numeric:
            left_mask = values <= condition.threshold
        else:
            level_names = self.categorical_levels_[condition.feature]
            member_codes = {level_names.index(level) for level in condition.levels or ()}
            left_mask = np.isin(values, sorted(member_codes))
        left = self._build(columns, y, idx[left_mask], depth + 1)
        right = self._build(columns, y, idx[~left_mask], depth + 1)
        return TreeNode(n=n, k=k, condition=condition, left=left, right=right, gain=gain)

    def _collect_leaves(self, node: TreeNode) -> list[LeafStats]:
        if node.is_leaf:
            assert node.leaf is not None
            return [node.leaf]
        assert node.left is not None and node.right is not None
        return self._collect_leaves(node.left) + self._collect_leaves(node.right)

    # ------------------------------------------------------------------
    # prediction
    # ------------------------------------------------------------------

    def _check_value(self, feature: str, features: Mapping[str, float | str]) -> float | str:
        if feature not in features:
            raise ValidationError(f"missing feature value for {feature!r}")
        value = features[feature]
        if self.feature_kinds_[feature] == "numeric":
            if isinstance(value, str) or isinstance(value, bool):
                raise ValidationError(f"feature {feature!r} must be numeric, got {value!r}")
        else:
            if not isinstance(value, str):
                raise ValidationError(
                    f"feature {feature!r} must be categorical, got {value!r}"
                )
        return value

    def _route_full(
        self, features: Mapping[str, float | str]
    ) -> tuple[LeafStats, tuple[str, ...], tuple[TreeNode, ...]]:
        check_is_fitted(self, "root_")
        node = self.root_
        path: list[str] = []
        visited: list[TreeNode] = []
        while not node.is_leaf:
            condition = node.condition
            assert condition is not None and node.left is not None and node.right is not None
            visited.append(node)
            value = self._check_value(condition.feature, features)
            if (
                not condition.is_numeric
                and value not in self.categorical_levels_[condition.feature]
            ):
                # Novel level: route toward the better-supported child and say so.
                went_left = node.left.n > node.right.n
                path.append(
                    f"{condition.feature} = {value!r} (novel level; routed to larger branch)"
                )
            else:
                went_left = condition.evaluate(value)
                path.append(condition.describe(went_left))
            node = node.left if went_left else node.right
        assert node.leaf is not None
        return node.leaf, tuple(path), tuple(visited)

    def _route(
        self, features: Mapping[str, float | str]
    ) -> tuple[LeafStats, tuple[str, ...]]:
        leaf, path, _ = self._route_full(features)
        return leaf, path

    def predict(self, features: Mapping[str, float | str]) -> Prediction:
        leaf, path = self._route(features)
        handoff = leaf.label == HANDOFF
        return Prediction(
            label=leaf.label,
            error_rate=None if handoff else leaf.error_rate,
            leaf_id=leaf.leaf_id,
            path=path,
            n=leaf.n,
            k=None if handoff else leaf.k,
        )

    def predict_many(
        self, features_iter: Iterable[Mapping[str, float | str]]
    ) -> list[Prediction]:
        return [self.predict(features) for features in features_iter]

    # ------------------------------------------------------------------
    # inspection
    # ------------------------------------------------------------------

    def leaf_table(self) -> list[LeafRegion]:
        check_is_fitted(self, "root_")
        regions: list[LeafRegion] = []

        def walk(node: TreeNode, trail: tuple[tuple[SplitCondition, bool], ...]) -> None:
            if node.is_leaf:
                leaf = node.leaf
                assert leaf is not None
                description = (
                    " and ".join(c.describe(left) for c, left in trail) or "(all cases)"
                )
                regions.append(
                    LeafRegion(
                        leaf_id=leaf.leaf_id,
                        label=leaf.label,
                        n=leaf.n,
                        k=leaf.k,
                        positive_rate=leaf.positive_rate,
                        error_rate=leaf.error_rate,
                        conditions=trail,
                        description=description,
                    )
                )
                return
            assert node.condition is not None and node.left is not None and node.right is not None
            walk(node.left, trail + ((node.condition, True),))
            walk(node.right, trail + ((node.condition, False),))

        walk(self.root_, ())
        return regions

    def handoff_training_count(self) -> int:
        check_is_fitted(self, "root_")
        return sum(leaf.n for leaf in self.leaves_ if leaf.label == HANDOFF)

    def validate_rates(self, holdout: Sequence[CaseRecord]) -> list[LeafValidation]:
        """Compares each leaf's training rate against a routed holdout set.

        A leaf is flagged when the holdout rate falls outside the Wilson 95%
        interval implied by the leaf's training counts, i.e. when fresh data
        is inconsistent with the rate the leaf reports. Shifted data is
        reported, never rejected.
        """
        check_is_fitted(self, "root_")
        counts: dict[int, tuple[int, int]] = {}
        for record in holdout:
            if not record.released or not record.has_outcome(self.target_outcome):
                raise ValidationError(
                    f"holdout record {record.case_id!r} is not training-eligible"
                )
            leaf, _ = self._route(record.features)
            n, k = counts.get(leaf.leaf_id, (0, 0))
            counts[leaf.leaf_id] = (n + 1, k + int(record.outcome(self.target_outcome)))
        rows: list[LeafValidation] = []
        for leaf in self.leaves_:
            n, k = counts.get(leaf.leaf_id, (0, 0))
            if n == 0:
                rows.append(
                    LeafValidation(
                        leaf_id=leaf.leaf_id,
                        label=leaf.label,
                        train_rate=leaf.positive_rate,
                        holdout_rate=None,
                        holdout_n=0,
                        gap=None,
                        flagged=False,
                    )
                )
                continue
            rate = k / n
            low, high = wilson_interval(leaf.k, leaf.n)
            rows.append(
                LeafValidation(
                    leaf_id=leaf.leaf_id,
                    label=leaf.label,
                    train_rate=leaf.positive_rate,
                    holdout_rate=rate,
                    holdout_n=n,
                    gap=abs(rate - leaf.positive_rate),
                    flagged=not (low <= rate <= high),
                )
            )
        return rows

    # ------------------------------------------------------------------
    # serialization
    # ------------------------------------------------------------------

    def _node_to_dict(self, node: TreeNode) -> dict[str, Any]:
        if node.is_leaf:
            leaf = node.leaf
            assert leaf is not None
            return {
                "type": "leaf",
                "leaf_id": leaf.leaf_id,
                "n": leaf.n,
                "k": leaf.k,
                "label": leaf.label,
            }
        condition = node.condition
        assert condition is not None and node.left is not None and node.right is not None
        data: dict[str, Any] = {
            "type": "split",
            "n": node.n,
            "k": node.k,
            "gain": node.gain,
            "feature": condition.feature,
            "left": self._node_to_dict(node.left),
            "right": self._node_to_dict(node.right),
        }
        if condition.is_numeric:
            data["threshold"] = condition.threshold
        else:
            data["levels"] = list(condition.levels or ())
        return data

    def to_document(self) -> dict[str, Any]:
        check_is_fitted(self, "root_")
        params = self.get_params()
        params["feature_priority"] = list(params["feature_priority"])
        return {
            "format": TREE_FORMAT,
            "config": params,
            "feature_names": list(self.feature_names_),
            "feature_kinds": dict(self.feature_kinds_),
            "categorical_levels": {k: list(v) for k, v in self.categorical_levels_.items()},
            "n_samples": self.n_samples_,
            "root": self._node_to_dict(self.root_),
        }

    def serialize(self) -> bytes:
        return (json.dumps(self.to_document(), indent=2, sort_keys=True) + "\n").encode(
            "utf-8"
        )

    @classmethod
    def _node_from_dict(cls, data: Mapping[str, Any]) -> TreeNode:
        if data.get("type") == "leaf":
            leaf = LeafStats(
                leaf_id=int(data["leaf_id"]),
                n=int(data["n"]),
                k=int(data["k"]),
                label=str(data["label"]),
            )
            if leaf.label not in LABELS:
                raise ConfigError(f"unknown leaf label {leaf.label!r}")
            return TreeNode(n=leaf.n, k=leaf.k, leaf=leaf)
        if data.get("type") != "split":
            raise ConfigError(f"unknown node type {data.get('type')!r}")
        condition = SplitCondition(
            feature=str(data["feature"]),
            threshold=float(data["threshold"]) if "threshold" in data else None,
            levels=tuple(data["levels"]) if "levels" in data else None,
        )
        return TreeNode(
            n=int(data["n"]),
            k=int(data["k"]),
            condition=condition,
            left=cls._node_from_dict(data["left"]),
            right=cls._node_from_dict(data["right"]),
            gain=float(data["gain"]),
        )

    @classmethod
    def from_document(cls, document: Mapping[str, Any]) -> "HandoffTreeClassifier":
        if document.get("format") != TREE_FORMAT:
            raise ConfigError(
                f"expected format {TREE_FORMAT!r}, got {document.get('format')!r}"
            )
        config = dict(document.get("config", {}))
        config["feature_priority"] = tuple(config.get("feature_priority", ()))
        tree = cls(**config)
        tree.feature_names_ = tuple(document["feature_names"])
        tree.feature_kinds_ = dict(document["feature_kinds"])
        tree.categorical_levels_ = {
            k: tuple(v) for k, v in document.get("categorical_levels", {}).items()
        }
        tree.n_samples_ = int(document["n_samples"])
        tree.root_ = cls._node_from_dict(document["root"])
        tree.leaves_ = tuple(tree._collect_leaves(tree.root_))
        return tree

    @classmethod
    def deserialize(cls, data: bytes | str) -> "HandoffTreeClassifier":
        if not data:
            raise ConfigError("empty tree document")
        try:
            document = json.loads(data)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed tree document: {exc}") from exc
        return cls.from_document(document)


def fit_tree(records: Sequence[CaseRecord], **params: Any) -> HandoffTreeClassifier:
    return HandoffTreeClassifier(**params).fit(records)

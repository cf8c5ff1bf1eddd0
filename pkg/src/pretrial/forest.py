"""Bagged ensemble of handoff trees with pooled error rates.

Each member tree routes a case to one leaf; the ensemble pools the reached
leaves' counts (sum k over sum n) as if their union were a single cluster, so
large-support leaves dominate and the reported error rate keeps the tree
module's frequency semantics. The ensemble abstains when the pooled rate
misses the thresholds, when pooled support is too small, or when too many
member trees dissent from the modal label.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .base import ParamsMixin, check_fraction, check_is_fitted, check_positive_int
from .datasets.records import CaseRecord
from .errors import ConfigError, ValidationError
from .tree import (
    HANDOFF,
    HIGH_RISK,
    LABELS,
    VERY_LOW_RISK,
    HandoffTreeClassifier,
    LeafStats,
    _label_for,
)

FOREST_FORMAT = "handoff-forest/v1"


@dataclass(frozen=True)
class MemberLeaf:
    tree_index: int
    leaf_id: int
    label: str
    n: int
    k: int


@dataclass(frozen=True)
class ForestPrediction:
    label: str
    error_rate: float | None
    n: int
    k: int | None
    member_leaves: tuple[MemberLeaf, ...]
    disagreement: float
    feature_contributions: Mapping[str, float]

    def as_dict(self) -> dict[str, Any]:
        data: dict[str, Any] = {
            "label": self.label,
            "n": self.n,
            "disagreement": self.disagreement,
            "member_leaves": [
                {"tree": m.tree_index, "leaf_id": m.leaf_id, "label": m.label}
                for m in self.member_leaves
            ],
            "feature_contributions": dict(self.feature_contributions),
        }
        if self.label != HANDOFF:
            data["error_rate"] = self.error_rate
            data["k"] = self.k
        return data


def pool_counts(leaves: Iterable[LeafStats | MemberLeaf]) -> tuple[int, int]:
    """Sums (support, positives) over the reached leaves."""
    n = k = 0
    for leaf in leaves:
        n += leaf.n
        k += leaf.k
    return n, k


def modal_label(labels: Sequence[str]) -> tuple[str, float]:
    """Most common member label and the dissent fraction; ties break in the
    fixed order HighRisk, VeryLowRisk, Handoff."""
    counts = Counter(labels)
    best = max(counts.values())
    modal = next(label for label in LABELS if counts.get(label, 0) == best)
    return modal, 1.0 - best / len(labels)


class HandoffForestClassifier(ParamsMixin):
    """Bootstrap ensemble of :class:`HandoffTreeClassifier`.

    Pooled thresholds default to the member-tree thresholds, bootstrap can be
    disabled, and feature subsampling defaults to off, so a single-tree forest
    reproduces the lone tree's predictions exactly.
    """

    def __init__(
        self,
        tree_count: int = 50,
        bootstrap: bool = True,
        feature_subsample_fraction: float = 1.0,
        pooled_high_risk_max_fpr: float | None = None,
        pooled_very_low_max_fnr: float | None = None,
        disagreement_max: float = 0.25,
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
        self.tree_count = tree_count
        self.bootstrap = bootstrap
        self.feature_subsample_fraction = feature_subsample_fraction
        self.pooled_high_risk_max_fpr = pooled_high_risk_max_fpr
        self.pooled_very_low_max_fnr = pooled_very_low_max_fnr
        self.disagreement_max = disagreement_max
        self.target_outcome = target_outcome
        self.min_cluster_size = min_cluster_size
        self.max_depth = max_depth
        self.high_risk_max_fpr = high_risk_max_fpr
        self.very_low_max_fnr = very_low_max_fnr
        self.feature_priority = tuple(feature_priority)
        self.include_protected = include_protected
        self.impurity_tie_epsilon = impurity_tie_epsilon
        self.seed = seed

    @property
    def _pooled_fpr(self) -> float:
        value = self.pooled_high_risk_max_fpr
        return self.high_risk_max_fpr if value is None else value

    @property
    def _pooled_fnr(self) -> float:
        value = self.pooled_very_low_max_fnr
        return self.very_low_max_fnr if value is None else value

    def _tree_params(self, member_seed: int) -> dict[str, Any]:
        return {
            "target_outcome": self.target_outcome,
            "min_cluster_size": self.min_cluster_size,
            "max_depth": self.max_depth,
            "high_risk_max_fpr": self.high_risk_max_fpr,
            "very_low_max_fnr": self.very_low_max_fnr,
            "feature_priority": self.feature_priority,
            "include_protected": self.include_protected,
            "impurity_tie_epsilon": self.impurity_tie_epsilon,
            "seed": member_seed,
        }

    def fit(self, records: Sequence[CaseRecord]) -> "HandoffForestClassifier":
        check_positive_int("tree_count", self.tree_count)
        check_fraction("disagreement_max", self.disagreement_max)
        if not (0.0 < self.feature_subsample_fraction <= 1.0):
            raise ValidationError(
                "feature_subsample_fraction must be in (0, 1], got "
                f"{self.feature_subsample_fraction}"
            )
        records = list(records)
        if not records:
            raise ValidationError("fit requires at least one record")
        feature_names = sorted(records[0].features)

        seed_seq = np.random.SeedSequence(self.seed)
        children = seed_seq.spawn(self.tree_count)
        trees: list[HandoffTreeClassifier] = []
        member_seeds: list[int] = []
        for child in children:
            rng = np.random.default_rng(child)
            member_seed = int(child.generate_state(1)[0])
            if self.bootstrap:
                indices = rng.integers(0, len(records), size=len(records))
                sample = [records[i] for i in indices]
            else:
                sample = records
            if self.feature_subsample_fraction < 1.0:
                count = max(1, round(self.feature_subsample_fraction * len(feature_names)))
                chosen = sorted(
                    rng.choice(np.array(feature_names), size=count, replace=False).tolist()
                )
                sample = [
                    CaseRecord(
                        case_id=record.case_id,
                        features={name: record.features[name] for name in chosen},
                        released=record.released,
                        protected=record.protected,
                        outcomes=record.outcomes,
                        psa_factors=record.psa_factors,
                    )
                    for record in sample
                ]
            tree = HandoffTreeClassifier(**self._tree_params(member_seed))
            trees.append(tree.fit(sample))
            member_seeds.append(member_seed)
        self.trees_ = tuple(trees)
        self.member_seeds_ = tuple(member_seeds)
        self.n_samples_ = len(records)
        return self

    def _member_routes(self, features: Mapping[str, float | str]):
        check_is_fitted(self, "trees_")
        return [tree._route_full(features) for tree in self.trees_]

    def predict(self, features: Mapping[str, float | str]) -> ForestPrediction:
        routes = self._member_routes(features)
        member_leaves = tuple(
            MemberLeaf(tree_index=i, leaf_id=leaf.leaf_id, label=leaf.label, n=leaf.n, k=leaf.k)
            for i, (leaf, _, _) in enumerate(routes)
        )
        pooled_n, pooled_k = pool_counts(member_leaves)
        _, disagreement = modal_label([m.label for m in member_leaves])
        label = HANDOFF
        if disagreement <= self.disagreement_max + 1e-12:
            label = _label_for(
                pooled_n, pooled_k, self.min_cluster_size, self._pooled_fpr, self._pooled_fnr
            )
        rate = pooled_k / pooled_n
        error_rate: float | None
        if label == HIGH_RISK:
            error_rate = 1.0 - rate
        elif label == VERY_LOW_RISK:
            error_rate = rate
        else:
            error_rate = None
        contributions = self._contributions(routes)
        return ForestPrediction(
            label=label,
            error_rate=error_rate,
            n=pooled_n,
            k=None if label == HANDOFF else pooled_k,
            member_leaves=member_leaves,
            disagreement=disagreement,
            feature_contributions=contributions,
        )

    def predict_many(
        self, features_iter: Iterable[Mapping[str, float | str]]
    ) -> list[ForestPrediction]:
        return [self.predict(features) for features in features_iter]

    def _contributions(self, routes) -> dict[str, float]:
        totals: dict[str, float] = {}
        for tree, (_, _, visited) in zip(self.trees_, routes):
            root_n = tree.root_.n
            for node in visited:
                assert node.condition is not None
                weight = (node.n / root_n) * node.gain
                totals[node.condition.feature] = (
                    totals.get(node.condition.feature, 0.0) + weight
                )
        total = sum(totals.values())
        if total <= 0.0:
            return {}
        return {name: value / total for name, value in sorted(totals.items())}

    def feature_contributions(
        self, features: Mapping[str, float | str]
    ) -> dict[str, float]:
        """Per-feature share of the impurity reduction along the reached paths.

        Nonnegative, sums to 1 when any split was crossed; a forest of
        root-only trees contributes nothing and yields an empty mapping.
        """
        return self._contributions(self._member_routes(features))

    # ------------------------------------------------------------------
    # serialization
    # ------------------------------------------------------------------

    def to_document(self) -> dict[str, Any]:
        check_is_fitted(self, "trees_")
        params = self.get_params()
        params["feature_priority"] = list(params["feature_priority"])
        return {
            "format": FOREST_FORMAT,
            "config": params,
            "member_seeds": list(self.member_seeds_),
            "n_samples": self.n_samples_,
            "trees": [tree.to_document() for tree in self.trees_],
        }

    def serialize(self) -> bytes:
        return (json.dumps(self.to_document(), indent=2, sort_keys=True) + "\n").encode(
            "utf-8"
        )

    @classmethod
    def from_document(cls, document: Mapping[str, Any]) -> "HandoffForestClassifier":
        if document.get("format") != FOREST_FORMAT:
            raise ConfigError(
                f"expected format {FOREST_FORMAT!r}, got {document.get('format')!r}"
            )
        config = dict(document.get("config", {}))
        config["feature_priority"] = tuple(config.get("feature_priority", ()))
        forest = cls(**config)
        forest.trees_ = tuple(
            HandoffTreeClassifier.from_document(tree_doc)
            for tree_doc in document.get("trees", ())
        )
        forest.member_seeds_ = tuple(int(s) for s in document.get("member_seeds", ()))
        forest.n_samples_ = int(document["n_samples"])
        return forest

    @classmethod
    def deserialize(cls, data: bytes | str) -> "HandoffForestClassifier":
        if not data:
            raise ConfigError("empty forest document")
        try:
            document = json.loads(data)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed forest document: {exc}") from exc
        return cls.from_document(document)


def fit_forest(records: Sequence[CaseRecord], **params: Any) -> HandoffForestClassifier:
    return HandoffForestClassifier(**params).fit(records)

from __future__ import annotations

import numpy as np
import pytest

from pretrial.datasets import CaseRecord
from pretrial.errors import ConfigError
from pretrial.forest import (
    HandoffForestClassifier,
    MemberLeaf,
    modal_label,
    pool_counts,
)
from pretrial.tree import HANDOFF, HIGH_RISK, VERY_LOW_RISK, HandoffTreeClassifier

from helpers import region_dataset


def grid_inputs():
    return [
        {"age": age, "prior_fta": priors}
        for age in range(18, 71, 2)
        for priors in range(0, 6)
    ]


def degenerate_pair(records, **overrides):
    params = dict(
        target_outcome="fta",
        min_cluster_size=60,
        max_depth=4,
        high_risk_max_fpr=0.65,
        very_low_max_fnr=0.2,
        feature_priority=("prior_fta", "age"),
    )
    params.update(overrides)
    tree = HandoffTreeClassifier(**params).fit(records)
    forest = HandoffForestClassifier(
        tree_count=1,
        bootstrap=False,
        feature_subsample_fraction=1.0,
        disagreement_max=1.0,
        **params,
    ).fit(records)
    return tree, forest


class TestPooling:
    def test_hand_arithmetic_pooling(self):
        leaves = [
            MemberLeaf(tree_index=0, leaf_id=0, label=HIGH_RISK, n=10, k=8),
            MemberLeaf(tree_index=1, leaf_id=0, label=HIGH_RISK, n=10, k=9),
            MemberLeaf(tree_index=2, leaf_id=0, label=HIGH_RISK, n=10, k=7),
        ]
        n, k = pool_counts(leaves)
        assert (n, k) == (30, 24)
        assert k / n == pytest.approx(0.8)
        modal, disagreement = modal_label([leaf.label for leaf in leaves])
        assert modal == HIGH_RISK
        assert disagreement == 0.0

    def test_pooled_counts_identity_on_random_inputs(self):
        records = region_dataset(51, n=2500)
        forest = HandoffForestClassifier(
            tree_count=7, min_cluster_size=60, max_depth=4, seed=3
        ).fit(records)
        rng = np.random.default_rng(8)
        for _ in range(25):
            features = {
                "age": int(rng.integers(18, 71)),
                "prior_fta": int(rng.integers(0, 6)),
            }
            prediction = forest.predict(features)
            expected_n = expected_k = 0
            for tree in forest.trees_:
                leaf, _ = tree._route(features)
                expected_n += leaf.n
                expected_k += leaf.k
            assert prediction.n == expected_n
            assert sum(m.k for m in prediction.member_leaves) == expected_k

    def test_modal_tie_breaks_in_fixed_label_order(self):
        modal, disagreement = modal_label([HIGH_RISK, VERY_LOW_RISK])
        assert modal == HIGH_RISK
        assert disagreement == 0.5
        modal, _ = modal_label([HANDOFF, VERY_LOW_RISK])
        assert modal == VERY_LOW_RISK


class TestDegenerateEquivalence:
    def test_single_tree_forest_matches_tree_everywhere(self):
        records = region_dataset(52, n=2000)
        tree, forest = degenerate_pair(records)
        for features in grid_inputs():
            tree_prediction = tree.predict(features)
            forest_prediction = forest.predict(features)
            assert forest_prediction.label == tree_prediction.label, features
            assert forest_prediction.error_rate == tree_prediction.error_rate, features
            assert forest_prediction.n == tree_prediction.n

    def test_single_tree_forest_pools_leaf_values(self):
        records = region_dataset(53, n=1500)
        tree, forest = degenerate_pair(records)
        features = {"age": 45, "prior_fta": 0}
        leaf, _ = tree._route(features)
        prediction = forest.predict(features)
        assert (prediction.n, sum(m.k for m in prediction.member_leaves)) == (leaf.n, leaf.k)


class TestAbstention:
    def _two_disagreeing_trees(self):
        positive = [
            CaseRecord(case_id=f"p{i}", features={"age": 30}, released=True,
                       outcomes={"fta": True})
            for i in range(100)
        ]
        negative = [
            CaseRecord(case_id=f"n{i}", features={"age": 30}, released=True,
                       outcomes={"fta": False})
            for i in range(100)
        ]
        params = dict(min_cluster_size=10, max_depth=0, high_risk_max_fpr=0.3,
                      very_low_max_fnr=0.3)
        tree_high = HandoffTreeClassifier(**params).fit(positive)
        tree_low = HandoffTreeClassifier(**params).fit(negative)
        return tree_high, tree_low

    def test_dissent_beyond_threshold_hands_off(self):
        tree_high, tree_low = self._two_disagreeing_trees()
        forest = HandoffForestClassifier(
            tree_count=2, min_cluster_size=10, disagreement_max=0.25,
            high_risk_max_fpr=0.9, very_low_max_fnr=0.9,
        )
        forest.trees_ = (tree_high, tree_low)
        forest.member_seeds_ = (0, 1)
        forest.n_samples_ = 200
        prediction = forest.predict({"age": 30})
        assert prediction.disagreement == 0.5
        assert prediction.label == HANDOFF
        assert prediction.error_rate is None
        assert prediction.k is None

    def test_same_pool_with_tolerant_gate_labels(self):
        tree_high, tree_low = self._two_disagreeing_trees()
        forest = HandoffForestClassifier(
            tree_count=2, min_cluster_size=10, disagreement_max=1.0,
            high_risk_max_fpr=0.9, very_low_max_fnr=0.3,
        )
        forest.trees_ = (tree_high, tree_low)
        forest.member_seeds_ = (0, 1)
        forest.n_samples_ = 200
        prediction = forest.predict({"age": 30})
        # pooled p* = 100/200 = 0.5: FPR 0.5 <= 0.9, tie goes to HighRisk
        assert prediction.label == HIGH_RISK
        assert prediction.error_rate == pytest.approx(0.5)


class TestContributions:
    def test_single_feature_gets_all_weight(self):
        records = region_dataset(54, n=1500)
        stripped = [
            CaseRecord(
                case_id=r.case_id,
                features={"prior_fta": r.features["prior_fta"]},
                released=True,
                outcomes=r.outcomes,
            )
            for r in records
        ]
        forest = HandoffForestClassifier(tree_count=5, min_cluster_size=60, max_depth=3,
                                         seed=2).fit(stripped)
        contributions = forest.feature_contributions({"prior_fta": 4})
        assert contributions == {"prior_fta": pytest.approx(1.0)}

    def test_root_leaf_forest_contributes_nothing(self):
        records = region_dataset(55, n=600)
        forest = HandoffForestClassifier(tree_count=3, min_cluster_size=50, max_depth=0,
                                         seed=4).fit(records)
        assert forest.feature_contributions({"age": 40, "prior_fta": 1}) == {}

    def test_dominant_feature_outweighs_secondary(self):
        # prior_fta carries almost all the signal; age nudges the rate a little
        rng = np.random.default_rng(56)
        records = []
        for i in range(4000):
            age = int(rng.integers(18, 71))
            priors = int(rng.integers(0, 6))
            p = 0.72 if priors >= 2 else 0.08
            p += 0.05 if age < 40 else 0.0
            records.append(
                CaseRecord(
                    case_id=f"d{i:05d}",
                    features={"age": age, "prior_fta": priors},
                    released=True,
                    outcomes={"fta": bool(rng.random() < p)},
                )
            )
        forest = HandoffForestClassifier(
            tree_count=9, min_cluster_size=100, max_depth=4, seed=5,
            feature_priority=("prior_fta", "age"),
        ).fit(records)
        contributions = forest.feature_contributions({"age": 45, "prior_fta": 0})
        assert set(contributions) <= {"age", "prior_fta"}
        assert contributions["prior_fta"] > contributions["age"]
        assert sum(contributions.values()) == pytest.approx(1.0)
        assert all(v >= 0 for v in contributions.values())


class TestDeterminismAndSerialization:
    def test_same_seed_twice_is_identical(self):
        records = region_dataset(57, n=1200)
        params = dict(tree_count=6, min_cluster_size=60, max_depth=3, seed=11)
        first = HandoffForestClassifier(**params).fit(records)
        second = HandoffForestClassifier(**params).fit(records)
        assert first.serialize() == second.serialize()

    def test_round_trip_identity(self):
        records = region_dataset(58, n=1200)
        forest = HandoffForestClassifier(tree_count=4, min_cluster_size=60, max_depth=3,
                                         seed=13).fit(records)
        clone = HandoffForestClassifier.deserialize(forest.serialize())
        assert clone.serialize() == forest.serialize()
        probe = {"age": 40, "prior_fta": 4}
        assert clone.predict(probe) == forest.predict(probe)

    def test_tampered_format_rejected(self):
        records = region_dataset(59, n=800)
        forest = HandoffForestClassifier(tree_count=2, min_cluster_size=60, max_depth=2,
                                         seed=17).fit(records)
        tampered = forest.serialize().replace(b"handoff-forest/v1", b"handoff-forest/v2")
        with pytest.raises(ConfigError, match="expected format"):
            HandoffForestClassifier.deserialize(tampered)

    def test_empty_document_rejected(self):
        with pytest.raises(ConfigError, match="empty"):
            HandoffForestClassifier.deserialize(b"")


class TestBoundarySmoothing:
    def test_pooled_jump_bounded_by_max_single_tree_jump(self):
        records = region_dataset(60, n=3000)
        forest = HandoffForestClassifier(
            tree_count=10, min_cluster_size=80, max_depth=4, seed=19,
            feature_priority=("prior_fta", "age"),
        ).fit(records)
        thresholds: set[tuple[str, float]] = set()
        for tree in forest.trees_:
            for region in tree.leaf_table():
                for condition, _ in region.conditions:
                    if condition.is_numeric:
                        thresholds.add((condition.feature, float(condition.threshold)))
        assert thresholds
        base = {"age": 45.0, "prior_fta": 1.0}
        checked = 0
        for feature, threshold in sorted(thresholds):
            low = dict(base)
            high = dict(base)
            low[feature] = threshold - 0.25
            high[feature] = threshold + 0.25
            pooled_jump = abs(_pooled_rate(forest, high) - _pooled_rate(forest, low))
            single_jumps = []
            for tree in forest.trees_:
                leaf_low, _ = tree._route(low)
                leaf_high, _ = tree._route(high)
                single_jumps.append(abs(leaf_high.positive_rate - leaf_low.positive_rate))
            assert pooled_jump <= max(single_jumps) + 1e-12, (feature, threshold)
            checked += 1
        assert checked >= 3


def _pooled_rate(forest: HandoffForestClassifier, features) -> float:
    n = k = 0
    for tree in forest.trees_:
        leaf, _ = tree._route(features)
        n += leaf.n
        k += leaf.k
    return k / n

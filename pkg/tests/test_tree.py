from __future__ import annotations

import numpy as np
import pytest

from pretrial.datasets import CaseRecord
from pretrial.errors import ConfigError, ValidationError
from pretrial.tree import (
    HANDOFF,
    HIGH_RISK,
    VERY_LOW_RISK,
    HandoffTreeClassifier,
)

from helpers import (
    check_determinism,
    check_handoff_monotonicity,
    check_min_cluster_sweep,
    check_min_support,
    check_partition,
    check_threshold_soundness,
    region_dataset,
    run_soundness_suite,
)


def labeled_records(pairs, prefix="r") -> list[CaseRecord]:
    return [
        CaseRecord(
            case_id=f"{prefix}-{i:04d}",
            features=dict(features),
            released=True,
            outcomes={"fta": outcome},
        )
        for i, (features, outcome) in enumerate(pairs)
    ]


@pytest.fixture(scope="module")
def narrative_tree(figure2_records, figure2_tree_params):
    return HandoffTreeClassifier(**figure2_tree_params).fit(figure2_records)


class TestFit:
    def test_narrative_regions_recovered(self, narrative_tree):
        for age in range(33, 61):
            prediction = narrative_tree.predict({"age": age, "prior_fta": 0})
            assert prediction.label == VERY_LOW_RISK
        for age in (18, 30, 45, 60, 70):
            for priors in (4, 5):
                prediction = narrative_tree.predict({"age": age, "prior_fta": priors})
                assert prediction.label == HIGH_RISK

    def test_all_positive_set_is_single_pure_high_risk_leaf(self):
        records = labeled_records(
            [({"age": 20 + i % 30, "prior_fta": i % 3}, True) for i in range(200)]
        )
        tree = HandoffTreeClassifier(
            min_cluster_size=10, high_risk_max_fpr=0.1, very_low_max_fnr=0.1
        ).fit(records)
        assert len(tree.leaves_) == 1
        leaf = tree.leaves_[0]
        assert leaf.label == HIGH_RISK
        assert leaf.error_rate == 0.0

    def test_inseparable_half_half_set_hands_off(self):
        # one constant feature: no split can separate the classes
        records = labeled_records(
            [({"age": 30}, i % 2 == 0) for i in range(400)]
        )
        tree = HandoffTreeClassifier(
            min_cluster_size=10, high_risk_max_fpr=0.3, very_low_max_fnr=0.2
        ).fit(records)
        assert all(leaf.label == HANDOFF for leaf in tree.leaves_)

    def test_rejects_unreleased_records(self):
        records = labeled_records([({"age": 20 + i}, i % 2 == 0) for i in range(40)])
        records.append(
            CaseRecord(case_id="detained", features={"age": 50}, released=False)
        )
        with pytest.raises(ValidationError) as exc_info:
            HandoffTreeClassifier(min_cluster_size=5).fit(records)
        assert exc_info.value.invariant == "released_only_training"

    def test_rejects_records_missing_target_outcome(self):
        records = labeled_records([({"age": 20 + i}, i % 2 == 0) for i in range(40)])
        records.append(
            CaseRecord(
                case_id="unlabeled",
                features={"age": 50},
                released=True,
                outcomes={"nca": True},
            )
        )
        with pytest.raises(ValidationError, match="lacks the 'fta' outcome"):
            HandoffTreeClassifier(min_cluster_size=5).fit(records)

    def test_rejects_too_few_records(self):
        records = labeled_records([({"age": 30}, True) for _ in range(19)])
        with pytest.raises(ValidationError, match="at least 20"):
            HandoffTreeClassifier(min_cluster_size=10).fit(records)

    def test_rejects_records_without_features(self):
        records = [
            CaseRecord(case_id=f"r{i}", features={}, released=True, outcomes={"fta": False})
            for i in range(30)
        ]
        with pytest.raises(ValidationError, match="no usable features"):
            HandoffTreeClassifier(min_cluster_size=5).fit(records)

    def test_protected_attributes_split_only_when_enabled(self):
        rng = np.random.default_rng(5)
        records = []
        for i in range(600):
            race = "amber" if i % 2 else "teal"
            p = 0.9 if race == "amber" else 0.1
            records.append(
                CaseRecord(
                    case_id=f"r{i:04d}",
                    features={"age": int(rng.integers(18, 70))},
                    released=True,
                    protected={"race": race},
                    outcomes={"fta": bool(rng.random() < p)},
                )
            )
        params = dict(min_cluster_size=30, max_depth=3, high_risk_max_fpr=0.3,
                      very_low_max_fnr=0.2)
        without = HandoffTreeClassifier(**params).fit(records)
        with_protected = HandoffTreeClassifier(include_protected=True, **params).fit(records)
        assert "race" not in without.feature_names_
        assert "race" in with_protected.feature_names_
        split_features = {
            condition.feature
            for region in with_protected.leaf_table()
            for condition, _ in region.conditions
        }
        assert "race" in split_features

    def test_feature_priority_breaks_near_ties(self):
        # two copies of the same informative feature: priority decides
        rng = np.random.default_rng(9)
        records = []
        for i in range(800):
            x = int(rng.integers(0, 2))
            records.append(
                CaseRecord(
                    case_id=f"r{i:04d}",
                    features={"alpha": x, "beta": x},
                    released=True,
                    outcomes={"fta": bool(rng.random() < (0.8 if x else 0.2))},
                )
            )
        prefer_beta = HandoffTreeClassifier(
            min_cluster_size=50, max_depth=1, feature_priority=("beta",)
        ).fit(records)
        root_condition = prefer_beta.root_.condition
        assert root_condition is not None and root_condition.feature == "beta"
        prefer_alpha = HandoffTreeClassifier(min_cluster_size=50, max_depth=1).fit(records)
        root_condition = prefer_alpha.root_.condition
        # no priority: lexicographic name breaks the exact tie
        assert root_condition is not None and root_condition.feature == "alpha"


class TestPredict:
    def test_high_risk_leaf_bundles_false_positive_rate(self, narrative_tree):
        prediction = narrative_tree.predict({"age": 40, "prior_fta": 5})
        assert prediction.label == HIGH_RISK
        assert prediction.error_rate == pytest.approx(0.60, abs=0.05)
        assert prediction.n >= 400
        assert prediction.k is not None

    def test_very_low_risk_leaf_bundles_false_negative_rate(self, narrative_tree):
        prediction = narrative_tree.predict({"age": 45, "prior_fta": 0})
        assert prediction.label == VERY_LOW_RISK
        assert prediction.error_rate == pytest.approx(0.13, abs=0.05)

    def test_handoff_prediction_withholds_rates(self, narrative_tree):
        prediction = narrative_tree.predict({"age": 20, "prior_fta": 0})
        assert prediction.label == HANDOFF
        assert prediction.error_rate is None
        assert prediction.k is None
        assert prediction.n > 0
        assert "error_rate" not in prediction.as_dict()

    def test_path_lists_satisfied_conditions(self, narrative_tree):
        prediction = narrative_tree.predict({"age": 45, "prior_fta": 0})
        assert prediction.path[0] == "prior_fta <= 0.5"
        assert any("age" in step for step in prediction.path)

    def test_missing_feature_is_validation_error(self, narrative_tree):
        with pytest.raises(ValidationError, match="missing feature"):
            narrative_tree.predict({"age": 40})

    def test_novel_categorical_level_routes_to_larger_branch(self):
        rng = np.random.default_rng(7)
        records = []
        for i in range(600):
            race = "amber" if i % 3 else "teal"  # amber twice as common
            p = 0.85 if race == "amber" else 0.15
            records.append(
                CaseRecord(
                    case_id=f"r{i:04d}",
                    features={"race": race},
                    released=True,
                    outcomes={"fta": bool(rng.random() < p)},
                )
            )
        tree = HandoffTreeClassifier(
            min_cluster_size=30, max_depth=2, high_risk_max_fpr=0.3, very_low_max_fnr=0.3
        ).fit(records)
        prediction = tree.predict({"race": "chartreuse"})
        assert any("novel level" in step for step in prediction.path)
        amber_leaf = tree.predict({"race": "amber"})
        assert prediction.leaf_id == amber_leaf.leaf_id


class TestLeafTable:
    def test_supports_sum_to_training_size(self, narrative_tree, figure2_records):
        assert sum(r.n for r in narrative_tree.leaf_table()) == len(figure2_records)

    def test_regions_reroute_their_training_members(self):
        records = region_dataset(21, n=900)
        tree = HandoffTreeClassifier(
            min_cluster_size=40, max_depth=4, feature_priority=("prior_fta", "age")
        ).fit(records)
        check_partition(tree, records)

    def test_pure_leaf_shows_zero_error(self):
        records = labeled_records(
            [({"age": 20}, True) for _ in range(60)] + [({"age": 60}, False) for _ in range(60)]
        )
        tree = HandoffTreeClassifier(
            min_cluster_size=10, high_risk_max_fpr=0.2, very_low_max_fnr=0.2
        ).fit(records)
        assert {leaf.error_rate for leaf in tree.leaves_} == {0.0}


class TestValidateRates:
    def test_holdout_equal_to_training_has_zero_gaps(self):
        records = region_dataset(31, n=1500)
        tree = HandoffTreeClassifier(min_cluster_size=100, max_depth=3).fit(records)
        rows = tree.validate_rates(records)
        assert all(row.gap == 0.0 for row in rows)
        assert not any(row.flagged for row in rows)

    def test_same_distribution_holdout_mostly_within_interval(self):
        records = region_dataset(32, n=2000)
        tree = HandoffTreeClassifier(
            min_cluster_size=150, max_depth=3, feature_priority=("prior_fta", "age")
        ).fit(records)
        holdout = region_dataset(33, n=10_000, prefix="holdout")
        rows = [row for row in tree.validate_rates(holdout) if row.holdout_n > 0]
        within = sum(not row.flagged for row in rows)
        assert within / len(rows) >= 0.9

    def test_shifted_holdout_is_flagged_not_rejected(self):
        records = region_dataset(34, n=2000)
        tree = HandoffTreeClassifier(min_cluster_size=150, max_depth=3).fit(records)
        shifted = tree.validate_rates(region_dataset(35, n=8000, shift=0.3, prefix="shift"))
        assert any(row.flagged for row in shifted)

    def test_rejects_ineligible_holdout(self):
        records = region_dataset(36, n=400)
        tree = HandoffTreeClassifier(min_cluster_size=40, max_depth=2).fit(records)
        bad = [CaseRecord(case_id="d", features={"age": 30, "prior_fta": 0}, released=False)]
        with pytest.raises(ValidationError, match="not training-eligible"):
            tree.validate_rates(bad)


class TestSerialization:
    def test_round_trip_is_identity(self, narrative_tree):
        data = narrative_tree.serialize()
        clone = HandoffTreeClassifier.deserialize(data)
        assert clone.serialize() == data
        assert clone.root_ == narrative_tree.root_
        assert clone.get_params() == narrative_tree.get_params()
        assert clone.feature_names_ == narrative_tree.feature_names_
        probe = {"age": 45, "prior_fta": 0}
        assert clone.predict(probe) == narrative_tree.predict(probe)

    def test_tampered_format_tag_rejected(self, narrative_tree):
        tampered = narrative_tree.serialize().replace(
            b"handoff-tree/v1", b"handoff-tree/v9"
        )
        with pytest.raises(ConfigError, match="expected format"):
            HandoffTreeClassifier.deserialize(tampered)

    def test_empty_input_rejected(self):
        with pytest.raises(ConfigError, match="empty"):
            HandoffTreeClassifier.deserialize(b"")


class TestSoundnessProperties:
    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_soundness_suite(self, seed):
        run_soundness_suite(seed)

    def test_determinism_under_record_shuffle(self):
        records = region_dataset(41, n=900)
        check_determinism(
            records, dict(min_cluster_size=50, max_depth=4, feature_priority=("prior_fta",))
        )

    def test_handoff_monotonicity_under_loosening(self):
        records = region_dataset(42, n=1200)
        check_handoff_monotonicity(
            records,
            dict(min_cluster_size=60, max_depth=4, high_risk_max_fpr=0.55,
                 very_low_max_fnr=0.1),
        )

    def test_min_cluster_sweep_never_adds_leaves(self):
        records = region_dataset(43, n=1200)
        check_min_cluster_sweep(records, dict(max_depth=5))

    def test_threshold_and_support_invariants(self):
        records = region_dataset(44, n=1500)
        tree = HandoffTreeClassifier(
            min_cluster_size=70, max_depth=5, high_risk_max_fpr=0.65, very_low_max_fnr=0.2
        ).fit(records)
        check_threshold_soundness(tree)
        check_min_support(tree)

"""Shared test machinery: region-structured synthetic data, the brute-force
AUC oracle, and the tree soundness checks reused by the acceptance suite."""

from __future__ import annotations

import numpy as np

from pretrial.datasets import CaseRecord
from pretrial.fairness import ScoredCase
from pretrial.tree import HANDOFF, HIGH_RISK, VERY_LOW_RISK, HandoffTreeClassifier

RATE_EPS = 1e-9


def pairwise_auc(cases) -> float:
    """Independent oracle: exhaustive enumeration of positive x negative pairs,
    ties counted one half."""
    positives = [c.score for c in cases if c.outcome]
    negatives = [c.score for c in cases if not c.outcome]
    wins = 0.0
    for p in positives:
        for n in negatives:
            if p > n:
                wins += 1.0
            elif p == n:
                wins += 0.5
    return wins / (len(positives) * len(negatives))


def random_scored_cases(seed: int, n: int = 200, tie_fraction: float = 0.3) -> list[ScoredCase]:
    rng = np.random.default_rng(seed)
    scores = rng.normal(size=n)
    # coarsen a slice of the scores so tie handling is actually exercised
    ties = rng.random(n) < tie_fraction
    scores[ties] = np.round(scores[ties], 1)
    outcomes = rng.random(n) < 0.4
    if not outcomes.any():
        outcomes[0] = True
    if outcomes.all():
        outcomes[0] = False
    return [ScoredCase(float(s), bool(o)) for s, o in zip(scores, outcomes)]


def region_probability(age: int, prior_fta: int) -> float:
    if prior_fta >= 4:
        return 0.40
    if prior_fta == 0 and 33 <= age <= 60:
        return 0.13
    return 0.50


def region_dataset(
    seed: int,
    n: int = 1200,
    categorical: bool = False,
    shift: float = 0.0,
    prefix: str = "case",
) -> list[CaseRecord]:
    """Two-feature piecewise population: a low-risk block at ages 33-60 with no
    prior failures, a 40%-risk block at 4+ priors, coin flips elsewhere."""
    rng = np.random.default_rng(seed)
    ages = rng.integers(18, 71, size=n)
    priors = rng.choice([0, 1, 2, 3, 4, 5], size=n, p=[0.35, 0.2, 0.15, 0.1, 0.1, 0.1])
    draws = rng.random(n)
    races = rng.choice(["amber", "teal"], size=n)
    records = []
    for i in range(n):
        p = min(1.0, max(0.0, region_probability(int(ages[i]), int(priors[i])) + shift))
        features: dict[str, float | str] = {"age": int(ages[i]), "prior_fta": int(priors[i])}
        if categorical:
            features["race"] = str(races[i])
        records.append(
            CaseRecord(
                case_id=f"{prefix}-{i:05d}",
                features=features,
                released=True,
                outcomes={"fta": bool(draws[i] < p)},
            )
        )
    return records


def check_partition(tree: HandoffTreeClassifier, records) -> None:
    """Every record routes to exactly one leaf, and the leaf regions tile the
    training set (each training record satisfies exactly its own region)."""
    regions = tree.leaf_table()
    assert sum(region.n for region in regions) == len(records)
    by_id = {region.leaf_id: region for region in regions}
    for record in records:
        prediction = tree.predict(record.features)
        matches = [r.leaf_id for r in regions if r.contains(record.features)]
        assert matches == [prediction.leaf_id]
        assert by_id[prediction.leaf_id].label == prediction.label


def check_threshold_soundness(tree: HandoffTreeClassifier) -> None:
    m = tree.min_cluster_size
    fpr = tree.high_risk_max_fpr
    fnr = tree.very_low_max_fnr
    for leaf in tree.leaves_:
        high_ok = (leaf.n - leaf.k) <= fpr * leaf.n + RATE_EPS
        low_ok = leaf.k <= fnr * leaf.n + RATE_EPS
        if leaf.label == HIGH_RISK:
            assert leaf.n >= m and high_ok
        elif leaf.label == VERY_LOW_RISK:
            assert leaf.n >= m and low_ok
        else:
            assert leaf.label == HANDOFF
            assert leaf.n < m or not (high_ok or low_ok)


def check_min_support(tree: HandoffTreeClassifier) -> None:
    for leaf in tree.leaves_:
        if leaf.label != HANDOFF:
            assert leaf.n >= tree.min_cluster_size


def check_determinism(records, params: dict) -> None:
    rng = np.random.default_rng(1234)
    shuffled = list(records)
    rng.shuffle(shuffled)
    first = HandoffTreeClassifier(**params).fit(records)
    second = HandoffTreeClassifier(**params).fit(shuffled)
    assert first.serialize() == second.serialize()


def check_handoff_monotonicity(records, params: dict) -> None:
    tight = HandoffTreeClassifier(**params).fit(records)
    loose_params = dict(params)
    loose_params["high_risk_max_fpr"] = min(1.0, params.get("high_risk_max_fpr", 0.6) + 0.15)
    loose_params["very_low_max_fnr"] = min(1.0, params.get("very_low_max_fnr", 0.15) + 0.15)
    loose = HandoffTreeClassifier(**loose_params).fit(records)
    assert loose.handoff_training_count() <= tight.handoff_training_count()


def check_min_cluster_sweep(records, params: dict, sizes=(20, 50, 100, 200)) -> None:
    leaf_counts = []
    for size in sizes:
        swept = dict(params)
        swept["min_cluster_size"] = size
        leaf_counts.append(len(HandoffTreeClassifier(**swept).fit(records).leaves_))
    assert leaf_counts == sorted(leaf_counts, reverse=True)


def run_soundness_suite(seed: int) -> None:
    params = dict(
        target_outcome="fta",
        min_cluster_size=60,
        max_depth=5,
        high_risk_max_fpr=0.65,
        very_low_max_fnr=0.2,
        feature_priority=("prior_fta", "age"),
    )
    records = region_dataset(seed, n=1500, categorical=(seed % 2 == 0))
    tree = HandoffTreeClassifier(**params).fit(records)
    check_partition(tree, records)
    check_threshold_soundness(tree)
    check_min_support(tree)
    check_determinism(records, params)
    check_handoff_monotonicity(records, params)
    check_min_cluster_sweep(records, params)

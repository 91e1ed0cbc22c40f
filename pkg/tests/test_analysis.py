"""Study analysis over synthetic export datasets."""

import json
import math
import random

import pytest

from scentplan.stats import analyze_study1, analyze_study2
from scentplan.stats.analysis import CONSTRUCTS, aggregate_rankings

CONDITIONS3 = ("system", "over_inclusive", "naive")
CONDITIONS2 = ("system", "over_inclusive")


def study1_dataset(rankings_per_participant):
    """rankings_per_participant: list (one per participant) of ranking lists."""
    sessions = []
    for i, rankings in enumerate(rankings_per_participant):
        responses = [
            {
                "session_id": f"s{i:02d}",
                "question_id": f"q{q:02d}",
                "clip_id": f"clip{q:02d}",
                "ranking": list(r),
                "likert": None,
                "preference": None,
                "free_text": None,
            }
            for q, r in enumerate(rankings)
        ]
        sessions.append(
            {"session_id": f"s{i:02d}", "participant_id": f"p{i:02d}", "responses": responses}
        )
    return {
        "study_id": "study1",
        "conditions": list(CONDITIONS3),
        "clip_ids": [f"clip{q:02d}" for q in range(len(rankings_per_participant[0]))],
        "sessions": sessions,
    }


def study2_dataset(scores_per_participant):
    """scores_per_participant: list of {construct: {condition: [clip scores]}}."""
    sessions = []
    for i, scores in enumerate(scores_per_participant):
        n_clips = len(next(iter(next(iter(scores.values())).values())))
        responses = []
        for q in range(n_clips):
            likert = {
                construct: {cond: scores[construct][cond][q] for cond in CONDITIONS2}
                for construct in scores
            }
            responses.append(
                {
                    "session_id": f"s{i:02d}",
                    "question_id": f"q{q:02d}",
                    "clip_id": f"clip{q:02d}",
                    "ranking": None,
                    "likert": likert,
                    "preference": "system",
                    "free_text": None,
                }
            )
        sessions.append(
            {"session_id": f"s{i:02d}", "participant_id": f"p{i:02d}", "responses": responses}
        )
    return {
        "study_id": "study2",
        "conditions": list(CONDITIONS2),
        "clip_ids": [f"clip{q:02d}" for q in range(3)],
        "sessions": sessions,
    }


def all_agree_dataset(n_participants=14, n_clips=10):
    return study1_dataset([[CONDITIONS3] * n_clips] * n_participants)


# ------------------------------------------------------------- aggregation


def test_all_agree_mean_ranks():
    matrix, summary = aggregate_rankings(all_agree_dataset(), iterations=1000)
    means = {cs.condition: cs.mean_rank for cs in summary.conditions}
    assert means == {"system": 1.0, "over_inclusive": 2.0, "naive": 3.0}
    rates = {cs.condition: cs.rank1_rate for cs in summary.conditions}
    assert rates == {"system": 1.0, "over_inclusive": 0.0, "naive": 0.0}
    assert matrix.n_trials == 140


def test_aggregation_sums_invariant_on_random_datasets():
    rng = random.Random(11)
    for _ in range(100):
        n_participants = rng.randint(2, 8)
        n_clips = rng.randint(1, 6)
        data = []
        for _ in range(n_participants):
            rankings = []
            for _ in range(n_clips):
                order = list(CONDITIONS3)
                rng.shuffle(order)
                rankings.append(tuple(order))
            data.append(rankings)
        _, summary = aggregate_rankings(study1_dataset(data), iterations=1000)
        assert sum(cs.mean_rank for cs in summary.conditions) == pytest.approx(6.0, abs=1e-9)
        assert sum(cs.rank1_rate for cs in summary.conditions) == pytest.approx(1.0, abs=1e-9)


def test_aggregate_rejects_bad_permutation():
    data = study1_dataset([[("system", "system", "naive")]])
    with pytest.raises(ValueError, match="not a permutation"):
        aggregate_rankings(data, iterations=1000)


def test_aggregate_rejects_empty_dataset():
    with pytest.raises(ValueError, match="empty dataset"):
        aggregate_rankings({"conditions": list(CONDITIONS3), "sessions": []})


def test_aggregate_rejects_session_without_rankings():
    data = study1_dataset([[CONDITIONS3]])
    data["sessions"][0]["responses"][0]["ranking"] = None
    with pytest.raises(ValueError, match="no rankings"):
        aggregate_rankings(data, iterations=1000)


# ----------------------------------------------------------------- study 1


def test_study1_all_agree_report():
    report = analyze_study1(all_agree_dataset(), iterations=1000)
    assert report.n_participants == 14
    assert report.friedman.statistic == pytest.approx(28.0, abs=1e-9)
    # every pairwise diff vector is 14 identical values: one magnitude tie,
    # so the normal path applies with W = 0
    expected_p = math.erfc((52.5 / math.sqrt(196.875)) / math.sqrt(2))
    for pair in report.pairwise:
        assert pair.test.method == "wilcoxon_normal"
        assert pair.test.statistic == 0
        assert pair.test.p == pytest.approx(expected_p, rel=1e-12)
        assert pair.test.p_holm == pytest.approx(3 * expected_p, rel=1e-9)


def test_study1_per_trial_friedman_mode():
    report = analyze_study1(all_agree_dataset(), iterations=1000, per_trial_friedman=True)
    # 140 unanimous trial blocks instead of 14 participant blocks
    assert report.friedman.statistic == pytest.approx(280.0, abs=1e-9)


def test_study1_report_layout():
    text = analyze_study1(all_agree_dataset(), iterations=1000).render_text()
    assert "Mean Rank" in text
    assert "Rank 1 Rate" in text
    for header in ("Pair", "W", "p", "p_Holm"):
        assert header in text
    assert "System vs. Over" in text
    assert "Over vs. Naive" in text


def test_study1_determinism():
    a = analyze_study1(all_agree_dataset(), iterations=1000, seed=5)
    b = analyze_study1(all_agree_dataset(), iterations=1000, seed=5)
    assert a.render_text() == b.render_text()
    assert json.dumps(a.to_dict(), sort_keys=True) == json.dumps(b.to_dict(), sort_keys=True)


def test_study1_requires_three_conditions():
    data = study1_dataset([[CONDITIONS3]])
    data["conditions"] = ["system", "naive"]
    with pytest.raises(ValueError):
        analyze_study1(data, iterations=1000)


# ----------------------------------------------------------------- study 2


def _uniform_scores(sys_scores, base_scores):
    return {
        construct: {"system": list(sys_scores), "over_inclusive": list(base_scores)}
        for construct in CONSTRUCTS
    }


def test_study2_delta_arithmetic():
    scores = _uniform_scores((6, 6, 6), (5, 4, 5))
    report = analyze_study2(study2_dataset([scores] * 8), iterations=1000)
    by_id = {cs.construct_id: cs for cs in report.constructs}
    assert by_id["immersion"].delta_mean == pytest.approx(6 - 14 / 3)
    # distraction flips: positive delta means the baseline distracted more
    assert by_id["distraction"].delta_mean == pytest.approx(14 / 3 - 6)


def test_study2_distraction_flip():
    scores = _uniform_scores((6, 6, 6), (5, 4, 5))
    scores["distraction"] = {"system": [2, 2, 2], "over_inclusive": [5, 4, 3]}
    report = analyze_study2(study2_dataset([scores] * 8), iterations=1000)
    by_id = {cs.construct_id: cs for cs in report.constructs}
    assert by_id["distraction"].delta_mean == pytest.approx(2.0)


def test_study2_preference_rate_all_positive():
    scores = _uniform_scores((6, 6, 6), (5, 4, 5))
    # distraction is scored in the opposite direction, so "system wins"
    # means the system plan scores lower
    scores["distraction"] = {"system": [2, 2, 2], "over_inclusive": [4, 5, 4]}
    report = analyze_study2(study2_dataset([scores] * 8), iterations=1000)
    for cs in report.constructs:
        assert cs.preference_rate == 1.0
        assert cs.delta_mean > 0
    assert report.n_participants == 8


def test_study2_holm_across_four_constructs():
    rng = random.Random(2)
    data = []
    for _ in range(8):
        scores = {
            construct: {
                "system": [rng.randint(4, 7) for _ in range(3)],
                "over_inclusive": [rng.randint(1, 5) for _ in range(3)],
            }
            for construct in CONSTRUCTS
        }
        data.append(scores)
    report = analyze_study2(study2_dataset(data), iterations=1000)
    raw = [cs.test.p for cs in report.constructs]
    holm = [cs.test.p_holm for cs in report.constructs]
    assert all(h >= p - 1e-15 for p, h in zip(raw, holm))
    assert max(holm) <= 1.0


def test_study2_report_layout():
    scores = _uniform_scores((6, 6, 6), (5, 4, 5))
    text = analyze_study2(study2_dataset([scores] * 8), iterations=1000).render_text()
    for label in ("Immersion", "Distraction", "Coherence", "Easy to imagine"):
        assert label in text
    for header in ("Preference Rate", "W", "p", "p_Holm"):
        assert header in text


def test_study2_rejects_out_of_range_likert():
    scores = _uniform_scores((6, 6, 9), (5, 4, 5))
    with pytest.raises(ValueError, match="out of range"):
        analyze_study2(study2_dataset([scores] * 8), iterations=1000)


def test_study2_rejects_wrong_condition_count():
    scores = _uniform_scores((6, 6, 6), (5, 4, 5))
    data = study2_dataset([scores] * 8)
    data["conditions"] = list(CONDITIONS3)
    with pytest.raises(ValueError, match="2 conditions"):
        analyze_study2(data, iterations=1000)

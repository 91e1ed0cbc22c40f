"""Study analysis: ranking aggregation and the report tables for both studies.

Input is the harness export dataset (one document per session).  All
aggregation happens at the participant level: per-participant mean ranks for
study 1, per-participant construct score differences for study 2.  Bootstrap
intervals resample participants, never individual trials.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal

import numpy as np

from .bootstrap import DEFAULT_ITERATIONS, DEFAULT_SEED, bootstrap_ci
from .nonparametric import TestResult, friedman_test, holm_correct, wilcoxon_signed_rank

CONSTRUCTS = ("immersion", "distraction", "coherence", "easy_to_imagine")

_CONDITION_LABELS = {"system": "System", "over_inclusive": "Over", "naive": "Naive"}
_CONSTRUCT_LABELS = {
    "immersion": "Immersion",
    "distraction": "Distraction",
    "coherence": "Coherence",
    "easy_to_imagine": "Easy to imagine",
}
# Distraction is scored so that higher = worse; its delta is flipped so that
# a positive delta always favours the system plan.
_FLIPPED_CONSTRUCTS = frozenset({"distraction"})


def condition_label(condition: str) -> str:
    return _CONDITION_LABELS.get(condition, condition.replace("_", " ").title())


@dataclass(frozen=True)
class RankingMatrix:
    participants: tuple[str, ...]
    conditions: tuple[str, ...]
    mean_ranks: np.ndarray  # participants x conditions
    rank1_props: np.ndarray  # per-participant share of trials ranked first
    n_trials: int


@dataclass(frozen=True)
class ConditionSummary:
    condition: str
    mean_rank: float
    ci_low: float
    ci_high: float
    rank1_rate: float
    rank1_ci_low: float
    rank1_ci_high: float


@dataclass(frozen=True)
class RankSummary:
    conditions: tuple[ConditionSummary, ...]


@dataclass(frozen=True)
class PairResult:
    condition_a: str
    condition_b: str
    test: TestResult

    @property
    def label(self) -> str:
        return f"{condition_label(self.condition_a)} vs. {condition_label(self.condition_b)}"


@dataclass(frozen=True)
class ConstructSummary:
    construct_id: str
    delta_mean: float
    ci_low: float
    ci_high: float
    preference_rate: float
    pref_ci_low: float
    pref_ci_high: float
    test: TestResult

    @property
    def label(self) -> str:
        return _CONSTRUCT_LABELS.get(self.construct_id, self.construct_id)


def _sessions(dataset: dict) -> list[dict]:
    sessions = dataset.get("sessions", [])
    if not sessions:
        raise ValueError("empty dataset: no complete sessions to analyze")
    return sessions


def aggregate_rankings(
    dataset: dict,
    iterations: int = DEFAULT_ITERATIONS,
    seed: int = DEFAULT_SEED,
) -> tuple[RankingMatrix, RankSummary]:
    """Participant-level rank aggregation plus the descriptive summary.

    A condition's rank in one trial is its 1-based position in that trial's
    most-to-least-suitable ranking.  The summary mean rank averages the
    per-participant means; the rank-1 rate is the share of all
    participant x clip trials ranked first.
    """
    sessions = _sessions(dataset)
    conditions = tuple(dataset["conditions"])
    k = len(conditions)

    participants: list[str] = []
    mean_rows: list[list[float]] = []
    rank1_rows: list[list[float]] = []
    n_trials = 0
    for sess in sessions:
        ranks_per_cond: dict[str, list[int]] = {c: [] for c in conditions}
        firsts: dict[str, int] = {c: 0 for c in conditions}
        trials = 0
        for rec in sess["responses"]:
            ranking = rec.get("ranking")
            if ranking is None:
                continue
            if sorted(ranking) != sorted(conditions):
                raise ValueError(
                    f"session '{sess['session_id']}': ranking {ranking} is not a "
                    f"permutation of {list(conditions)}"
                )
            for pos, cond in enumerate(ranking):
                ranks_per_cond[cond].append(pos + 1)
            firsts[ranking[0]] += 1
            trials += 1
        if trials == 0:
            raise ValueError(f"session '{sess['session_id']}' has no rankings")
        participants.append(sess["participant_id"])
        mean_rows.append([sum(ranks_per_cond[c]) / trials for c in conditions])
        rank1_rows.append([firsts[c] / trials for c in conditions])
        n_trials += trials

    matrix = RankingMatrix(
        participants=tuple(participants),
        conditions=conditions,
        mean_ranks=np.asarray(mean_rows),
        rank1_props=np.asarray(rank1_rows),
        n_trials=n_trials,
    )
    summaries = []
    for j, cond in enumerate(conditions):
        mean_col = matrix.mean_ranks[:, j]
        rank1_col = matrix.rank1_props[:, j]
        ci = bootstrap_ci(mean_col, "mean", iterations, seed)
        rci = bootstrap_ci(rank1_col, "proportion", iterations, seed)
        summaries.append(
            ConditionSummary(
                condition=cond,
                mean_rank=float(mean_col.mean()),
                ci_low=ci[0],
                ci_high=ci[1],
                rank1_rate=float(rank1_col.mean()),
                rank1_ci_low=rci[0],
                rank1_ci_high=rci[1],
            )
        )
    return matrix, RankSummary(conditions=tuple(summaries))


def _fmt_p(p: float) -> str:
    """Three significant figures with half-up rounding (0.03125 prints 0.0313)."""
    if p <= 0.0:
        return "0"
    d = Decimal(repr(float(p)))
    quantum = Decimal(1).scaleb(d.adjusted() - 2)
    return f"{float(d.quantize(quantum, rounding=ROUND_HALF_UP)):g}"


@dataclass(frozen=True)
class Study1Report:
    summary: RankSummary
    friedman: TestResult
    pairwise: tuple[PairResult, ...]
    n_participants: int

    def render_text(self) -> str:
        lines = [f"Study 1 aggregated ranking descriptive (n={self.n_participants})."]
        header = (
            f"{'Condition':<10}{'Mean Rank':>10}{'CI_low':>8}{'CI_high':>8}"
            f"{'Rank 1 Rate':>13}{'CI_low':>8}{'CI_high':>8}"
        )
        lines.append(header)
        for cs in self.summary.conditions:
            lines.append(
                f"{condition_label(cs.condition):<10}{cs.mean_rank:>10.3f}{cs.ci_low:>8.3f}"
                f"{cs.ci_high:>8.3f}{cs.rank1_rate:>13.3f}{cs.rank1_ci_low:>8.3f}"
                f"{cs.rank1_ci_high:>8.3f}"
            )
        lines.append("")
        lines.append(
            f"Friedman chi2 = {self.friedman.statistic:.2f}, p = {_fmt_p(self.friedman.p)}"
        )
        lines.append("")
        lines.append("Pairwise Wilcoxon signed-rank tests with Holm correction.")
        lines.append(f"{'Pair':<18}{'W':>7}{'p':>10}{'p_Holm':>10}")
        for pair in self.pairwise:
            holm = pair.test.p_holm if pair.test.p_holm is not None else pair.test.p
            lines.append(
                f"{pair.label:<18}{pair.test.statistic:>7.1f}{_fmt_p(pair.test.p):>10}"
                f"{_fmt_p(holm):>10}"
            )
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {
            "study": "study1",
            "n_participants": self.n_participants,
            "conditions": [
                {
                    "condition": cs.condition,
                    "mean_rank": cs.mean_rank,
                    "ci_low": cs.ci_low,
                    "ci_high": cs.ci_high,
                    "rank1_rate": cs.rank1_rate,
                    "rank1_ci_low": cs.rank1_ci_low,
                    "rank1_ci_high": cs.rank1_ci_high,
                }
                for cs in self.summary.conditions
            ],
            "friedman": {
                "statistic": self.friedman.statistic,
                "p": self.friedman.p,
                "n": self.friedman.n_effective,
            },
            "pairwise": [
                {
                    "pair": pair.label,
                    "method": pair.test.method,
                    "W": pair.test.statistic,
                    "n_effective": pair.test.n_effective,
                    "p": pair.test.p,
                    "p_holm": pair.test.p_holm,
                }
                for pair in self.pairwise
            ],
        }


def _trial_rank_rows(dataset: dict, conditions: tuple[str, ...]) -> np.ndarray:
    rows = []
    for sess in _sessions(dataset):
        for rec in sess["responses"]:
            ranking = rec.get("ranking")
            if ranking is None:
                continue
            rows.append([ranking.index(c) + 1 for c in conditions])
    return np.asarray(rows, dtype=float)


def analyze_study1(
    dataset: dict,
    iterations: int = DEFAULT_ITERATIONS,
    seed: int = DEFAULT_SEED,
    per_trial_friedman: bool = False,
) -> Study1Report:
    """Full study-1 analysis: descriptives, Friedman, Holm-corrected pairwise tests.

    The Friedman test runs on participant-aggregated mean ranks; pass
    ``per_trial_friedman`` to instead rank every participant x clip trial as
    its own block (a sensitivity analysis — pairwise tests are unaffected).
    Pairwise Wilcoxon tests run on participant-aggregated mean ranks for each
    condition pair, with Holm correction across the three pairs.
    """
    matrix, summary = aggregate_rankings(dataset, iterations, seed)
    if len(matrix.conditions) != 3:
        raise ValueError(f"study 1 expects 3 conditions, got {len(matrix.conditions)}")
    if per_trial_friedman:
        friedman = friedman_test(_trial_rank_rows(dataset, matrix.conditions))
    else:
        friedman = friedman_test(matrix.mean_ranks)

    pairs = [(0, 1), (0, 2), (1, 2)]
    tests = []
    for i, j in pairs:
        diffs = matrix.mean_ranks[:, i] - matrix.mean_ranks[:, j]
        tests.append(wilcoxon_signed_rank(diffs))
    holm = holm_correct([t.p for t in tests])
    pairwise = tuple(
        PairResult(matrix.conditions[i], matrix.conditions[j], t.with_holm(h))
        for (i, j), t, h in zip(pairs, tests, holm)
    )
    return Study1Report(
        summary=summary,
        friedman=friedman,
        pairwise=pairwise,
        n_participants=len(matrix.participants),
    )


@dataclass(frozen=True)
class Study2Report:
    constructs: tuple[ConstructSummary, ...]
    n_participants: int

    def render_text(self) -> str:
        lines = [
            f"Study 2 aggregated results, system plan vs. over-inclusive baseline "
            f"(n={self.n_participants})."
        ]
        lines.append(
            f"{'Construct':<17}{'dMean':>7}{'CI_low':>8}{'CI_high':>8}"
            f"{'Preference Rate':>17}{'CI_low':>8}{'CI_high':>8}{'W':>6}{'p':>9}{'p_Holm':>9}"
        )
        for cs in self.constructs:
            holm = cs.test.p_holm if cs.test.p_holm is not None else cs.test.p
            lines.append(
                f"{cs.label:<17}{cs.delta_mean:>7.2f}{cs.ci_low:>8.2f}{cs.ci_high:>8.2f}"
                f"{cs.preference_rate:>17.2f}{cs.pref_ci_low:>8.2f}{cs.pref_ci_high:>8.2f}"
                f"{cs.test.statistic:>6.1f}{_fmt_p(cs.test.p):>9}{_fmt_p(holm):>9}"
            )
        lines.append("")
        lines.append("dMean = System - Baseline (Baseline - System for distraction).")
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {
            "study": "study2",
            "n_participants": self.n_participants,
            "constructs": [
                {
                    "construct": cs.construct_id,
                    "delta_mean": cs.delta_mean,
                    "ci_low": cs.ci_low,
                    "ci_high": cs.ci_high,
                    "preference_rate": cs.preference_rate,
                    "pref_ci_low": cs.pref_ci_low,
                    "pref_ci_high": cs.pref_ci_high,
                    "method": cs.test.method,
                    "W": cs.test.statistic,
                    "n_effective": cs.test.n_effective,
                    "p": cs.test.p,
                    "p_holm": cs.test.p_holm,
                }
                for cs in self.constructs
            ],
        }


def analyze_study2(
    dataset: dict,
    iterations: int = DEFAULT_ITERATIONS,
    seed: int = DEFAULT_SEED,
) -> Study2Report:
    """Full study-2 analysis: per-construct deltas, preference rates, Wilcoxon + Holm.

    Each participant's construct score is the mean Likert rating across that
    participant's clips, per condition.  Delta is system minus baseline
    (flipped for distraction).  The preference rate is the share of
    participants with a strictly positive delta.
    """
    sessions = _sessions(dataset)
    conditions = list(dataset["conditions"])
    if len(conditions) != 2:
        raise ValueError(f"study 2 expects 2 conditions, got {len(conditions)}")
    system = "system" if "system" in conditions else conditions[0]
    baseline = next(c for c in conditions if c != system)

    deltas: dict[str, list[float]] = {c: [] for c in CONSTRUCTS}
    for sess in sessions:
        scores: dict[str, dict[str, list[int]]] = {
            c: {system: [], baseline: []} for c in CONSTRUCTS
        }
        for rec in sess["responses"]:
            likert = rec.get("likert")
            if likert is None:
                continue
            for construct, per_cond in likert.items():
                if construct not in scores:
                    raise ValueError(f"unknown construct '{construct}'")
                for cond, value in per_cond.items():
                    if not 1 <= int(value) <= 7:
                        raise ValueError(f"Likert value {value} out of range 1..7")
                    scores[construct][cond].append(int(value))
        for construct in CONSTRUCTS:
            sys_scores = scores[construct][system]
            base_scores = scores[construct][baseline]
            if not sys_scores or not base_scores:
                raise ValueError(
                    f"session '{sess['session_id']}' missing '{construct}' ratings"
                )
            delta = float(np.mean(sys_scores)) - float(np.mean(base_scores))
            if construct in _FLIPPED_CONSTRUCTS:
                delta = -delta
            deltas[construct].append(delta)

    tests = {c: wilcoxon_signed_rank(deltas[c]) for c in CONSTRUCTS}
    holm = holm_correct([tests[c].p for c in CONSTRUCTS])
    constructs = []
    for construct, p_holm in zip(CONSTRUCTS, holm):
        values = np.asarray(deltas[construct])
        ci = bootstrap_ci(values, "mean", iterations, seed)
        prefs = (values > 0).astype(float)
        pref_ci = bootstrap_ci(prefs, "proportion", iterations, seed)
        constructs.append(
            ConstructSummary(
                construct_id=construct,
                delta_mean=float(values.mean()),
                ci_low=ci[0],
                ci_high=ci[1],
                preference_rate=float(prefs.mean()),
                pref_ci_low=pref_ci[0],
                pref_ci_high=pref_ci[1],
                test=tests[construct].with_holm(p_holm),
            )
        )
    return Study2Report(constructs=tuple(constructs), n_participants=len(sessions))

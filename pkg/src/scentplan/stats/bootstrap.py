"""Seeded percentile bootstrap over participants."""

from __future__ import annotations

import numpy as np

DEFAULT_ITERATIONS = 10_000
DEFAULT_SEED = 20240613

_STATISTICS = ("mean", "proportion")


def bootstrap_ci(
    values,
    statistic: str = "mean",
    iterations: int = DEFAULT_ITERATIONS,
    seed: int = DEFAULT_SEED,
) -> tuple[float, float]:
    """95% percentile bootstrap interval for a participant-level statistic.

    Participants are resampled with replacement ``iterations`` times from a
    generator seeded with ``seed``; the interval is the 2.5/97.5 percentile
    of the resampled statistics.  ``proportion`` treats values as 0/1
    indicators; both statistics reduce to a resampled mean.
    """
    if statistic not in _STATISTICS:
        raise ValueError(f"statistic must be one of {_STATISTICS}, got '{statistic}'")
    if iterations < 1000:
        raise ValueError(f"iterations must be at least 1000, got {iterations}")
    data = np.asarray(values, dtype=float).ravel()
    if data.size == 0:
        raise ValueError("cannot bootstrap an empty sample")

    rng = np.random.default_rng(seed)
    idx = rng.integers(0, data.size, size=(iterations, data.size))
    stats = data[idx].mean(axis=1)
    low, high = np.percentile(stats, [2.5, 97.5])
    return float(low), float(high)

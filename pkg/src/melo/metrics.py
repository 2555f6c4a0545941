"""Prediction-quality metrics: AUC (Mann-Whitney), RMSE and accuracy."""

from __future__ import annotations

import math
from typing import Iterable, Sequence


def auc(pairs: Iterable[tuple[float, int]]) -> float | None:
    """Area under the ROC curve via the rank-sum (Mann-Whitney) statistic.

    Equals the probability that a random positive scores above a random
    negative, with half credit for ties. Returns None when the labels are
    degenerate (no positives or no negatives), in which case the AUC is
    undefined.
    """
    scored = sorted(pairs, key=lambda p: p[0])
    n = len(scored)
    n_pos = sum(1 for _, label in scored if label == 1)
    n_neg = n - n_pos
    if n_pos == 0 or n_neg == 0:
        return None
    # Average ranks within tied-score groups, then sum positive ranks.
    rank_sum_pos = 0.0
    i = 0
    while i < n:
        j = i
        while j < n and scored[j][0] == scored[i][0]:
            j += 1
        avg_rank = (i + 1 + j) / 2.0  # mean of ranks i+1 .. j
        rank_sum_pos += avg_rank * sum(1 for k in range(i, j) if scored[k][1] == 1)
        i = j
    u = rank_sum_pos - n_pos * (n_pos + 1) / 2.0
    return u / (n_pos * n_neg)


def rmse(pairs: Sequence[tuple[float, int]]) -> float:
    """Root mean squared error of probabilistic scores against 0/1 labels.

    Summed with math.fsum so the result is invariant under permutation of
    the prediction list.
    """
    if not pairs:
        raise ValueError("rmse of an empty prediction set")
    total = math.fsum((score - label) ** 2 for score, label in pairs)
    return (total / len(pairs)) ** 0.5


def acc(pairs: Sequence[tuple[float, int]], threshold: float = 0.5) -> float:
    """Fraction of correct thresholded predictions.

    A score exactly at the threshold predicts 1 (the >= tie rule), keeping
    results bit-reproducible.
    """
    if not pairs:
        raise ValueError("accuracy of an empty prediction set")
    hits = sum(1 for score, label in pairs if (1 if score >= threshold else 0) == label)
    return hits / len(pairs)

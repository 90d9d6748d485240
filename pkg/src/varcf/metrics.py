"""Prediction-error and top-N ranking metrics.

Prediction quality: MAE, MSE, and the R^2 score (1 - SSE/SST with SST
taken around the mean of the true test ratings).

Ranking quality follows a rank-the-test-set protocol: for each user, the
candidate set is that user's test items, ordered by predicted score
(descending, ties broken by ascending item index) and truncated at N.

    precision@N  fraction of the top-N slots filled with relevant items
                 (true rating >= theta), denominator N, averaged over all
                 users with test ratings
    recall@N     fraction of the user's relevant test items that made the
                 top-N, averaged over users with at least one relevant
                 test item (others are skipped)
    nDCG@N       DCG over the predicted order with gain (2^r - 1) and
                 discount log2(position + 1), normalized per user by the
                 ideal-order DCG of the same item set truncated at N;
                 users with IDCG = 0 are skipped

Skipped-user averages that end up empty are returned as NaN rather than
a number that pretends to mean something.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import MetricError


@dataclass
class PredictionPairs:
    """Aligned arrays of true ratings and predictions, tagged by user/item."""

    user_ids: np.ndarray
    item_ids: np.ndarray
    ratings: np.ndarray  # true r_ui
    predictions: np.ndarray  # predicted r_ui

    def __post_init__(self):
        n = self.user_ids.shape[0]
        if not (self.item_ids.shape[0] == self.ratings.shape[0] == self.predictions.shape[0] == n):
            raise MetricError("prediction pair arrays must have equal lengths")

    def __len__(self) -> int:
        return int(self.user_ids.shape[0])

    def _require_nonempty(self, metric: str) -> None:
        if len(self) == 0:
            raise MetricError(f"{metric} is undefined on an empty pair set")
        if not (np.all(np.isfinite(self.ratings)) and np.all(np.isfinite(self.predictions))):
            raise MetricError(f"{metric} input contains non-finite values")


def mae(pairs: PredictionPairs) -> float:
    """Mean absolute prediction error."""
    pairs._require_nonempty("MAE")
    return float(np.mean(np.abs(pairs.ratings - pairs.predictions)))


def mse(pairs: PredictionPairs) -> float:
    """Mean squared prediction error."""
    pairs._require_nonempty("MSE")
    return float(np.mean(np.square(pairs.ratings - pairs.predictions)))


def r2(pairs: PredictionPairs) -> float:
    """Proportion of explained variance; negative when predictions are
    worse than always answering the test mean."""
    pairs._require_nonempty("R2")
    sse = float(np.sum(np.square(pairs.ratings - pairs.predictions)))
    sst = float(np.sum(np.square(pairs.ratings - np.mean(pairs.ratings))))
    if sst == 0.0:
        raise MetricError("R2 is undefined: test ratings have zero variance")
    return 1.0 - sse / sst


def _per_user_order(pairs: PredictionPairs) -> dict[int, np.ndarray]:
    """User -> pair indices sorted by (-prediction, item id)."""
    if len(pairs) == 0:
        raise MetricError("ranking metrics are undefined on an empty pair set")
    order: dict[int, list[int]] = {}
    for idx, user in enumerate(pairs.user_ids.tolist()):
        order.setdefault(user, []).append(idx)
    ranked = {}
    for user, indices in order.items():
        idx = np.asarray(indices, dtype=np.int64)
        keys = np.lexsort((pairs.item_ids[idx], -pairs.predictions[idx]))
        ranked[user] = idx[keys]
    return ranked


def precision_recall_at_n(
    pairs: PredictionPairs, n: int, threshold: float
) -> tuple[float, float]:
    """(precision@N, recall@N) averaged over users.

    Every user with test ratings contributes to precision; recall skips
    users with no relevant test item and is NaN if all users are skipped.
    """
    if n < 1:
        raise MetricError(f"N must be >= 1, got {n}")
    ranked = _per_user_order(pairs)
    precisions = []
    recalls = []
    for user, idx in ranked.items():
        top = idx[: min(n, idx.shape[0])]
        hits = int(np.sum(pairs.ratings[top] >= threshold))
        precisions.append(hits / n)
        relevant = int(np.sum(pairs.ratings[idx] >= threshold))
        if relevant > 0:
            recalls.append(hits / relevant)
    precision = float(np.mean(precisions))
    recall = float(np.mean(recalls)) if recalls else float("nan")
    return precision, recall


def _dcg(ratings_in_order: np.ndarray) -> float:
    positions = np.arange(1, ratings_in_order.shape[0] + 1)
    return float(np.sum((np.power(2.0, ratings_in_order) - 1.0) / np.log2(positions + 1.0)))


def ndcg_at_n(pairs: PredictionPairs, n: int) -> float:
    """Mean over users of DCG(predicted order) / DCG(ideal order), both
    truncated at N; NaN if every user has IDCG = 0."""
    if n < 1:
        raise MetricError(f"N must be >= 1, got {n}")
    ranked = _per_user_order(pairs)
    ratios = []
    for user, idx in ranked.items():
        k = min(n, idx.shape[0])
        predicted = pairs.ratings[idx[:k]]
        ideal_keys = np.lexsort((pairs.item_ids[idx], -pairs.ratings[idx]))
        ideal = pairs.ratings[idx[ideal_keys][:k]]
        idcg = _dcg(ideal)
        if idcg == 0.0:
            continue
        ratios.append(_dcg(predicted) / idcg)
    return float(np.mean(ratios)) if ratios else float("nan")


def ranking_sweep(
    pairs: PredictionPairs, n_values, threshold: float
) -> dict[int, dict[str, float]]:
    """precision/recall/nDCG for each N in the sweep."""
    out = {}
    for n in n_values:
        precision, recall = precision_recall_at_n(pairs, n, threshold)
        out[int(n)] = {
            "precision": precision,
            "recall": recall,
            "ndcg": ndcg_at_n(pairs, n),
        }
    return out

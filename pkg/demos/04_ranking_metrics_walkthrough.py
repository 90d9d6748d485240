"""Worked examples of the top-N ranking metrics.

For each user, that user's test items are ranked by predicted score
(ties broken by ascending item index) and the list truncated at N.
Precision counts relevant items in the top-N slots against N; recall
counts them against the user's relevant test items; nDCG compares the
discounted gain of the predicted order against the ideal order.
"""

import numpy as np

from varcf.metrics import PredictionPairs, ndcg_at_n, precision_recall_at_n


def pairs(users, items, ratings, predictions):
    return PredictionPairs(
        user_ids=np.array(users), item_ids=np.array(items),
        ratings=np.array(ratings, dtype=float),
        predictions=np.array(predictions, dtype=float),
    )


# %% One user, three test items rated 5, 1, 4 with relevance threshold 4.
# The model ranks the two relevant ones on top, so at N=2 both precision
# and recall are perfect.
example = pairs([0, 0, 0], [1, 2, 3], [5, 1, 4], [0.9, 0.1, 0.8])
precision, recall = precision_recall_at_n(example, 2, threshold=4)
print(f"top-2 over items rated (5, 1, 4): precision={precision}, recall={recall}")

# %% A reversed ranking with a single relevant item misses it at N=1.
reversed_case = pairs([0, 0], [1, 2], [5, 1], [0.1, 0.9])
precision, recall = precision_recall_at_n(reversed_case, 1, threshold=4)
print(f"reversed ranking at N=1:          precision={precision}, recall={recall}")

# %% The nDCG gain for an item rated r at position p is (2^r - 1)/log2(p+1).
# Two items rated (3, 1) predicted in the wrong order:
#   DCG  = (2^1-1)/log2(2) + (2^3-1)/log2(3) = 1 + 4.4165 = 5.4165
#   IDCG = (2^3-1)/log2(2) + (2^1-1)/log2(3) = 7 + 0.6309 = 7.6309
wrong_order = pairs([0, 0], [1, 2], [3, 1], [0.2, 0.9])
print(f"\nnDCG for ratings (3,1) ranked backwards: {ndcg_at_n(wrong_order, 2):.4f}"
      "  (hand value 0.7098)")

# %% Perfect ordering always gives 1.0, whatever the rating values.
perfect = pairs([0, 0, 0], [1, 2, 3], [4, 3, 1], [0.9, 0.5, 0.1])
print(f"nDCG for a perfectly ordered list:       {ndcg_at_n(perfect, 3):.4f}")

# %% Metrics average across users; users without relevant test items are
# excluded from recall (there is nothing to recall) but count for
# precision with zero hits.
two_users = pairs(
    [0, 0, 1, 1], [1, 2, 1, 2],
    [5, 1, 2, 1],      # user 1 has no relevant items at threshold 4
    [0.9, 0.1, 0.9, 0.1],
)
precision, recall = precision_recall_at_n(two_users, 1, threshold=4)
print(f"\nmixed users at N=1: precision={precision} (averaged over both), "
      f"recall={recall} (user 1 skipped)")

"""Classification metrics: softmax over similarities and rank-based ROC-AUC."""
from __future__ import annotations

import numpy as np


def softmax(values: np.ndarray) -> np.ndarray:
    """Numerically stable softmax over a 1-D array."""
    values = np.asarray(values, dtype=np.float64)
    shifted = values - values.max()
    exps = np.exp(shifted)
    return exps / exps.sum()


def accuracy_score(y_true: np.ndarray, y_pred: np.ndarray) -> float:
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    if y_true.shape[0] == 0:
        raise ValueError("cannot compute accuracy on an empty set")
    if y_true.shape != y_pred.shape:
        raise ValueError("y_true and y_pred must have the same length")
    return float(np.mean(y_true == y_pred))


def _midranks(values: np.ndarray) -> np.ndarray:
    """Ranks 1..n with ties sharing their average rank."""
    order = np.argsort(values, kind="stable")
    sorted_vals = values[order]
    ranks = np.empty(values.shape[0], dtype=np.float64)
    i = 0
    while i < sorted_vals.shape[0]:
        j = i
        while j + 1 < sorted_vals.shape[0] and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2 + 1  # average of ranks i+1..j+1
        i = j + 1
    return ranks


def roc_auc_score(y_true: np.ndarray, scores: np.ndarray, positive_label: int = 1) -> float:
    """ROC-AUC via the rank statistic; each tied positive-negative pair counts 1/2.

    Equals U / (n_pos * n_neg) with U the Mann-Whitney statistic of the
    positive scores.
    """
    y_true = np.asarray(y_true)
    scores = np.asarray(scores, dtype=np.float64)
    if y_true.shape != scores.shape:
        raise ValueError("y_true and scores must have the same length")
    pos = y_true == positive_label
    n_pos = int(pos.sum())
    n_neg = int(y_true.shape[0] - n_pos)
    if n_pos == 0 or n_neg == 0:
        raise ValueError("ROC-AUC needs both a positive and a negative example")
    ranks = _midranks(scores)
    rank_sum = float(ranks[pos].sum())
    u_stat = rank_sum - n_pos * (n_pos + 1) / 2
    return u_stat / (n_pos * n_neg)

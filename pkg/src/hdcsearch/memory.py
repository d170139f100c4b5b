"""Associative-memory classifier core.

Each class owns a wide integer accumulator; the quantized view (the
resultant hypervector) is recomputed from the accumulator whenever it
changes, so perceptron-style retraining stays exact even for narrow
resultant datatypes. Prediction compares a query against all class views
by similarity and softmaxes the similarities into probabilities.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hv import ElementType, cast_sums, cosine_similarity
from .metrics import accuracy_score, roc_auc_score, softmax
from .rng import rng_for

REFRESH_MODES = ("example", "epoch")


@dataclass
class Prediction:
    """Outcome of one query: argmax class, raw similarities, softmax probabilities."""

    class_id: int
    similarities: np.ndarray
    probabilities: np.ndarray


class AssociativeMemory:
    """Per-class accumulators plus their datatype-cast resultant views."""

    def __init__(
        self,
        n_classes: int,
        dim: int,
        resultant_dtype: ElementType = ElementType.INT64,
        summand_kind: ElementType = ElementType.BINARY,
    ):
        if n_classes < 2:
            raise ValueError("associative memory needs at least 2 classes")
        if summand_kind not in (ElementType.BINARY, ElementType.BIPOLAR):
            raise ValueError("summand_kind must be binary or bipolar")
        self.n_classes = n_classes
        self.dim = dim
        self.resultant_dtype = ElementType.parse(resultant_dtype)
        self.summand_kind = summand_kind
        self.sums = np.zeros((n_classes, dim), dtype=np.int64)
        self.counts = np.zeros(n_classes, dtype=np.int64)
        self.views = np.zeros((n_classes, dim), dtype=self.resultant_dtype.np_dtype)

    def refresh_view(self, class_id: int) -> None:
        self.views[class_id] = cast_sums(
            self.sums[class_id], int(self.counts[class_id]), self.resultant_dtype, self.summand_kind
        )

    def refresh_all_views(self) -> None:
        for class_id in range(self.n_classes):
            self.refresh_view(class_id)

    def add(self, class_id: int, encoded: np.ndarray, refresh: bool = True) -> None:
        self.sums[class_id] += encoded
        self.counts[class_id] += 1
        if refresh:
            self.refresh_view(class_id)

    def subtract(self, class_id: int, encoded: np.ndarray, refresh: bool = True) -> None:
        self.sums[class_id] -= encoded
        self.counts[class_id] = max(int(self.counts[class_id]) - 1, 0)
        if refresh:
            self.refresh_view(class_id)

    def copy(self) -> "AssociativeMemory":
        dup = AssociativeMemory(self.n_classes, self.dim, self.resultant_dtype, self.summand_kind)
        dup.sums = self.sums.copy()
        dup.counts = self.counts.copy()
        dup.views = self.views.copy()
        return dup

    def similarities(self, query: np.ndarray, metric: str = "cosine") -> np.ndarray:
        return self.similarities_batch(query[None, :], metric=metric)[0]

    def similarities_batch(self, queries: np.ndarray, metric: str = "cosine") -> np.ndarray:
        """Similarity of each query row against each class view, shape (n, c)."""
        if queries.shape[1] != self.dim:
            raise ValueError(f"dimension mismatch: queries {queries.shape[1]}, memory {self.dim}")
        if metric == "cosine":
            qf = queries.astype(np.float64)
            vf = self.views.astype(np.float64)
            qn = np.linalg.norm(qf, axis=1)
            vn = np.linalg.norm(vf, axis=1)
            denom = np.outer(qn, vn)
            dots = qf @ vf.T
            with np.errstate(invalid="ignore", divide="ignore"):
                sims = np.where(denom > 0, dots / np.where(denom > 0, denom, 1.0), 0.0)
            return sims
        if metric == "hamming":
            if self.resultant_dtype.is_integer:
                raise ValueError("hamming similarity requires binary/bipolar resultant views")
            sims = np.empty((queries.shape[0], self.n_classes), dtype=np.float64)
            for class_id in range(self.n_classes):
                sims[:, class_id] = np.mean(queries == self.views[class_id], axis=1)
            return sims
        raise ValueError(f"unknown similarity metric {metric!r}; expected 'cosine' or 'hamming'")


def train(
    encoded: np.ndarray,
    labels: np.ndarray,
    n_classes: int,
    resultant_dtype: ElementType = ElementType.INT64,
    summand_kind: ElementType = ElementType.BINARY,
) -> AssociativeMemory:
    """Sum every encoded hypervector into its class accumulator."""
    labels = np.asarray(labels)
    if encoded.shape[0] != labels.shape[0]:
        raise ValueError("encoded matrix and labels must have the same length")
    if labels.size and (labels.min() < 0 or labels.max() >= n_classes):
        raise ValueError("label out of range")
    am = AssociativeMemory(n_classes, encoded.shape[1], resultant_dtype, summand_kind)
    for class_id in range(n_classes):
        members = encoded[labels == class_id]
        if members.shape[0] == 0:
            raise ValueError(f"class {class_id} has no training examples")
        am.sums[class_id] = members.sum(axis=0, dtype=np.int64)
        am.counts[class_id] = members.shape[0]
    am.refresh_all_views()
    return am


def predict(am: AssociativeMemory, query: np.ndarray, metric: str = "cosine") -> Prediction:
    """Argmax-similarity prediction; ties break toward the lowest class id."""
    sims = am.similarities(query, metric=metric)
    return Prediction(class_id=int(np.argmax(sims)), similarities=sims, probabilities=softmax(sims))


def predict_batch(am: AssociativeMemory, queries: np.ndarray, metric: str = "cosine") -> np.ndarray:
    return np.argmax(am.similarities_batch(queries, metric=metric), axis=1)


def retrain_epoch(
    am: AssociativeMemory,
    encoded: np.ndarray,
    labels: np.ndarray,
    order_seed: int | None = None,
    metric: str = "cosine",
    refresh: str = "example",
) -> int:
    """One perceptron-style pass: every misprediction subtracts the encoded
    vector from the predicted class and adds it to the true class.

    Returns the number of mispredictions at decision time. ``refresh``
    controls when views see the updates: after every example (default) or
    only at the end of the epoch.
    """
    if refresh not in REFRESH_MODES:
        raise ValueError(f"unknown refresh mode {refresh!r}; expected one of {REFRESH_MODES}")
    labels = np.asarray(labels)
    order = np.arange(labels.shape[0])
    if order_seed is not None:
        rng_for(order_seed, "retrain-order").shuffle(order)

    eager = refresh == "example"
    errors = 0
    for idx in order:
        enc = encoded[idx]
        true_label = int(labels[idx])
        predicted = int(np.argmax(am.similarities(enc, metric=metric)))
        if predicted != true_label:
            errors += 1
            am.subtract(predicted, enc, refresh=eager)
            am.add(true_label, enc, refresh=eager)
    if not eager:
        am.refresh_all_views()
    return errors


def accuracy(am: AssociativeMemory, queries: np.ndarray, labels: np.ndarray, metric: str = "cosine") -> float:
    """Fraction of queries whose argmax class matches the label."""
    labels = np.asarray(labels)
    if labels.shape[0] == 0:
        raise ValueError("cannot compute accuracy on an empty query set")
    return accuracy_score(labels, predict_batch(am, queries, metric=metric))


def roc_auc(
    am: AssociativeMemory,
    queries: np.ndarray,
    labels: np.ndarray,
    positive_class: int = 1,
    metric: str = "cosine",
) -> float:
    """Rank-statistic ROC-AUC of the softmaxed positive-class similarity."""
    if am.n_classes != 2:
        raise ValueError("ROC-AUC is defined for binary tasks only")
    labels = np.asarray(labels)
    sims = am.similarities_batch(queries, metric=metric)
    scores = np.apply_along_axis(softmax, 1, sims)[:, positive_class]
    return roc_auc_score(labels, scores, positive_label=positive_class)

"""End-to-end trained models and the scikit-learn classifier facade.

``TrainedModel`` bundles everything needed for inference (architecture,
master seed, vocabulary, class accumulators); ``HDCClassifier`` exposes the
same pipeline through the standard fit/predict estimator API. Models
serialize to a small versioned binary container with the accumulators
stored as little-endian 64-bit integers and the vocabulary in a plain-text
sidecar file.
"""
from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from .config import ArchConfig
from .encoder import ItemMemory, _check_texts, encode_corpus, encoded_summand_kind
from .hv import ElementType, EwiseOp
from .memory import AssociativeMemory, predict_batch, retrain_epoch, train
from .memory import accuracy as memory_accuracy
from .memory import roc_auc as memory_roc_auc
from .metrics import softmax
from .tokenizer import Vocabulary, build_vocab, load_vocab, save_vocab, tokenize

MODEL_MAGIC = b"HDCM"
MODEL_FORMAT_VERSION = 1


@dataclass
class TrainedModel:
    """A fitted pipeline: tokenize, encode, and query the associative memory."""

    config: ArchConfig
    master_seed: int
    vocab: Vocabulary
    item_memory: ItemMemory
    memory: AssociativeMemory
    class_names: list[str]
    similarity: str = "cosine"

    def encode_texts(self, texts: list[str]) -> np.ndarray:
        sequences = [tokenize(self.vocab, text) for text in _check_texts(texts)]
        return encode_corpus(self.config, self.item_memory, sequences)

    def predict_ids(self, texts: list[str]) -> np.ndarray:
        return predict_batch(self.memory, self.encode_texts(texts), metric=self.similarity)

    def predict_proba(self, texts: list[str]) -> np.ndarray:
        sims = self.memory.similarities_batch(self.encode_texts(texts), metric=self.similarity)
        return np.apply_along_axis(softmax, 1, sims)

    def evaluate(
        self,
        texts: list[str],
        labels: np.ndarray,
        metric: str = "accuracy",
        positive_class: int = 1,
    ) -> float:
        encoded = self.encode_texts(texts)
        if metric == "accuracy":
            return memory_accuracy(self.memory, encoded, labels, metric=self.similarity)
        if metric == "roc_auc":
            return memory_roc_auc(self.memory, encoded, labels, positive_class=positive_class, metric=self.similarity)
        raise ValueError(f"unknown metric {metric!r}; expected 'accuracy' or 'roc_auc'")


def fit_model(
    config: ArchConfig,
    texts: list[str],
    labels: np.ndarray,
    class_names: list[str],
    master_seed: int = 0,
    retrain_epochs: int = 10,
    similarity: str = "cosine",
    vocab_order: str = "first-appearance",
    refresh: str = "example",
    order_seed: int | None = None,
) -> TrainedModel:
    """Train one architecture end to end on raw texts."""
    config.validate()
    texts = _check_texts(texts)
    labels = np.asarray(labels, dtype=np.int64)
    vocab = build_vocab(texts, order=vocab_order)
    item_memory = ItemMemory.for_config(master_seed, vocab.n_ids, config)
    encoded = encode_corpus(config, item_memory, [tokenize(vocab, t) for t in texts])
    am = train(
        encoded,
        labels,
        n_classes=len(class_names),
        resultant_dtype=config.resultant_dtype,
        summand_kind=encoded_summand_kind(config.encoded_dtype, config.base_dtype),
    )
    for _ in range(retrain_epochs):
        errors = retrain_epoch(am, encoded, labels, order_seed=order_seed, metric=similarity, refresh=refresh)
        if errors == 0:
            break
    return TrainedModel(config, master_seed, vocab, item_memory, am, list(class_names), similarity)


def save_model(model: TrainedModel, path: str | Path) -> None:
    """Write the model container plus the vocabulary sidecar next to it."""
    path = Path(path)
    vocab_ref = path.name + ".vocab"
    save_vocab(model.vocab, path.with_name(vocab_ref))
    header = {
        "format_version": MODEL_FORMAT_VERSION,
        "config": model.config.to_dict(),
        "master_seed": model.master_seed,
        "vocab_ref": vocab_ref,
        "class_names": model.class_names,
        "counts": [int(c) for c in model.memory.counts],
        "summand_kind": model.memory.summand_kind.value,
        "similarity": model.similarity,
    }
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
    with path.open("wb") as handle:
        handle.write(MODEL_MAGIC)
        handle.write(struct.pack("<I", MODEL_FORMAT_VERSION))
        handle.write(struct.pack("<Q", len(header_bytes)))
        handle.write(header_bytes)
        handle.write(np.ascontiguousarray(model.memory.sums, dtype="<i8").tobytes())


def load_model(path: str | Path) -> TrainedModel:
    path = Path(path)
    with path.open("rb") as handle:
        magic = handle.read(4)
        if magic != MODEL_MAGIC:
            raise ValueError(f"{path}: not a model container (bad magic {magic!r})")
        (version,) = struct.unpack("<I", handle.read(4))
        if version != MODEL_FORMAT_VERSION:
            raise ValueError(f"{path}: unsupported model format version {version}")
        (header_len,) = struct.unpack("<Q", handle.read(8))
        header = json.loads(handle.read(header_len).decode("utf-8"))
        payload = handle.read()

    config = ArchConfig.from_dict(header["config"])
    class_names = list(header["class_names"])
    counts = header["counts"]
    sums = np.frombuffer(payload, dtype="<i8").astype(np.int64).reshape(len(class_names), config.dim)
    vocab = load_vocab(path.with_name(header["vocab_ref"]))
    item_memory = ItemMemory.for_config(header["master_seed"], vocab.n_ids, config)
    am = AssociativeMemory(
        n_classes=len(class_names),
        dim=config.dim,
        resultant_dtype=config.resultant_dtype,
        summand_kind=ElementType.parse(header["summand_kind"]),
    )
    am.sums = sums.copy()
    am.counts = np.array(counts, dtype=np.int64)
    am.refresh_all_views()
    return TrainedModel(
        config=config,
        master_seed=header["master_seed"],
        vocab=vocab,
        item_memory=item_memory,
        memory=am,
        class_names=class_names,
        similarity=header["similarity"],
    )


class HDCClassifier(ClassifierMixin, BaseEstimator):
    """Sequence classifier over raw strings with every architectural property a parameter.

    Parameters mirror the searchable architecture decisions (dimension,
    sparsity, gram size, datatypes, permutation shift, element-wise
    operator) plus the training knobs. Accepts any hashable labels.
    """

    def __init__(
        self,
        dim: int = 10000,
        sparsity: float = 0.5,
        gram_size: int = 3,
        base_dtype: str = "bipolar",
        encoded_dtype: str = "int64",
        resultant_dtype: str = "int64",
        shift: int = 1,
        ewise_op: str = "mult",
        retrain_epochs: int = 10,
        similarity: str = "cosine",
        vocab_order: str = "first-appearance",
        refresh: str = "example",
        master_seed: int = 0,
    ):
        self.dim = dim
        self.sparsity = sparsity
        self.gram_size = gram_size
        self.base_dtype = base_dtype
        self.encoded_dtype = encoded_dtype
        self.resultant_dtype = resultant_dtype
        self.shift = shift
        self.ewise_op = ewise_op
        self.retrain_epochs = retrain_epochs
        self.similarity = similarity
        self.vocab_order = vocab_order
        self.refresh = refresh
        self.master_seed = master_seed

    def _config(self) -> ArchConfig:
        return ArchConfig(
            dim=self.dim,
            sparsity=self.sparsity,
            gram_size=self.gram_size,
            base_dtype=ElementType.parse(self.base_dtype),
            encoded_dtype=ElementType.parse(self.encoded_dtype),
            resultant_dtype=ElementType.parse(self.resultant_dtype),
            shift=self.shift,
            ewise_op=EwiseOp.parse(self.ewise_op),
        ).validate()

    def fit(self, X, y):
        y = np.asarray(y)
        texts = _check_texts(X)
        if y.shape[0] != len(texts):
            raise ValueError("X and y must have the same length")
        self.classes_, y_idx = np.unique(y, return_inverse=True)
        if self.classes_.shape[0] < 2:
            raise ValueError("need at least 2 classes")
        self.model_ = fit_model(
            self._config(),
            texts,
            y_idx,
            class_names=[str(c) for c in self.classes_],
            master_seed=self.master_seed,
            retrain_epochs=self.retrain_epochs,
            similarity=self.similarity,
            vocab_order=self.vocab_order,
            refresh=self.refresh,
        )
        return self

    def predict(self, X):
        check_is_fitted(self, "model_")
        return self.classes_[self.model_.predict_ids(X)]

    def predict_proba(self, X):
        check_is_fitted(self, "model_")
        return self.model_.predict_proba(X)

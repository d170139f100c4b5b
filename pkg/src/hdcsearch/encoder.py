"""Token-sequence encoding.

Slides an n-gram window over the token sequence, rotates each base
hypervector by (N' - i) * shift for its 1-based position i in the window,
folds the window left-to-right with the element-wise operator, accumulates
all windows, and casts the sums to the encoded datatype. The fold is
vectorized across all windows at once.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .config import ArchConfig
from .hv import Accumulator, ElementType, EwiseOp, Hypervector, cast, cast_sums, ewise_arrays, generate_base_hv, rotate_rows
from .tokenizer import Vocabulary, build_vocab, tokenize


def effective_gram(gram_size: int, length: int) -> int:
    """Gram size actually used for a sequence: falls back to the sequence length when shorter."""
    if length < 1:
        raise ValueError("sequence length must be >= 1")
    if gram_size < 1:
        raise ValueError("gram_size must be >= 1")
    return min(gram_size, length)


def encoded_summand_kind(encoded_dtype: ElementType, base_dtype: ElementType) -> ElementType:
    """Value regime of encoded hypervectors, for thresholding their sums.

    Binary/bipolar encoded values fix the regime directly; integer encoded
    values inherit the base datatype's regime (nonnegative sums for a binary
    base, signed for bipolar).
    """
    if encoded_dtype in (ElementType.BINARY, ElementType.BIPOLAR):
        return encoded_dtype
    return base_dtype


@dataclass(frozen=True)
class ItemMemory:
    """Seeded base hypervectors, one row per token id (the last row is the unknown token)."""

    master_seed: int
    dim: int
    sparsity: float
    base_dtype: ElementType
    vectors: np.ndarray  # (n_tokens, dim) int8

    @classmethod
    def build(
        cls,
        master_seed: int,
        n_tokens: int,
        dim: int,
        sparsity: float,
        base_dtype: ElementType = ElementType.BINARY,
    ) -> "ItemMemory":
        if n_tokens < 1:
            raise ValueError("item memory needs at least one token")
        base_dtype = ElementType.parse(base_dtype)
        vectors = np.empty((n_tokens, dim), dtype=np.int8)
        for token_id in range(n_tokens):
            vectors[token_id] = generate_base_hv(master_seed, token_id, dim, sparsity, base_dtype).elements
        vectors.setflags(write=False)
        return cls(master_seed, dim, sparsity, base_dtype, vectors)

    @classmethod
    def for_config(cls, master_seed: int, n_tokens: int, config: ArchConfig) -> "ItemMemory":
        return cls.build(master_seed, n_tokens, config.dim, config.sparsity, config.base_dtype)

    @property
    def n_tokens(self) -> int:
        return self.vectors.shape[0]

    def hv(self, token_id: int) -> Hypervector:
        if not 0 <= token_id < self.n_tokens:
            raise ValueError(f"token id {token_id} out of range 0..{self.n_tokens - 1}")
        return Hypervector(self.base_dtype, self.vectors[token_id].copy())


def _check_compatible(config: ArchConfig, im: ItemMemory) -> None:
    if im.dim != config.dim or im.base_dtype is not config.base_dtype or im.sparsity != config.sparsity:
        raise ValueError(
            "item memory is inconsistent with the architecture: "
            f"memory (dim={im.dim}, sparsity={im.sparsity}, base={im.base_dtype.value}) vs "
            f"config (dim={config.dim}, sparsity={config.sparsity}, base={config.base_dtype.value})"
        )


def encode_sums(config: ArchConfig, im: ItemMemory, ids: np.ndarray) -> tuple[np.ndarray, int]:
    """Accumulate all n-gram windows of a token sequence; returns (sums, window count)."""
    length = int(ids.shape[0])
    n_eff = effective_gram(config.gram_size, length)
    n_windows = length - n_eff + 1
    if np.any(ids < 0) or np.any(ids >= im.n_tokens):
        raise ValueError("token id out of item-memory range")

    rows = im.vectors[ids]  # (length, dim) gather
    folded: np.ndarray | None = None
    for pos in range(n_eff):  # 0-based; spec position i = pos + 1
        block = rows[pos : pos + n_windows]
        amount = (n_eff - 1 - pos) * config.shift
        if amount % config.dim:
            block = rotate_rows(block, amount)
        folded = block if folded is None else ewise_arrays(config.ewise_op, config.base_dtype, folded, block)
    return folded.sum(axis=0, dtype=np.int64), n_windows


def encode(config: ArchConfig, im: ItemMemory, ids: np.ndarray) -> Hypervector:
    """Encode one token sequence into a hypervector of the encoded datatype."""
    ids = np.asarray(ids)
    if ids.size == 0:
        raise ValueError("cannot encode an empty token sequence")
    _check_compatible(config, im)
    sums, n_windows = encode_sums(config, im, ids)
    acc = Accumulator(sums=sums, count=n_windows)
    return cast(acc, config.encoded_dtype, summand_kind=config.base_dtype)


def encode_corpus(config: ArchConfig, im: ItemMemory, sequences: list[np.ndarray]) -> np.ndarray:
    """Encode many token sequences into a (n, dim) matrix."""
    _check_compatible(config, im)
    out = np.empty((len(sequences), config.dim), dtype=config.encoded_dtype.np_dtype)
    for row, ids in enumerate(sequences):
        ids = np.asarray(ids)
        if ids.size == 0:
            raise ValueError(f"sequence {row} is empty")
        sums, n_windows = encode_sums(config, im, ids)
        out[row] = cast_sums(sums, n_windows, config.encoded_dtype, config.base_dtype)
    return out


class HypervectorEncoder(TransformerMixin, BaseEstimator):
    """Transformer from raw strings to encoded hypervectors.

    ``fit`` builds the character vocabulary and the seeded item memory;
    ``transform`` returns a (n_samples, dim) integer array. Composes with
    any downstream estimator that accepts dense features.
    """

    def __init__(
        self,
        dim: int = 10000,
        sparsity: float = 0.5,
        gram_size: int = 3,
        base_dtype: str = "bipolar",
        encoded_dtype: str = "int64",
        shift: int = 1,
        ewise_op: str = "mult",
        vocab_order: str = "first-appearance",
        master_seed: int = 0,
    ):
        self.dim = dim
        self.sparsity = sparsity
        self.gram_size = gram_size
        self.base_dtype = base_dtype
        self.encoded_dtype = encoded_dtype
        self.shift = shift
        self.ewise_op = ewise_op
        self.vocab_order = vocab_order
        self.master_seed = master_seed

    def _config(self) -> ArchConfig:
        return ArchConfig(
            dim=self.dim,
            sparsity=self.sparsity,
            gram_size=self.gram_size,
            base_dtype=ElementType.parse(self.base_dtype),
            encoded_dtype=ElementType.parse(self.encoded_dtype),
            resultant_dtype=ElementType.INT64,
            shift=self.shift,
            ewise_op=EwiseOp.parse(self.ewise_op),
        ).validate()

    def fit(self, X, y=None):
        texts = _check_texts(X)
        config = self._config()
        self.vocab_ = build_vocab(texts, order=self.vocab_order)
        self.item_memory_ = ItemMemory.for_config(self.master_seed, self.vocab_.n_ids, config)
        self.config_ = config
        return self

    def transform(self, X) -> np.ndarray:
        check_is_fitted(self, "vocab_")
        texts = _check_texts(X)
        sequences = [tokenize(self.vocab_, text) for text in texts]
        return encode_corpus(self.config_, self.item_memory_, sequences)


def _check_texts(X) -> list[str]:
    if isinstance(X, str):
        raise ValueError("expected a sequence of strings, got a single string")
    texts = list(X)
    if not texts:
        raise ValueError("expected at least one text")
    for i, text in enumerate(texts):
        if not isinstance(text, str):
            raise ValueError(f"sample {i} is not a string ({type(text).__name__})")
        if not text:
            raise ValueError(f"sample {i} is an empty string")
    return texts

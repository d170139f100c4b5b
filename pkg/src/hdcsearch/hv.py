"""Hypervector primitives.

Seeded sparse generation, circular rotation, element-wise binding per the
binary/bipolar truth tables, exact wide-integer accumulation, datatype
casting (the datatype acts as the threshold), and similarity metrics.
All kernels are vectorized numpy; single vectors are wrapped in a small
``Hypervector`` value type.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .rng import rng_for


class ElementType(str, Enum):
    """Element datatype of a hypervector."""

    BINARY = "binary"      # {0, 1}
    BIPOLAR = "bipolar"    # {-1, +1}
    INT8 = "int8"
    INT16 = "int16"
    INT32 = "int32"
    INT64 = "int64"

    @property
    def np_dtype(self) -> np.dtype:
        if self in (ElementType.BINARY, ElementType.BIPOLAR):
            return np.dtype(np.int8)
        return np.dtype(self.value)

    @property
    def is_integer(self) -> bool:
        return self not in (ElementType.BINARY, ElementType.BIPOLAR)

    @property
    def bounds(self) -> tuple[int, int]:
        """Inclusive value range for this datatype."""
        if self is ElementType.BINARY:
            return 0, 1
        if self is ElementType.BIPOLAR:
            return -1, 1
        info = np.iinfo(self.np_dtype)
        return int(info.min), int(info.max)

    @classmethod
    def parse(cls, name: str | "ElementType") -> "ElementType":
        if isinstance(name, ElementType):
            return name
        try:
            return cls(str(name).strip().lower())
        except ValueError:
            allowed = ", ".join(m.value for m in cls)
            raise ValueError(f"unknown element type {name!r}; expected one of: {allowed}") from None


class EwiseOp(str, Enum):
    """Element-wise binding operator."""

    MULT = "mult"
    XOR = "xor"
    AND = "and"
    OR = "or"

    @classmethod
    def parse(cls, name: str | "EwiseOp") -> "EwiseOp":
        if isinstance(name, EwiseOp):
            return name
        key = str(name).strip().lower()
        if key == "*":
            key = "mult"
        try:
            return cls(key)
        except ValueError:
            allowed = ", ".join(m.value for m in cls)
            raise ValueError(f"unknown element-wise op {name!r}; expected one of: {allowed}") from None


@dataclass(frozen=True)
class Hypervector:
    """A fixed-length element sequence tagged with its element datatype."""

    dtype: ElementType
    elements: np.ndarray

    def __post_init__(self):
        if self.elements.ndim != 1:
            raise ValueError("hypervector elements must be one-dimensional")
        if self.elements.shape[0] < 1:
            raise ValueError("hypervector dimension must be positive")

    @property
    def dim(self) -> int:
        return self.elements.shape[0]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Hypervector):
            return NotImplemented
        return self.dtype is other.dtype and np.array_equal(self.elements, other.elements)


def generate_base_hv(
    seed: int,
    token_id: int,
    dim: int,
    sparsity: float,
    dtype: ElementType = ElementType.BINARY,
) -> Hypervector:
    """Deterministically generate a sparse base hypervector.

    Exactly ``round(sparsity * dim)`` elements are set to 1 (binary) or +1
    (bipolar); positions are drawn by a PRNG keyed on ``(seed, token_id)``,
    so the result is independent of generation order.
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")
    if not 0.0 < sparsity < 1.0:
        raise ValueError(f"sparsity must lie strictly between 0 and 1, got {sparsity}")
    if token_id < 0:
        raise ValueError("token_id must be non-negative")
    dtype = ElementType.parse(dtype)
    if dtype not in (ElementType.BINARY, ElementType.BIPOLAR):
        raise ValueError(f"base hypervectors must be binary or bipolar, got {dtype.value}")

    n_ones = int(round(sparsity * dim))
    positions = rng_for(seed, token_id).permutation(dim)[:n_ones]
    if dtype is ElementType.BINARY:
        elements = np.zeros(dim, dtype=np.int8)
    else:
        elements = np.full(dim, -1, dtype=np.int8)
    elements[positions] = 1
    return Hypervector(dtype, elements)


def rotate(hv: Hypervector, amount: int) -> Hypervector:
    """Circular left rotation: output element k equals input element (k + amount) mod dim."""
    if amount < 0:
        raise ValueError("rotation amount must be non-negative")
    return Hypervector(hv.dtype, rotate_rows(hv.elements, amount))


def rotate_rows(arr: np.ndarray, amount: int) -> np.ndarray:
    """Rotate the last axis left by ``amount`` positions (amount may exceed the dim)."""
    dim = arr.shape[-1]
    amount %= dim
    if amount == 0:
        return arr.copy()
    return np.roll(arr, -amount, axis=-1)


def rotation_amount(effective_gram: int, position: int, shift: int) -> int:
    """Elements to rotate for the 1-based ``position`` inside a window of size ``effective_gram``."""
    if not 1 <= position <= effective_gram:
        raise ValueError(f"position must be in 1..{effective_gram}, got {position}")
    if shift < 0:
        raise ValueError("shift must be non-negative")
    return (effective_gram - position) * shift


def ewise_arrays(op: EwiseOp, kind: ElementType, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Element-wise binding kernel; ``kind`` selects the binary or bipolar truth table."""
    if kind is ElementType.BINARY:
        if op in (EwiseOp.MULT, EwiseOp.AND):
            return a & b
        if op is EwiseOp.XOR:
            return a ^ b
        return a | b
    if op is EwiseOp.MULT:
        return a * b
    if op is EwiseOp.XOR:
        return -(a * b)
    if op is EwiseOp.AND:
        return np.minimum(a, b)
    return np.maximum(a, b)


def ewise(op: EwiseOp, a: Hypervector, b: Hypervector) -> Hypervector:
    """Apply the truth-table operator to two binary or bipolar hypervectors."""
    op = EwiseOp.parse(op)
    if a.dtype is not b.dtype:
        raise ValueError(f"dtype mismatch: {a.dtype.value} vs {b.dtype.value}")
    if a.dtype not in (ElementType.BINARY, ElementType.BIPOLAR):
        raise ValueError(f"element-wise ops are defined for binary/bipolar only, got {a.dtype.value}")
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    return Hypervector(a.dtype, ewise_arrays(op, a.dtype, a.elements, b.elements))


@dataclass
class Accumulator:
    """Exact element-wise integer sums of added hypervectors.

    Saturation never happens here; it is applied only when casting to a
    resultant datatype. Single writer at a time.
    """

    sums: np.ndarray  # int64
    count: int = 0

    @classmethod
    def zeros(cls, dim: int) -> "Accumulator":
        if dim < 1:
            raise ValueError("dim must be >= 1")
        return cls(sums=np.zeros(dim, dtype=np.int64), count=0)

    @property
    def dim(self) -> int:
        return self.sums.shape[0]

    def add(self, hv: Hypervector | np.ndarray) -> "Accumulator":
        self.sums += self._elements_of(hv)
        self.count += 1
        return self

    def subtract(self, hv: Hypervector | np.ndarray) -> "Accumulator":
        self.sums -= self._elements_of(hv)
        self.count = max(self.count - 1, 0)
        return self

    def _elements_of(self, hv: Hypervector | np.ndarray) -> np.ndarray:
        elements = hv.elements if isinstance(hv, Hypervector) else hv
        if elements.shape[0] != self.dim:
            raise ValueError(f"dimension mismatch: accumulator {self.dim}, hypervector {elements.shape[0]}")
        return elements

    def copy(self) -> "Accumulator":
        return Accumulator(sums=self.sums.copy(), count=self.count)


def cast_sums(
    sums: np.ndarray,
    count: int,
    target: ElementType,
    summand_kind: ElementType,
) -> np.ndarray:
    """Threshold or clamp raw sums into ``target``'s value set.

    ``summand_kind`` says whether the accumulated values were binary-valued
    (threshold at count/2) or bipolar-valued (threshold at 0). Comparisons
    stay in integer arithmetic so ties are exact: sums > w/2 is evaluated
    as sums > w - sums.
    """
    w = max(count, 1)
    if target is ElementType.BINARY:
        if summand_kind is ElementType.BINARY:
            out = sums > (w - sums)
        else:
            out = sums > 0
        return out.astype(np.int8)
    if target is ElementType.BIPOLAR:
        if summand_kind is ElementType.BINARY:
            cond = sums >= (w - sums)
        else:
            cond = sums >= 0
        return np.where(cond, 1, -1).astype(np.int8)
    lo, hi = target.bounds
    return np.clip(sums, lo, hi).astype(target.np_dtype)


def cast(acc: Accumulator, target: ElementType, summand_kind: ElementType = ElementType.BINARY) -> Hypervector:
    """View an accumulator as a hypervector of the target datatype."""
    target = ElementType.parse(target)
    summand_kind = ElementType.parse(summand_kind)
    if summand_kind not in (ElementType.BINARY, ElementType.BIPOLAR):
        raise ValueError("summand_kind must be binary or bipolar")
    return Hypervector(target, cast_sums(acc.sums, acc.count, target, summand_kind))


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine over elements widened to float64; a zero-norm operand gives 0."""
    af = a.astype(np.float64)
    bf = b.astype(np.float64)
    na = np.linalg.norm(af)
    nb = np.linalg.norm(bf)
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(np.dot(af, bf) / (na * nb))


def similarity(q: Hypervector, r: Hypervector, metric: str = "cosine") -> float:
    """Similarity in [-1, 1]; hamming is the fraction of matching positions."""
    if q.dim != r.dim:
        raise ValueError(f"dimension mismatch: {q.dim} vs {r.dim}")
    if metric == "cosine":
        return cosine_similarity(q.elements, r.elements)
    if metric == "hamming":
        if q.dtype is not r.dtype or q.dtype.is_integer:
            raise ValueError("hamming similarity requires binary/bipolar operands of equal dtype")
        return float(np.count_nonzero(q.elements == r.elements) / q.dim)
    raise ValueError(f"unknown similarity metric {metric!r}; expected 'cosine' or 'hamming'")

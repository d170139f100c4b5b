"""Encoder tests, centered on an independent brute-force oracle.

The oracle below recomputes the whole encoding pipeline in plain Python
from the written rules (window slide, per-position rotation, scalar truth
tables, threshold cast) and never touches the vectorized implementation.
"""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hdcsearch.config import ArchConfig
from hdcsearch.encoder import HypervectorEncoder, ItemMemory, effective_gram, encode, encode_corpus
from hdcsearch.hv import ElementType, EwiseOp, ewise_arrays, generate_base_hv
from hdcsearch.rng import rng_for

B = ElementType.BINARY
P = ElementType.BIPOLAR

# Scalar truth tables, written out independently of the production kernels.
_BINARY_OPS = {
    "mult": lambda a, b: 1 if (a, b) == (1, 1) else 0,
    "xor": lambda a, b: 1 if a != b else 0,
    "and": lambda a, b: 1 if (a, b) == (1, 1) else 0,
    "or": lambda a, b: 0 if (a, b) == (0, 0) else 1,
}
_BIPOLAR_OPS = {
    "mult": lambda a, b: a * b,
    "xor": lambda a, b: -(a * b),
    "and": lambda a, b: 1 if (a, b) == (1, 1) else -1,
    "or": lambda a, b: -1 if (a, b) == (-1, -1) else 1,
}
_INT_BOUNDS = {"int8": (-128, 127), "int16": (-(2**15), 2**15 - 1), "int32": (-(2**31), 2**31 - 1), "int64": (-(2**63), 2**63 - 1)}


def oracle_rotate(vec, amount):
    d = len(vec)
    return [vec[(k + amount) % d] for k in range(d)]


def oracle_cast(sums, count, target, base_kind):
    w = max(count, 1)
    out = []
    for s in sums:
        if target == "binary":
            threshold = w / 2 if base_kind == "binary" else 0
            out.append(1 if s > threshold else 0)
        elif target == "bipolar":
            threshold = w / 2 if base_kind == "binary" else 0
            out.append(1 if s >= threshold else -1)
        else:
            lo, hi = _INT_BOUNDS[target]
            out.append(min(max(s, lo), hi))
    return out


def oracle_encode(base_vectors, ids, gram_size, shift, op, base_kind, encoded):
    """Brute-force reference: explicit windows, positions, and scalar folds."""
    scalar_op = (_BINARY_OPS if base_kind == "binary" else _BIPOLAR_OPS)[op]
    length = len(ids)
    n_eff = min(gram_size, length)
    windows = []
    for start in range(length - n_eff + 1):
        folded = None
        for i in range(1, n_eff + 1):  # 1-based position inside the window
            rotated = oracle_rotate(base_vectors[ids[start + i - 1]], (n_eff - i) * shift)
            folded = rotated if folded is None else [scalar_op(x, y) for x, y in zip(folded, rotated)]
        windows.append(folded)
    sums = [sum(col) for col in zip(*windows)]
    return oracle_cast(sums, len(windows), encoded, base_kind)


def make_item_memory(seed, n_tokens, dim, sparsity, base_dtype):
    im = ItemMemory.build(seed, n_tokens, dim, sparsity, base_dtype)
    base_vectors = [im.vectors[t].tolist() for t in range(n_tokens)]
    return im, base_vectors


def test_effective_gram_fallback():
    assert effective_gram(6, 3) == 3
    assert effective_gram(4, 8) == 4
    assert effective_gram(1, 1) == 1
    with pytest.raises(ValueError):
        effective_gram(4, 0)


def test_window_count_for_that_dog():
    # length 8 with gram size 4 slides into 5 windows
    length, n = 8, 4
    assert length - effective_gram(n, length) + 1 == 5


@pytest.mark.parametrize("base_dtype", ["binary", "bipolar"])
@pytest.mark.parametrize("op", ["mult", "xor", "and", "or"])
@pytest.mark.parametrize("gram_size", [1, 2, 3])
@pytest.mark.parametrize("shift", [0, 1])
def test_encode_matches_brute_force_oracle(base_dtype, op, gram_size, shift):
    dim, n_tokens = 8, 5
    im, base_vectors = make_item_memory(11, n_tokens, dim, 0.5, ElementType.parse(base_dtype))
    rng = rng_for(99, "oracle-seqs", gram_size, shift, op, base_dtype)
    encoded_menu = ["binary", "bipolar", "int8", "int16"]
    for trial in range(100):
        length = int(rng.integers(1, 12))
        ids = rng.integers(0, n_tokens, size=length)
        encoded = encoded_menu[trial % len(encoded_menu)]
        config = ArchConfig(
            dim=dim,
            sparsity=0.5,
            gram_size=gram_size,
            base_dtype=ElementType.parse(base_dtype),
            encoded_dtype=ElementType.parse(encoded),
            shift=shift,
            ewise_op=EwiseOp.parse(op),
        )
        expected = oracle_encode(base_vectors, ids.tolist(), gram_size, shift, op, base_dtype, encoded)
        got = encode(config, im, ids)
        assert got.elements.tolist() == expected, f"trial {trial}: ids={ids.tolist()}"
        assert got.dtype is ElementType.parse(encoded)


def test_encode_hand_expression():
    # d=8, gram 2, shift 1, binary base, xor, int16: [0, 1, 0] encodes as
    # rotate(B0, 1) ^ B1 summed with rotate(B1, 1) ^ B0.
    dim = 8
    im, base = make_item_memory(11, 2, dim, 0.5, B)
    first = [a ^ b for a, b in zip(oracle_rotate(base[0], 1), base[1])]
    second = [a ^ b for a, b in zip(oracle_rotate(base[1], 1), base[0])]
    expected = [x + y for x, y in zip(first, second)]
    config = ArchConfig(dim=dim, sparsity=0.5, gram_size=2, base_dtype=B, encoded_dtype=ElementType.INT16, shift=1, ewise_op=EwiseOp.XOR)
    assert encode(config, im, np.array([0, 1, 0])).elements.tolist() == expected


def test_single_token_is_cast_of_its_base_hv():
    im, base = make_item_memory(3, 4, 16, 0.5, B)
    config = ArchConfig(dim=16, sparsity=0.5, gram_size=1, base_dtype=B, encoded_dtype=ElementType.INT32, shift=5, ewise_op=EwiseOp.OR)
    out = encode(config, im, np.array([2]))
    assert out.elements.tolist() == base[2]


def test_shift_zero_ignores_order():
    # With shift 0 no position rotates, so any window permutation of the
    # same tokens folds identically under the commutative operators.
    im, _ = make_item_memory(5, 3, 64, 0.5, P)
    for op in EwiseOp:
        config = ArchConfig(dim=64, sparsity=0.5, gram_size=2, base_dtype=P, encoded_dtype=ElementType.INT16, shift=0, ewise_op=op)
        ab = encode(config, im, np.array([0, 1]))
        ba = encode(config, im, np.array([1, 0]))
        assert ab == ba


def test_shift_discriminates_order_at_scale():
    from hdcsearch.hv import similarity

    im, _ = make_item_memory(5, 3, 1000, 0.5, P)
    config = ArchConfig(dim=1000, sparsity=0.5, gram_size=2, base_dtype=P, encoded_dtype=ElementType.INT16, shift=1, ewise_op=EwiseOp.MULT)
    ab = encode(config, im, np.array([0, 1]))
    ba = encode(config, im, np.array([1, 0]))
    assert similarity(ab, ba, "cosine") < 0.9


@given(
    st.sampled_from(list(EwiseOp)),
    st.sampled_from([B, P]),
    st.integers(2, 5),
    st.integers(1, 16),
    st.data(),
)
@settings(max_examples=50, deadline=None)
def test_fold_order_does_not_matter(op, kind, n_operands, dim, data):
    # All four operators are commutative and associative on their domains,
    # so a left fold equals a right fold.
    values = (0, 1) if kind is B else (-1, 1)
    rows = [
        np.array(data.draw(st.lists(st.sampled_from(values), min_size=dim, max_size=dim)), dtype=np.int8)
        for _ in range(n_operands)
    ]
    left = rows[0]
    for row in rows[1:]:
        left = ewise_arrays(op, kind, left, row)
    right = rows[-1]
    for row in reversed(rows[:-1]):
        right = ewise_arrays(op, kind, right, row)
    assert np.array_equal(left, right)


def test_bipolar_encoded_magnitude_bounded_by_window_count():
    im, _ = make_item_memory(1, 6, 32, 0.5, P)
    rng = rng_for(5, "bound-seqs")
    for _ in range(20):
        length = int(rng.integers(1, 20))
        ids = rng.integers(0, 6, size=length)
        config = ArchConfig(dim=32, sparsity=0.5, gram_size=3, base_dtype=P, encoded_dtype=ElementType.INT64, shift=2, ewise_op=EwiseOp.XOR)
        out = encode(config, im, ids)
        n_windows = length - min(3, length) + 1
        assert np.abs(out.elements).max() <= n_windows


def test_encode_rejects_bad_input():
    im, _ = make_item_memory(2, 3, 16, 0.5, B)
    config = ArchConfig(dim=16, sparsity=0.5, gram_size=2, base_dtype=B, encoded_dtype=ElementType.INT16, shift=1, ewise_op=EwiseOp.XOR)
    with pytest.raises(ValueError, match="empty"):
        encode(config, im, np.array([], dtype=np.int64))
    with pytest.raises(ValueError, match="out of"):
        encode(config, im, np.array([3]))
    mismatched = ArchConfig(dim=32, sparsity=0.5, gram_size=2, base_dtype=B, encoded_dtype=ElementType.INT16, shift=1, ewise_op=EwiseOp.XOR)
    with pytest.raises(ValueError, match="inconsistent"):
        encode(mismatched, im, np.array([0]))


def test_encode_corpus_matches_single_encode():
    im, _ = make_item_memory(21, 4, 24, 0.3, P)
    config = ArchConfig(dim=24, sparsity=0.3, gram_size=3, base_dtype=P, encoded_dtype=ElementType.INT8, shift=1, ewise_op=EwiseOp.MULT)
    sequences = [np.array([0, 1, 2, 3]), np.array([3, 2]), np.array([1])]
    matrix = encode_corpus(config, im, sequences)
    for row, ids in enumerate(sequences):
        assert matrix[row].tolist() == encode(config, im, ids).elements.tolist()


def test_item_memory_entries_match_keyed_generation():
    im = ItemMemory.build(42, 5, 32, 0.4, P)
    for token_id in range(5):
        expected = generate_base_hv(42, token_id, 32, 0.4, P)
        assert im.hv(token_id) == expected
    with pytest.raises(ValueError):
        im.hv(5)


def test_transformer_fit_transform_shape_and_determinism():
    texts = ["abba", "baab", "abab"]
    enc = HypervectorEncoder(dim=64, sparsity=0.5, gram_size=2, master_seed=3)
    out = enc.fit(texts).transform(texts)
    assert out.shape == (3, 64)
    again = HypervectorEncoder(dim=64, sparsity=0.5, gram_size=2, master_seed=3).fit(texts).transform(texts)
    assert np.array_equal(out, again)


def test_transformer_sklearn_contract():
    from sklearn.base import clone

    enc = HypervectorEncoder(dim=32, gram_size=2)
    params = enc.get_params()
    assert params["dim"] == 32
    cloned = clone(enc)
    assert cloned.get_params() == params
    with pytest.raises(Exception):
        HypervectorEncoder().transform(["ab"])  # not fitted

"""Associative-memory tests: training sums, prediction, perceptron retraining."""
import numpy as np
import pytest

from hdcsearch.hv import ElementType, cast_sums
from hdcsearch.memory import (
    AssociativeMemory,
    accuracy,
    predict,
    predict_batch,
    retrain_epoch,
    roc_auc,
    train,
)
from hdcsearch.metrics import softmax
from hdcsearch.rng import rng_for

B = ElementType.BINARY
P = ElementType.BIPOLAR
I64 = ElementType.INT64


def random_bipolar(rng, n, dim):
    return (rng.integers(0, 2, size=(n, dim)) * 2 - 1).astype(np.int8)


def test_train_single_example_per_class():
    encoded = np.array([[1, 0, 1, 0], [0, 1, 0, 1]], dtype=np.int8)
    am = train(encoded, [0, 1], n_classes=2, resultant_dtype=I64, summand_kind=B)
    assert am.views[0].tolist() == cast_sums(encoded[0].astype(np.int64), 1, I64, B).tolist()
    assert am.views[1].tolist() == cast_sums(encoded[1].astype(np.int64), 1, I64, B).tolist()
    assert am.counts.tolist() == [1, 1]


def test_train_duplicate_doubles_accumulator():
    row = np.array([2, -1, 3], dtype=np.int8)
    encoded = np.stack([row, row, np.array([1, 1, 1], dtype=np.int8)])
    am = train(encoded, [0, 0, 1], n_classes=2)
    assert am.sums[0].tolist() == (2 * row.astype(np.int64)).tolist()
    assert am.counts[0] == 2


def test_train_hand_summed_oracle_d8():
    rng = rng_for(23, "train-oracle")
    encoded = rng.integers(-3, 4, size=(5, 8)).astype(np.int8)
    labels = [0, 0, 0, 1, 1]
    am = train(encoded, labels, n_classes=2)
    expected = [sum(int(encoded[i][k]) for i in range(3)) for k in range(8)]
    assert am.sums[0].tolist() == expected


def test_train_is_order_independent():
    rng = rng_for(29, "train-order")
    encoded = random_bipolar(rng, 12, 16)
    labels = np.array([0, 1, 2] * 4)
    am = train(encoded, labels, n_classes=3)
    perm = rng.permutation(12)
    am_permuted = train(encoded[perm], labels[perm], n_classes=3)
    assert np.array_equal(am.sums, am_permuted.sums)
    assert np.array_equal(am.counts, am_permuted.counts)


def test_train_rejects_bad_labels():
    encoded = np.eye(3, dtype=np.int8)
    with pytest.raises(ValueError, match="class 2 has no"):
        train(encoded, [0, 1, 1], n_classes=3)
    with pytest.raises(ValueError, match="label out of range"):
        train(encoded, [0, 1, 3], n_classes=3)


def test_predict_matching_view_wins():
    am = train(np.array([[1, 1, 0, 0], [0, 0, 1, 1]], dtype=np.int8), [0, 1], n_classes=2)
    pred = predict(am, np.array([1, 1, 0, 0], dtype=np.int8))
    assert pred.class_id == 0
    assert pred.similarities == pytest.approx([1.0, 0.0])
    assert pred.probabilities == pytest.approx(softmax(np.array([1.0, 0.0])))


def test_predict_tie_breaks_to_lowest_class():
    am = train(np.array([[1, 0], [1, 0]], dtype=np.int8), [0, 1], n_classes=2)
    pred = predict(am, np.array([1, 0], dtype=np.int8))
    assert pred.class_id == 0
    assert pred.probabilities == pytest.approx([0.5, 0.5])


def test_predict_three_class_brute_force():
    rng = rng_for(31, "predict-oracle")
    encoded = random_bipolar(rng, 9, 8)
    labels = np.array([0, 1, 2] * 3)
    am = train(encoded, labels, n_classes=3)
    for _ in range(20):
        q = random_bipolar(rng, 1, 8)[0]
        sims = []
        for view in am.views:
            qa, va = q.astype(float), view.astype(float)
            denom = np.linalg.norm(qa) * np.linalg.norm(va)
            sims.append(float(qa @ va / denom) if denom else 0.0)
        assert predict(am, q).class_id == int(np.argmax(sims))
        assert predict(am, q).probabilities.sum() == pytest.approx(1.0, abs=1e-9)


def test_predict_argmax_consistent_with_probabilities():
    rng = rng_for(37, "argmax")
    encoded = random_bipolar(rng, 8, 32)
    am = train(encoded, [0, 1] * 4, n_classes=2)
    for q in random_bipolar(rng, 10, 32):
        pred = predict(am, q)
        assert int(np.argmax(pred.probabilities)) == int(np.argmax(pred.similarities))


def test_retrain_noop_when_all_correct():
    encoded = np.array([[1, 1, 0, 0], [0, 0, 1, 1]], dtype=np.int8)
    am = train(encoded, [0, 1], n_classes=2)
    before = am.sums.copy()
    errors = retrain_epoch(am, encoded, np.array([0, 1]))
    assert errors == 0
    assert np.array_equal(am.sums, before)


def test_retrain_single_misprediction_moves_two_accumulators():
    am = AssociativeMemory(n_classes=3, dim=4, resultant_dtype=I64, summand_kind=B)
    am.sums = np.array([[4, 0, 0, 0], [0, 4, 0, 0], [0, 0, 4, 0]], dtype=np.int64)
    am.counts = np.array([4, 4, 4], dtype=np.int64)
    am.refresh_all_views()
    enc = np.array([0, 3, 0, 0], dtype=np.int8)  # nearest view is class 1
    before = am.sums.copy()
    errors = retrain_epoch(am, enc[None, :], np.array([0]))
    assert errors == 1
    assert np.array_equal(am.sums[0], before[0] + enc)
    assert np.array_equal(am.sums[1], before[1] - enc)
    assert np.array_equal(am.sums[2], before[2])
    assert am.counts.tolist() == [5, 3, 4]


def test_retrain_sees_updates_within_epoch():
    # the same wrong example twice in one epoch: the second decision must
    # be made against the already-updated views
    am = AssociativeMemory(n_classes=2, dim=2, resultant_dtype=I64, summand_kind=B)
    am.sums = np.array([[3, 0], [0, 3]], dtype=np.int64)
    am.counts = np.array([3, 3], dtype=np.int64)
    am.refresh_all_views()
    enc = np.array([[1, 2], [1, 2]], dtype=np.int8)
    errors = retrain_epoch(am, enc, np.array([0, 0]))
    # first decision errs (view 1 matches), the update then makes class 0 win
    assert errors == 1


def test_retrain_epoch_refresh_mode_defers_views():
    am = AssociativeMemory(n_classes=2, dim=2, resultant_dtype=I64, summand_kind=B)
    am.sums = np.array([[3, 0], [0, 3]], dtype=np.int64)
    am.counts = np.array([3, 3], dtype=np.int64)
    am.refresh_all_views()
    enc = np.array([[1, 2], [1, 2]], dtype=np.int8)
    errors = retrain_epoch(am, enc, np.array([0, 0]), refresh="epoch")
    assert errors == 2  # stale views: both decisions err
    # views refreshed at the end reflect both updates
    assert np.array_equal(am.views[0], cast_sums(am.sums[0], int(am.counts[0]), I64, B))


def test_retrain_converges_on_separable_data():
    rng = rng_for(41, "retrain-converge")
    centers = random_bipolar(rng, 2, 64)
    rows, labels = [], []
    for i in range(20):
        label = i % 2
        noisy = centers[label].copy()
        flip = rng.integers(0, 64, size=6)
        noisy[flip] = -noisy[flip]
        rows.append(noisy)
        labels.append(label)
    encoded = np.stack(rows)
    labels = np.array(labels)
    am = train(encoded, labels, n_classes=2, resultant_dtype=P, summand_kind=P)
    for _ in range(10):
        if retrain_epoch(am, encoded, labels) == 0:
            break
    assert accuracy(am, encoded, labels) == 1.0


def test_retrain_order_seed_is_deterministic():
    rng = rng_for(43, "retrain-order")
    encoded = random_bipolar(rng, 10, 16)
    labels = rng.integers(0, 2, size=10)
    labels[0], labels[1] = 0, 1
    am1 = train(encoded, labels, n_classes=2)
    am2 = train(encoded, labels, n_classes=2)
    retrain_epoch(am1, encoded, labels, order_seed=5)
    retrain_epoch(am2, encoded, labels, order_seed=5)
    assert np.array_equal(am1.sums, am2.sums)


def test_accuracy_and_roc_auc_on_memory():
    encoded = np.array([[1, 1, 0, 0], [0, 0, 1, 1]], dtype=np.int8)
    am = train(encoded, [0, 1], n_classes=2)
    queries = np.array([[1, 1, 0, 0], [0, 0, 1, 1], [1, 0, 0, 0], [0, 0, 0, 1]], dtype=np.int8)
    labels = np.array([0, 1, 0, 1])
    assert accuracy(am, queries, labels) == 1.0
    assert roc_auc(am, queries, labels, positive_class=1) == 1.0
    assert predict_batch(am, queries).tolist() == [0, 1, 0, 1]


def test_roc_auc_rejects_multiclass_memory():
    encoded = np.eye(3, dtype=np.int8)
    am = train(encoded, [0, 1, 2], n_classes=3)
    with pytest.raises(ValueError, match="binary"):
        roc_auc(am, encoded, np.array([0, 1, 2]))


def test_memory_requires_two_classes():
    with pytest.raises(ValueError):
        AssociativeMemory(n_classes=1, dim=4)


def test_hamming_similarity_batch_requires_nonint_views():
    encoded = np.array([[1, 0], [0, 1]], dtype=np.int8)
    am = train(encoded, [0, 1], n_classes=2, resultant_dtype=ElementType.INT16, summand_kind=B)
    with pytest.raises(ValueError, match="hamming"):
        am.similarities_batch(encoded, metric="hamming")
    am_binary = train(encoded, [0, 1], n_classes=2, resultant_dtype=B, summand_kind=B)
    sims = am_binary.similarities_batch(encoded, metric="hamming")
    assert sims.shape == (2, 2)

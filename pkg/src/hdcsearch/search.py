"""Architecture search loop: sample, evaluate, REINFORCE.

Each episode samples one architecture from the controller, scores it on the
validation split once per evaluation seed (fresh item memory per seed,
train, a few retraining epochs, then the chosen metric), uses the mean
score as the reward, and updates the controller. Failed evaluations score
0 so a long search survives degenerate architectures.
"""
from __future__ import annotations

import sys
import time
from dataclasses import dataclass, field

import numpy as np
from joblib import Parallel, delayed

from .config import DECISION_NAMES, ArchConfig, SearchSpace
from .controller import Controller
from .data import Splits
from .encoder import ItemMemory, encode_corpus, encoded_summand_kind
from .estimator import TrainedModel
from .memory import accuracy, retrain_epoch, roc_auc, train
from .rng import rng_for, seed_for
from .tokenizer import Vocabulary, build_vocab, tokenize

METRICS = ("accuracy", "roc_auc")
SELECTION_MODES = ("validation", "paper_mode_test")


@dataclass
class TokenizedSplits:
    """Pre-tokenized dataset splits shared by every evaluation."""

    vocab: Vocabulary
    class_names: list[str]
    train_ids: list[np.ndarray]
    y_train: np.ndarray
    val_ids: list[np.ndarray]
    y_val: np.ndarray
    test_ids: list[np.ndarray] | None = None
    y_test: np.ndarray | None = None

    @property
    def n_classes(self) -> int:
        return len(self.class_names)


def tokenize_splits(splits: Splits, vocab_order: str = "first-appearance") -> TokenizedSplits:
    """Build the vocabulary on the train split and tokenize every split with it."""
    vocab = build_vocab(splits.train.texts, order=vocab_order)
    data = TokenizedSplits(
        vocab=vocab,
        class_names=list(splits.train.class_names),
        train_ids=[tokenize(vocab, t) for t in splits.train.texts],
        y_train=splits.train.labels,
        val_ids=[tokenize(vocab, t) for t in splits.validation.texts],
        y_val=splits.validation.labels,
    )
    if splits.test is not None:
        data.test_ids = [tokenize(vocab, t) for t in splits.test.texts]
        data.y_test = splits.test.labels
    return data


def _score(am, queries, labels, metric: str, positive_class: int, similarity: str) -> float:
    if metric == "accuracy":
        return accuracy(am, queries, labels, metric=similarity)
    if metric == "roc_auc":
        return roc_auc(am, queries, labels, positive_class=positive_class, metric=similarity)
    raise ValueError(f"unknown metric {metric!r}; expected one of {METRICS}")


def evaluate_single_seed(
    config: ArchConfig,
    data: TokenizedSplits,
    seed: int,
    retrain_epochs: int = 10,
    metric: str = "accuracy",
    positive_class: int = 1,
    similarity: str = "cosine",
) -> float:
    """Score one architecture under one item-memory seed."""
    im = ItemMemory.for_config(seed, data.vocab.n_ids, config)
    enc_train = encode_corpus(config, im, data.train_ids)
    enc_val = encode_corpus(config, im, data.val_ids)
    am = train(
        enc_train,
        data.y_train,
        n_classes=data.n_classes,
        resultant_dtype=config.resultant_dtype,
        summand_kind=encoded_summand_kind(config.encoded_dtype, config.base_dtype),
    )
    for _ in range(retrain_epochs):
        if retrain_epoch(am, enc_train, data.y_train, metric=similarity) == 0:
            break
    return _score(am, enc_val, data.y_val, metric, positive_class, similarity)


def evaluate_reward(
    config: ArchConfig,
    data: TokenizedSplits,
    seeds: list[int],
    retrain_epochs: int = 10,
    metric: str = "accuracy",
    positive_class: int = 1,
    similarity: str = "cosine",
    jobs: int = 1,
) -> tuple[float, list[float]]:
    """Mean validation score over the evaluation seeds; returns (reward, per-seed scores)."""
    if not seeds:
        raise ValueError("need at least one evaluation seed")
    if jobs != 1 and len(seeds) > 1:
        scores = Parallel(n_jobs=jobs)(
            delayed(evaluate_single_seed)(config, data, seed, retrain_epochs, metric, positive_class, similarity)
            for seed in seeds
        )
        scores = [float(s) for s in scores]
    else:
        scores = [
            float(evaluate_single_seed(config, data, seed, retrain_epochs, metric, positive_class, similarity))
            for seed in seeds
        ]
    return float(np.mean(scores)), scores


@dataclass
class EpisodeRecord:
    """One search episode, as persisted to the line-delimited episode log."""

    episode: int
    config: ArchConfig
    seeds: list[int]
    scores: list[float]
    reward: float
    baseline: float
    duration_ms: float

    def to_json_obj(self) -> dict:
        obj: dict = {"episode": self.episode}
        obj.update(self.config.to_dict())
        obj["seeds"] = list(self.seeds)
        obj["scores"] = list(self.scores)
        obj["reward"] = self.reward
        obj["baseline"] = self.baseline
        obj["duration_ms"] = self.duration_ms
        return obj

    @classmethod
    def from_json_obj(cls, obj: dict) -> "EpisodeRecord":
        config = ArchConfig.from_dict({name: obj[name] for name in DECISION_NAMES})
        return cls(
            episode=int(obj["episode"]),
            config=config,
            seeds=[int(s) for s in obj["seeds"]],
            scores=[float(s) for s in obj["scores"]],
            reward=float(obj["reward"]),
            baseline=float(obj["baseline"]),
            duration_ms=float(obj["duration_ms"]),
        )


@dataclass
class SearchResult:
    best: EpisodeRecord
    records: list[EpisodeRecord]
    controller: Controller


def evaluation_seeds(master_seed: int, n_seeds: int) -> list[int]:
    """The per-model item-memory seeds, derived from the master seed."""
    return [seed_for(master_seed, "eval-seed", i) for i in range(n_seeds)]


def search_loop(
    space: SearchSpace,
    data: TokenizedSplits,
    episodes: int = 500,
    n_seeds: int = 5,
    retrain_epochs: int = 10,
    metric: str = "accuracy",
    positive_class: int = 1,
    similarity: str = "cosine",
    master_seed: int = 0,
    hidden_size: int = 64,
    embed_size: int = 16,
    policy: str = "recurrent",
    lr: float = 0.01,
    baseline_decay: float = 0.9,
    entropy_coef: float = 0.01,
    fresh_seeds: bool = False,
    jobs: int = 1,
    measure_time: bool = True,
    log_sink=None,
) -> SearchResult:
    """Run the full sample-evaluate-update loop.

    ``log_sink`` is called with every EpisodeRecord as it is produced. The
    returned best record is the highest reward, earliest episode on ties.
    By default the evaluation seeds are fixed across episodes;
    ``fresh_seeds`` draws a new set per episode.
    """
    if episodes < 1:
        raise ValueError("episodes must be >= 1")
    controller = Controller(
        space.arities,
        hidden_size=hidden_size,
        embed_size=embed_size,
        policy=policy,
        init_seed=seed_for(master_seed, "controller-init"),
    )
    sample_rng = rng_for(master_seed, "controller-sample")
    seed_rng = rng_for(master_seed, "episode-seeds")
    fixed_seeds = evaluation_seeds(master_seed, n_seeds)

    records: list[EpisodeRecord] = []
    best: EpisodeRecord | None = None
    for episode in range(episodes):
        started = time.perf_counter()
        choices, _ = controller.sample(sample_rng)
        config = space.config_at(choices)
        if fresh_seeds:
            seeds = [int(s) for s in seed_rng.integers(0, 2**63 - 1, size=n_seeds)]
        else:
            seeds = fixed_seeds
        try:
            reward, scores = evaluate_reward(
                config, data, seeds, retrain_epochs, metric, positive_class, similarity, jobs=jobs
            )
        except Exception as exc:  # noqa: BLE001 - a bad sample must not kill the search
            print(f"episode {episode}: evaluation failed ({exc}); reward 0", file=sys.stderr)
            reward, scores = 0.0, []
        baseline_used = controller.baseline
        controller.reinforce_update(choices, reward, lr=lr, baseline_decay=baseline_decay, entropy_coef=entropy_coef)
        duration_ms = (time.perf_counter() - started) * 1000.0 if measure_time else 0.0
        record = EpisodeRecord(episode, config, seeds, scores, reward, baseline_used, duration_ms)
        records.append(record)
        if log_sink is not None:
            log_sink(record)
        if best is None or record.reward > best.reward:
            best = record
    return SearchResult(best=best, records=records, controller=controller)


def random_search(
    space: SearchSpace,
    data: TokenizedSplits,
    n_configs: int,
    seeds: list[int],
    retrain_epochs: int = 10,
    metric: str = "accuracy",
    positive_class: int = 1,
    similarity: str = "cosine",
    sample_seed: int = 0,
    jobs: int = 1,
) -> tuple[float, list[float]]:
    """Best-of-n uniform-random baseline; returns (best reward, all rewards)."""
    rng = rng_for(sample_seed, "random-search")
    rewards = []
    for _ in range(n_configs):
        config = space.sample_uniform(rng)
        try:
            reward, _ = evaluate_reward(config, data, seeds, retrain_epochs, metric, positive_class, similarity, jobs)
        except Exception:  # noqa: BLE001 - mirror the search loop's failure handling
            reward = 0.0
        rewards.append(reward)
    return max(rewards), rewards


def finalize(
    config: ArchConfig,
    data: TokenizedSplits,
    final_epochs: int = 1000,
    selection: str = "validation",
    master_seed: int = 0,
    metric: str = "accuracy",
    positive_class: int = 1,
    similarity: str = "cosine",
) -> tuple[TrainedModel, dict]:
    """Retrain the chosen architecture, snapshotting the best epoch.

    ``selection`` picks the split scored after every epoch: ``validation``
    (default) or ``paper_mode_test``, which scores the held-out test split
    instead and is labeled as test-set selection in the report.
    """
    if selection not in SELECTION_MODES:
        raise ValueError(f"unknown selection {selection!r}; expected one of {SELECTION_MODES}")
    if selection == "paper_mode_test":
        if data.test_ids is None:
            raise ValueError("paper_mode_test selection needs a test split")
        sel_ids, sel_labels = data.test_ids, data.y_test
    else:
        sel_ids, sel_labels = data.val_ids, data.y_val

    im = ItemMemory.for_config(master_seed, data.vocab.n_ids, config)
    enc_train = encode_corpus(config, im, data.train_ids)
    enc_sel = encode_corpus(config, im, sel_ids)
    am = train(
        enc_train,
        data.y_train,
        n_classes=data.n_classes,
        resultant_dtype=config.resultant_dtype,
        summand_kind=encoded_summand_kind(config.encoded_dtype, config.base_dtype),
    )

    epoch_scores = [_score(am, enc_sel, sel_labels, metric, positive_class, similarity)]
    best_epoch = 0
    best_sums, best_counts = am.sums.copy(), am.counts.copy()
    for epoch in range(1, final_epochs + 1):
        errors = retrain_epoch(am, enc_train, data.y_train, metric=similarity)
        score = _score(am, enc_sel, sel_labels, metric, positive_class, similarity)
        epoch_scores.append(score)
        if score > epoch_scores[best_epoch]:
            best_epoch = epoch
            best_sums, best_counts = am.sums.copy(), am.counts.copy()
        if errors == 0:
            break  # training set fixed point: further epochs cannot change the memory

    am.sums = best_sums
    am.counts = best_counts
    am.refresh_all_views()
    model = TrainedModel(
        config=config,
        master_seed=master_seed,
        vocab=data.vocab,
        item_memory=im,
        memory=am,
        class_names=data.class_names,
        similarity=similarity,
    )
    report = {
        "selection": selection,
        "selection_split": "test" if selection == "paper_mode_test" else "validation",
        "metric": metric,
        "final_epochs": final_epochs,
        "epochs_run": len(epoch_scores) - 1,
        "best_epoch": best_epoch,
        "best_score": epoch_scores[best_epoch],
        "epoch_scores": epoch_scores,
    }
    if data.test_ids is not None:
        enc_test = encode_corpus(config, im, data.test_ids)
        report["test_score"] = _score(am, enc_test, data.y_test, metric, positive_class, similarity)
    return model, report

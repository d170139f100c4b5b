"""Command-line interface.

Subcommands: search, train, eval, sweep, inspect-log. Runs are described by
a flat key-value config file; environment variables (HDCSEARCH_<KEY>)
override file values and command-line flags override both. All randomness
fans out from a single master seed, so identical inputs give identical
outputs (pass --no-timestamps to also zero wall-clock fields in logs).
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import ArchConfig, SearchSpace
from .data import (
    LabeledCorpus,
    SplitSpec,
    Splits,
    load_csv,
    load_language_dirs,
    load_presplit_csv,
    split,
    subsample,
    synthetic_corpus,
)
from .estimator import TrainedModel, load_model, save_model
from .hv import ElementType, EwiseOp
from .search import (
    EpisodeRecord,
    SearchResult,
    finalize,
    search_loop,
    tokenize_splits,
)
from .tokenizer import tokenize

CONFIG_VERSION = "1"
ENV_PREFIX = "HDCSEARCH_"

DATASET_KINDS = ("synthetic", "csv", "csv-presplit", "language-dirs")


class CliError(Exception):
    """User-facing configuration or input error."""


def _parse_bool(text: str, key: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("true", "yes", "1"):
        return True
    if lowered in ("false", "no", "0"):
        return False
    raise CliError(f"{key}: expected a boolean, got {text!r}")


def _parse_int(text: str, key: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise CliError(f"{key}: expected an integer, got {text!r}") from None


def _parse_float(text: str, key: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise CliError(f"{key}: expected a number, got {text!r}") from None


def _parse_list(text: str, key: str, item_parser) -> tuple:
    items = [part.strip() for part in text.split(",") if part.strip()]
    if not items:
        raise CliError(f"{key}: expected a comma-separated list, got {text!r}")
    return tuple(item_parser(item, key) for item in items)


# Every recognized config-file key with its default (None = unset).
KNOWN_KEYS: dict[str, str | None] = {
    "config_version": None,
    "dataset.kind": None,
    "dataset.path": None,
    "dataset.test_path": None,
    "dataset.train_path": None,
    "dataset.validation_path": None,
    "dataset.text_column": "text",
    "dataset.label_column": "label",
    "dataset.subsample": "1.0",
    "dataset.synthetic_classes": "2",
    "dataset.synthetic_samples": "100",
    "dataset.synthetic_length": "30",
    "dataset.synthetic_alphabet": "4",
    "dataset.synthetic_noise": "0.0",
    "dataset.synthetic_seed": "0",
    "split.train": "0.8",
    "split.validation": "0.2",
    "split.test": None,
    "split.seed": "0",
    "split.stratified": "true",
    "episodes": "500",
    "n_seeds": "5",
    "search_retrain_epochs": "10",
    "final_epochs": "1000",
    "metric": "accuracy",
    "positive_class": "1",
    "similarity": "cosine",
    "vocab_order": "first-appearance",
    "master_seed": "0",
    "output_dir": "runs",
    "jobs": "1",
    "fresh_seeds": "false",
    "controller.hidden_size": "64",
    "controller.embed_size": "16",
    "controller.policy": "recurrent",
    "controller.lr": "0.01",
    "controller.baseline_decay": "0.9",
    "controller.entropy_coef": "0.01",
    "space.dims": None,
    "space.sparsities": None,
    "space.gram_sizes": None,
    "space.base_dtypes": None,
    "space.encoded_dtypes": None,
    "space.resultant_dtypes": None,
    "space.shifts": None,
    "space.ewise_ops": None,
}

_SPACE_KEYS = {
    "space.dims": ("dim", _parse_int),
    "space.sparsities": ("sparsity", _parse_float),
    "space.gram_sizes": ("gram_size", _parse_int),
    "space.base_dtypes": ("base_dtype", lambda t, k: ElementType.parse(t)),
    "space.encoded_dtypes": ("encoded_dtype", lambda t, k: ElementType.parse(t)),
    "space.resultant_dtypes": ("resultant_dtype", lambda t, k: ElementType.parse(t)),
    "space.shifts": ("shift", _parse_int),
    "space.ewise_ops": ("ewise_op", lambda t, k: EwiseOp.parse(t)),
}


def parse_config_file(path: str | Path) -> dict[str, str]:
    """Parse `key = value` lines; '#' starts a comment; keys must be known."""
    path = Path(path)
    if not path.exists():
        raise CliError(f"config file not found: {path}")
    values: dict[str, str] = {}
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise CliError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in KNOWN_KEYS:
            raise CliError(f"{path}:{lineno}: unknown config key {key!r}")
        values[key] = value
    if values.get("config_version") != CONFIG_VERSION:
        raise CliError(f"{path}: config_version must be set to {CONFIG_VERSION}")
    return values


def merge_sources(file_values: dict[str, str], environ=None) -> dict[str, str]:
    """Defaults, overridden by file, overridden by HDCSEARCH_* environment variables."""
    environ = os.environ if environ is None else environ
    merged = {key: default for key, default in KNOWN_KEYS.items() if default is not None}
    merged.update(file_values)
    for key in KNOWN_KEYS:
        env_name = ENV_PREFIX + key.upper().replace(".", "_")
        if env_name in environ:
            merged[key] = environ[env_name]
    return merged


@dataclass
class RunConfig:
    """Fully resolved run settings (file + environment + flags)."""

    values: dict[str, str]

    def raw(self, key: str) -> str | None:
        return self.values.get(key)

    def require(self, key: str) -> str:
        value = self.values.get(key)
        if value is None or value == "":
            raise CliError(f"{key}: required but not set")
        return value

    def integer(self, key: str, minimum: int | None = None) -> int:
        value = _parse_int(self.require(key), key)
        if minimum is not None and value < minimum:
            raise CliError(f"{key}: must be >= {minimum}, got {value}")
        return value

    def number(self, key: str) -> float:
        return _parse_float(self.require(key), key)

    def boolean(self, key: str) -> bool:
        return _parse_bool(self.require(key), key)

    def choice(self, key: str, allowed: tuple[str, ...]) -> str:
        value = self.require(key)
        if value not in allowed:
            raise CliError(f"{key}: expected one of {allowed}, got {value!r}")
        return value

    def search_space(self) -> SearchSpace:
        menus = {}
        for key, (decision, item_parser) in _SPACE_KEYS.items():
            raw = self.values.get(key)
            if raw is None:
                continue
            menu = _parse_list(raw, key, item_parser)
            try:
                SearchSpace({decision: menu})
            except ValueError as exc:
                raise CliError(f"{key}: {exc}") from None
            menus[decision] = menu
        return SearchSpace(menus)

    def split_spec(self) -> SplitSpec:
        fractions = [self.number("split.train"), self.number("split.validation")]
        if self.values.get("split.test") is not None:
            fractions.append(self.number("split.test"))
        spec = SplitSpec(
            fractions=tuple(fractions),
            seed=self.integer("split.seed"),
            stratified=self.boolean("split.stratified"),
        )
        try:
            spec.validate()
        except ValueError as exc:
            raise CliError(f"split: {exc}") from None
        return spec

    def load_splits(self) -> Splits:
        kind = self.choice("dataset.kind", DATASET_KINDS)
        text_col = self.require("dataset.text_column")
        label_col = self.require("dataset.label_column")
        fraction = self.number("dataset.subsample")

        try:
            if kind == "csv-presplit":
                paths = {"train": self.require("dataset.train_path"), "validation": self.require("dataset.validation_path")}
                if self.values.get("dataset.test_path"):
                    paths["test"] = self.values["dataset.test_path"]
                return load_presplit_csv(paths, text_col, label_col)

            if kind == "csv":
                corpus = load_csv(self.require("dataset.path"), text_col, label_col)
            elif kind == "language-dirs":
                corpus = load_language_dirs(self.require("dataset.path"))
            else:
                corpus = synthetic_corpus(
                    n_classes=self.integer("dataset.synthetic_classes", minimum=2),
                    samples_per_class=self.integer("dataset.synthetic_samples", minimum=1),
                    length=self.integer("dataset.synthetic_length", minimum=1),
                    alphabet_size=self.integer("dataset.synthetic_alphabet", minimum=1),
                    noise=self.number("dataset.synthetic_noise"),
                    seed=self.integer("dataset.synthetic_seed"),
                )
            if fraction != 1.0:
                corpus = subsample(corpus, fraction, seed=self.integer("split.seed"))

            if kind == "language-dirs" and self.values.get("dataset.test_path"):
                splits = split(corpus, self.split_spec())
                if splits.test is not None:
                    raise CliError("split.test: drop it when dataset.test_path provides the test set")
                test_corpus = load_language_dirs(self.values["dataset.test_path"])
                if test_corpus.class_names != corpus.class_names:
                    raise CliError(
                        "dataset.test_path: class directories differ from the training root "
                        f"({test_corpus.class_names} vs {corpus.class_names})"
                    )
                splits.test = test_corpus
                return splits
            return split(corpus, self.split_spec())
        except (ValueError, OSError) as exc:
            raise CliError(f"dataset: {exc}") from None

    def check_metric(self, n_classes: int) -> str:
        metric = self.choice("metric", ("accuracy", "roc_auc"))
        if metric == "roc_auc" and n_classes != 2:
            raise CliError(f"metric: roc_auc is binary-only, but the dataset has {n_classes} classes")
        return metric


def resolve_run_config(args, require_file: bool = True) -> RunConfig:
    file_values: dict[str, str] = {}
    if getattr(args, "config", None):
        file_values = parse_config_file(args.config)
    elif require_file:
        raise CliError("--config is required")
    merged = merge_sources(file_values)

    flag_map = {
        "episodes": "episodes",
        "master_seed": "master_seed",
        "output_dir": "output_dir",
        "jobs": "jobs",
        "metric": "metric",
        "subsample": "dataset.subsample",
        "final_epochs": "final_epochs",
    }
    for attr, key in flag_map.items():
        value = getattr(args, attr, None)
        if value is not None:
            merged[key] = str(value)
    return RunConfig(merged)


def load_arch_config(path: str | Path | None, strict: bool = False) -> ArchConfig:
    if path is None:
        return ArchConfig().validate(strict=strict)
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(f"arch config {path}: {exc}") from None
    if "config" in obj:
        obj = obj["config"]
    try:
        return ArchConfig.from_dict(obj).validate(strict=strict)
    except ValueError as exc:
        raise CliError(f"arch config {path}: {exc}") from None


def _record_to_line(record: EpisodeRecord) -> str:
    return json.dumps(record.to_json_obj(), separators=(",", ":"))


def cmd_search(args) -> int:
    run = resolve_run_config(args)
    space = run.search_space()
    splits = run.load_splits()
    data = tokenize_splits(splits, vocab_order=run.require("vocab_order"))
    metric = run.check_metric(data.n_classes)

    out_dir = Path(run.require("output_dir"))
    out_dir.mkdir(parents=True, exist_ok=True)
    log_path = out_dir / "episodes.jsonl"
    started = time.perf_counter()

    with log_path.open("w", encoding="utf-8") as log_file:

        def sink(record: EpisodeRecord) -> None:
            log_file.write(_record_to_line(record) + "\n")
            log_file.flush()

        result = search_loop(
            space,
            data,
            episodes=run.integer("episodes", minimum=1),
            n_seeds=run.integer("n_seeds", minimum=1),
            retrain_epochs=run.integer("search_retrain_epochs", minimum=0),
            metric=metric,
            positive_class=run.integer("positive_class"),
            similarity=run.choice("similarity", ("cosine", "hamming")),
            master_seed=run.integer("master_seed"),
            hidden_size=run.integer("controller.hidden_size", minimum=1),
            embed_size=run.integer("controller.embed_size", minimum=1),
            policy=run.choice("controller.policy", ("recurrent", "factorized")),
            lr=run.number("controller.lr"),
            baseline_decay=run.number("controller.baseline_decay"),
            entropy_coef=run.number("controller.entropy_coef"),
            fresh_seeds=run.boolean("fresh_seeds"),
            jobs=run.integer("jobs", minimum=1),
            measure_time=not args.no_timestamps,
            log_sink=sink,
        )

    elapsed = time.perf_counter() - started
    best = result.best
    best_payload = {
        "format_version": 1,
        "episode": best.episode,
        "reward": best.reward,
        "seeds": best.seeds,
        "scores": best.scores,
        "config": best.config.to_dict(),
    }
    (out_dir / "best_config.json").write_text(json.dumps(best_payload, indent=2) + "\n", encoding="utf-8")
    result.controller.save_checkpoint(out_dir / "controller.npz")

    summary_lines = [
        f"episodes: {len(result.records)}",
        f"metric: {metric}",
        f"best episode: {best.episode}",
        f"best reward: {best.reward}",
        f"best config: {best.config.describe()}",
    ]
    if not args.no_timestamps:
        summary_lines.append(f"total seconds: {elapsed:.1f}")
    summary = "\n".join(summary_lines) + "\n"
    (out_dir / "summary.txt").write_text(summary, encoding="utf-8")
    print(summary, end="")
    print(f"episode log: {log_path}")
    return 0


def _print_split_metrics(model: TrainedModel, name: str, texts, labels, positive_class: int) -> None:
    accuracy_value = model.evaluate(texts, labels, metric="accuracy")
    print(f"{name} accuracy: {accuracy_value:.4f}")
    if len(model.class_names) == 2 and len(np.unique(labels)) == 2:
        auc = model.evaluate(texts, labels, metric="roc_auc", positive_class=positive_class)
        print(f"{name} roc_auc: {auc:.4f}")


def cmd_train(args) -> int:
    run = resolve_run_config(args)
    splits = run.load_splits()
    data = tokenize_splits(splits, vocab_order=run.require("vocab_order"))
    metric = run.check_metric(data.n_classes)
    config = load_arch_config(args.arch_config)
    selection = "paper_mode_test" if args.selection == "paper-mode-test" else "validation"

    model, report = finalize(
        config,
        data,
        final_epochs=run.integer("final_epochs", minimum=0),
        selection=selection,
        master_seed=run.integer("master_seed"),
        metric=metric,
        positive_class=run.integer("positive_class"),
        similarity=run.choice("similarity", ("cosine", "hamming")),
    )
    print(f"architecture: {config.describe()}")
    print(f"selection: {report['selection_split']} split, best epoch {report['best_epoch']} "
          f"of {report['epochs_run']} ({metric} = {report['best_score']:.4f})")
    positive_class = run.integer("positive_class")
    _print_split_metrics(model, "validation", splits.validation.texts, splits.validation.labels, positive_class)
    if splits.test is not None:
        _print_split_metrics(model, "test", splits.test.texts, splits.test.labels, positive_class)

    if args.model_out:
        save_model(model, args.model_out)
        print(f"model written to {args.model_out}")
    return 0


def cmd_eval(args) -> int:
    run = resolve_run_config(args)
    model = load_model(args.model)
    splits = run.load_splits()
    part = splits.parts().get(args.split)
    if part is None:
        raise CliError(f"--split: the dataset has no {args.split!r} part")
    if part.class_names != model.class_names:
        raise CliError(f"dataset classes {part.class_names} do not match the model's {model.class_names}")
    _print_split_metrics(model, args.split, part.texts, part.labels, run.integer("positive_class"))
    return 0


def cmd_sweep(args) -> int:
    run = resolve_run_config(args)
    dims = _parse_list(args.dims, "--dims", _parse_int)
    sparsities = _parse_list(args.sparsities, "--sparsities", _parse_float)
    splits = run.load_splits()
    data = tokenize_splits(splits, vocab_order=run.require("vocab_order"))
    metric = run.check_metric(data.n_classes)
    base = load_arch_config(args.arch_config)

    rows = ["dim,sparsity,score"]
    for dim in dims:
        for sparsity in sparsities:
            config = dataclasses.replace(base, dim=dim, sparsity=sparsity)
            try:
                config.validate()
            except ValueError as exc:
                raise CliError(f"sweep cell: {exc}") from None
            _, report = finalize(
                config,
                data,
                final_epochs=run.integer("final_epochs", minimum=0),
                master_seed=run.integer("master_seed"),
                metric=metric,
                positive_class=run.integer("positive_class"),
                similarity=run.choice("similarity", ("cosine", "hamming")),
            )
            rows.append(f"{dim},{sparsity},{report['best_score']}")
            print(rows[-1])
    Path(args.output).write_text("\n".join(rows) + "\n", encoding="utf-8")
    print(f"sweep written to {args.output}")
    return 0


def cmd_inspect_log(args) -> int:
    path = Path(args.log)
    if not path.exists():
        raise CliError(f"log file not found: {path}")
    records = []
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            records.append(EpisodeRecord.from_json_obj(json.loads(line)))
        except (json.JSONDecodeError, KeyError, ValueError) as exc:
            raise CliError(f"{path}:{lineno}: malformed episode record ({exc})") from None
    if not records:
        raise CliError(f"{path}: no episode records")

    rewards = [r.reward for r in records]
    best = max(records, key=lambda r: (r.reward, -r.episode))
    print(f"episodes: {len(records)}")
    print(f"failed episodes: {sum(1 for r in records if not r.scores)}")
    print(f"mean reward: {float(np.mean(rewards)):.4f}")
    print(f"best episode: {best.episode} (reward {best.reward})")
    print(f"best config: {best.config.describe()}")
    for record in sorted(records, key=lambda r: (-r.reward, r.episode))[: args.top]:
        print(f"  episode {record.episode}: reward {record.reward} [{record.config.describe()}]")
    return 0


_EPILOG = """\
configuration precedence (lowest to highest):
  1. built-in defaults (500 episodes, 5 evaluation seeds, 10 search
     retraining epochs, 1000 final retraining epochs)
  2. the --config file: flat `key = value` lines, '#' comments, and a
     mandatory `config_version = 1`
  3. environment variables: HDCSEARCH_<KEY> with dots as underscores,
     e.g. HDCSEARCH_DATASET_KIND, HDCSEARCH_SPACE_DIMS
  4. command-line flags (--episodes, --master-seed, --output-dir, ...)

key groups: dataset.* (kind, path, columns, subsample, synthetic_*),
split.* (train/validation/test fractions, seed, stratified), episodes,
n_seeds, search_retrain_epochs, final_epochs, metric, positive_class,
similarity, vocab_order, master_seed, output_dir, jobs, fresh_seeds,
controller.* (hidden_size, embed_size, policy, lr, baseline_decay,
entropy_coef), and space.* menu restrictions (dims, sparsities,
gram_sizes, base_dtypes, encoded_dtypes, resultant_dtypes, shifts,
ewise_ops).
"""


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hdcsearch",
        description="Hyperdimensional classification with automated architecture search.",
        epilog=_EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="run config file (flat key = value format)")
        p.add_argument("--master-seed", dest="master_seed", type=int, help="root of every random stream")
        p.add_argument("--jobs", type=int, help="max parallel workers for per-seed evaluations")
        p.add_argument("--metric", choices=("accuracy", "roc_auc"), help="reward/score metric")
        p.add_argument("--subsample", type=float, help="stratified corpus subsample fraction in (0, 1]")

    p_search = sub.add_parser("search", help="run the architecture search loop")
    common(p_search)
    p_search.add_argument("--episodes", type=int, help="number of search episodes")
    p_search.add_argument("--output-dir", dest="output_dir", help="directory for logs and the best config")
    p_search.add_argument(
        "--no-timestamps",
        action="store_true",
        help="zero wall-clock fields so reruns are byte-identical",
    )
    p_search.set_defaults(func=cmd_search)

    p_train = sub.add_parser("train", help="train one architecture end to end and serialize it")
    common(p_train)
    p_train.add_argument("--arch-config", help="JSON architecture file (e.g. best_config.json from search)")
    p_train.add_argument("--model-out", help="path for the serialized model container")
    p_train.add_argument("--final-epochs", dest="final_epochs", type=int, help="retraining epoch budget")
    p_train.add_argument(
        "--selection",
        choices=("validation", "paper-mode-test"),
        default="validation",
        help="split scored for per-epoch snapshot selection; "
        "paper-mode-test selects on the test split and is labeled as such",
    )
    p_train.set_defaults(func=cmd_train)

    p_eval = sub.add_parser("eval", help="evaluate a serialized model on a dataset split")
    common(p_eval)
    p_eval.add_argument("--model", required=True, help="model container written by train")
    p_eval.add_argument("--split", choices=("train", "validation", "test"), default="validation")
    p_eval.set_defaults(func=cmd_eval)

    p_sweep = sub.add_parser("sweep", help="grid-evaluate dimension x sparsity and emit CSV")
    common(p_sweep)
    p_sweep.add_argument("--dims", required=True, help="comma-separated dimension list")
    p_sweep.add_argument("--sparsities", required=True, help="comma-separated sparsity list")
    p_sweep.add_argument("--arch-config", help="JSON architecture file for the non-swept fields")
    p_sweep.add_argument("--output", required=True, help="CSV output path (header: dim,sparsity,score)")
    p_sweep.add_argument("--final-epochs", dest="final_epochs", type=int, help="retraining epoch budget")
    p_sweep.set_defaults(func=cmd_sweep)

    p_log = sub.add_parser("inspect-log", help="summarize an episode log")
    p_log.add_argument("--log", required=True, help="episodes.jsonl written by search")
    p_log.add_argument("--top", type=int, default=5, help="how many top episodes to list")
    p_log.set_defaults(func=cmd_inspect_log)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()

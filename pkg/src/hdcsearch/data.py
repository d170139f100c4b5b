"""Dataset loading, splitting, and the bundled synthetic corpus generator."""
from __future__ import annotations

import csv
import string
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .rng import rng_for

SPLIT_MODES = ("random", "presplit-files")


@dataclass
class LabeledCorpus:
    """Texts with dense integer labels 0..n_classes-1."""

    texts: list[str]
    labels: np.ndarray
    class_names: list[str]
    provenance: str = ""

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if len(self.texts) != self.labels.shape[0]:
            raise ValueError("texts and labels must have the same length")
        for i, text in enumerate(self.texts):
            if not text:
                raise ValueError(f"record {i} has an empty text")
        if self.labels.size and (self.labels.min() < 0 or self.labels.max() >= len(self.class_names)):
            raise ValueError("label out of range for class_names")

    def __len__(self) -> int:
        return len(self.texts)

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    def take(self, indices: np.ndarray, provenance: str | None = None) -> "LabeledCorpus":
        return LabeledCorpus(
            texts=[self.texts[i] for i in indices],
            labels=self.labels[indices],
            class_names=list(self.class_names),
            provenance=provenance if provenance is not None else self.provenance,
        )


@dataclass(frozen=True)
class SplitSpec:
    """How to split a corpus: fractions for random mode, file paths otherwise."""

    fractions: tuple[float, ...] = (0.8, 0.1, 0.1)
    seed: int = 0
    mode: str = "random"
    stratified: bool = True

    def validate(self) -> "SplitSpec":
        if self.mode not in SPLIT_MODES:
            raise ValueError(f"split mode must be one of {SPLIT_MODES}, got {self.mode!r}")
        if self.mode == "random":
            if len(self.fractions) not in (2, 3):
                raise ValueError("fractions must have 2 (train, validation) or 3 (train, validation, test) entries")
            if any(f <= 0 for f in self.fractions):
                raise ValueError("all split fractions must be positive")
            if abs(sum(self.fractions) - 1.0) > 1e-9:
                raise ValueError(f"split fractions must sum to 1, got {sum(self.fractions)}")
        return self


@dataclass
class Splits:
    train: LabeledCorpus
    validation: LabeledCorpus
    test: LabeledCorpus | None = None

    def parts(self) -> dict[str, LabeledCorpus]:
        out = {"train": self.train, "validation": self.validation}
        if self.test is not None:
            out["test"] = self.test
        return out


def load_csv(path: str | Path, text_column: str, label_column: str) -> LabeledCorpus:
    """Load a header-row CSV; labels get dense ids in sorted label order."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: file is empty") from None
        for column in (text_column, label_column):
            if column not in header:
                raise ValueError(f"{path}: missing column {column!r} (header: {header})")
        text_idx = header.index(text_column)
        label_idx = header.index(label_column)

        texts: list[str] = []
        raw_labels: list[str] = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ValueError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            if not row[text_idx]:
                raise ValueError(f"{path}:{lineno}: empty text in column {text_column!r}")
            texts.append(row[text_idx])
            raw_labels.append(row[label_idx])

    if not texts:
        raise ValueError(f"{path}: no data rows")
    class_names = sorted(set(raw_labels))
    name_to_id = {name: idx for idx, name in enumerate(class_names)}
    labels = np.array([name_to_id[name] for name in raw_labels], dtype=np.int64)
    return LabeledCorpus(texts, labels, class_names, provenance=f"csv:{path}")


def load_presplit_csv(
    paths: dict[str, str | Path],
    text_column: str,
    label_column: str,
) -> Splits:
    """Load user-provided split files verbatim, with one shared label mapping.

    ``paths`` maps split names ("train", "validation", optionally "test")
    to CSV files.
    """
    for required in ("train", "validation"):
        if required not in paths:
            raise ValueError(f"presplit mode needs a {required!r} file")
    loaded = {name: load_csv(p, text_column, label_column) for name, p in paths.items()}
    class_names = sorted({name for corpus in loaded.values() for name in corpus.class_names})
    name_to_id = {name: idx for idx, name in enumerate(class_names)}

    def remap(corpus: LabeledCorpus) -> LabeledCorpus:
        labels = np.array([name_to_id[corpus.class_names[l]] for l in corpus.labels], dtype=np.int64)
        return LabeledCorpus(corpus.texts, labels, class_names, provenance=corpus.provenance)

    return Splits(
        train=remap(loaded["train"]),
        validation=remap(loaded["validation"]),
        test=remap(loaded["test"]) if "test" in loaded else None,
    )


def load_language_dirs(root: str | Path) -> LabeledCorpus:
    """Load `root/<label>/<file>.txt` corpora: one sample per nonempty line."""
    root = Path(root)
    if not root.is_dir():
        raise ValueError(f"{root}: not a directory")
    class_dirs = sorted(p for p in root.iterdir() if p.is_dir())
    if len(class_dirs) < 2:
        raise ValueError(f"{root}: need at least 2 class subdirectories, found {len(class_dirs)}")

    texts: list[str] = []
    labels: list[int] = []
    class_names = [p.name for p in class_dirs]
    for class_id, class_dir in enumerate(class_dirs):
        n_before = len(texts)
        for file in sorted(class_dir.glob("*.txt")):
            for line in file.read_text(encoding="utf-8").splitlines():
                if line.strip():
                    texts.append(line)
                    labels.append(class_id)
        if len(texts) == n_before:
            raise ValueError(f"{class_dir}: class directory has no nonempty lines")
    return LabeledCorpus(texts, np.array(labels, dtype=np.int64), class_names, provenance=f"language-dirs:{root}")


def write_language_dirs(corpus: LabeledCorpus, root: str | Path) -> None:
    """Write a corpus in the language-dirs layout (demo/test helper)."""
    root = Path(root)
    for class_id, name in enumerate(corpus.class_names):
        class_dir = root / name
        class_dir.mkdir(parents=True, exist_ok=True)
        lines = [corpus.texts[i] for i in np.flatnonzero(corpus.labels == class_id)]
        (class_dir / "samples.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")


def _allocate(n: int, fractions: tuple[float, ...]) -> list[int]:
    """Largest-remainder allocation of n items to the fractions (each within 1 of exact)."""
    exact = [f * n for f in fractions]
    counts = [int(np.floor(x)) for x in exact]
    remainders = [x - c for x, c in zip(exact, counts)]
    for _ in range(n - sum(counts)):
        best = max(range(len(fractions)), key=lambda i: (remainders[i], -i))
        counts[best] += 1
        remainders[best] = -1.0
    return counts


def split(corpus: LabeledCorpus, spec: SplitSpec) -> Splits:
    """Seeded random split at the requested fractions, stratified per class by default."""
    spec.validate()
    if spec.mode != "random":
        raise ValueError("presplit-files mode is resolved by the loader, not by split()")
    n_parts = len(spec.fractions)
    rng = rng_for(spec.seed, "split")
    part_indices: list[list[np.ndarray]] = [[] for _ in range(n_parts)]

    if spec.stratified:
        for class_id in range(corpus.n_classes):
            members = np.flatnonzero(corpus.labels == class_id)
            rng.shuffle(members)
            counts = _allocate(members.shape[0], spec.fractions)
            start = 0
            for part, count in enumerate(counts):
                part_indices[part].append(members[start : start + count])
                start += count
    else:
        order = rng.permutation(len(corpus))
        counts = _allocate(len(corpus), spec.fractions)
        start = 0
        for part, count in enumerate(counts):
            part_indices[part].append(order[start : start + count])
            start += count

    parts = []
    names = ("train", "validation", "test")[:n_parts]
    for part, name in enumerate(names):
        indices = np.sort(np.concatenate(part_indices[part])) if part_indices[part] else np.array([], dtype=np.int64)
        parts.append(corpus.take(indices, provenance=f"{corpus.provenance}#{name}"))

    train = parts[0]
    present = set(train.labels.tolist())
    missing = [corpus.class_names[c] for c in range(corpus.n_classes) if c not in present]
    if missing:
        raise ValueError(f"classes absent from the train split: {missing}")
    return Splits(train=train, validation=parts[1], test=parts[2] if n_parts == 3 else None)


def subsample(corpus: LabeledCorpus, fraction: float, seed: int = 0) -> LabeledCorpus:
    """Seeded stratified subsample keeping at least one record per class."""
    if not 0.0 < fraction <= 1.0:
        raise ValueError(f"subsample fraction must lie in (0, 1], got {fraction}")
    if fraction == 1.0:
        return corpus
    rng = rng_for(seed, "subsample")
    keep: list[np.ndarray] = []
    for class_id in range(corpus.n_classes):
        members = np.flatnonzero(corpus.labels == class_id)
        rng.shuffle(members)
        count = max(1, int(round(fraction * members.shape[0])))
        keep.append(members[:count])
    indices = np.sort(np.concatenate(keep))
    return corpus.take(indices, provenance=f"{corpus.provenance}#subsample={fraction}")


def _alphabet_pool() -> str:
    latin1 = "".join(chr(c) for c in range(0xC0, 0x100) if chr(c).isalpha())
    return string.ascii_lowercase + string.ascii_uppercase + string.digits + latin1


def synthetic_corpus(
    n_classes: int = 2,
    samples_per_class: int = 100,
    length: int = 30,
    alphabet_size: int = 4,
    noise: float = 0.0,
    seed: int = 0,
) -> LabeledCorpus:
    """Generate a corpus whose classes use disjoint character alphabets.

    With ``noise`` > 0, each character is replaced with probability
    ``noise`` by one drawn from the whole pool, blurring the class margins.
    """
    if n_classes < 2:
        raise ValueError("need at least 2 classes")
    pool = _alphabet_pool()
    if n_classes * alphabet_size > len(pool):
        raise ValueError(f"n_classes * alphabet_size must be <= {len(pool)}")
    if not 0.0 <= noise <= 1.0:
        raise ValueError("noise must lie in [0, 1]")

    rng = rng_for(seed, "synthetic-corpus")
    full = pool[: n_classes * alphabet_size]
    texts: list[str] = []
    labels: list[int] = []
    for class_id in range(n_classes):
        alphabet = pool[class_id * alphabet_size : (class_id + 1) * alphabet_size]
        for _ in range(samples_per_class):
            chars = [alphabet[i] for i in rng.integers(alphabet_size, size=length)]
            if noise > 0.0:
                flips = rng.random(length) < noise
                for pos in np.flatnonzero(flips):
                    chars[pos] = full[int(rng.integers(len(full)))]
            texts.append("".join(chars))
            labels.append(class_id)
    class_names = [f"class{c}" for c in range(n_classes)]
    return LabeledCorpus(
        texts,
        np.array(labels, dtype=np.int64),
        class_names,
        provenance=f"synthetic:classes={n_classes},noise={noise},seed={seed}",
    )

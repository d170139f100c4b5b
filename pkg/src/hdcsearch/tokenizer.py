"""Character-level tokenization.

Every unique character in the training corpus gets a dense id; one extra
reserved id (equal to the vocabulary size) covers characters first seen at
inference time.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

VOCAB_ORDERS = ("first-appearance", "frequency")


@dataclass(frozen=True)
class Vocabulary:
    """Mapping from single characters to dense ids 0..size-1."""

    token_to_id: dict[str, int]

    @property
    def size(self) -> int:
        return len(self.token_to_id)

    @property
    def unknown_id(self) -> int:
        """Reserved id for characters not seen during vocabulary building."""
        return len(self.token_to_id)

    @property
    def n_ids(self) -> int:
        """Number of ids including the unknown token."""
        return len(self.token_to_id) + 1

    def id_for(self, char: str) -> int:
        return self.token_to_id.get(char, self.unknown_id)


def build_vocab(corpus: list[str] | tuple[str, ...], order: str = "first-appearance") -> Vocabulary:
    """Assign an id to every unique character in the corpus.

    ``order`` picks the id assignment rule: by first appearance while
    scanning the corpus in the given order (default), or by descending
    frequency with first appearance breaking ties.
    """
    if order not in VOCAB_ORDERS:
        raise ValueError(f"unknown vocab order {order!r}; expected one of {VOCAB_ORDERS}")
    if not corpus:
        raise ValueError("corpus must be nonempty")

    first_seen: dict[str, int] = {}
    counts: dict[str, int] = {}
    pos = 0
    for text in corpus:
        for char in text:
            if char not in first_seen:
                first_seen[char] = pos
                counts[char] = 0
            counts[char] += 1
            pos += 1
    if not first_seen:
        raise ValueError("corpus contains no characters")

    if order == "first-appearance":
        ordered = sorted(first_seen, key=first_seen.get)
    else:
        ordered = sorted(first_seen, key=lambda ch: (-counts[ch], first_seen[ch]))
    return Vocabulary({char: idx for idx, char in enumerate(ordered)})


def tokenize(vocab: Vocabulary, text: str) -> np.ndarray:
    """Character-by-character id lookup; unseen characters map to the unknown id."""
    if not text:
        raise ValueError("cannot tokenize an empty string")
    return np.fromiter((vocab.id_for(ch) for ch in text), dtype=np.int64, count=len(text))


def save_vocab(vocab: Vocabulary, path: str | Path) -> None:
    """Write the sidecar file: one `<codepoint-hex> <id>` line per token."""
    lines = [f"{ord(ch):x} {idx}" for ch, idx in sorted(vocab.token_to_id.items(), key=lambda kv: kv[1])]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_vocab(path: str | Path) -> Vocabulary:
    token_to_id: dict[str, int] = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            cp_hex, idx = line.split()
            token_to_id[chr(int(cp_hex, 16))] = int(idx)
        except ValueError:
            raise ValueError(f"{path}:{lineno}: malformed vocabulary line {line!r}") from None
    ids = sorted(token_to_id.values())
    if ids != list(range(len(ids))):
        raise ValueError(f"{path}: vocabulary ids are not dense 0..{len(ids) - 1}")
    return Vocabulary(token_to_id)

"""Reading and writing word embeddings and word-pair dictionaries.

Embeddings use the word2vec text format: a `count dim` header line followed
by one `word v1 ... vdim` line per word, space separated, UTF-8. Dictionary
files contain one `source target` pair per line (tab or space separated).
Files are assumed to be frequency ordered, most frequent word first.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterator

import numpy as np


@dataclass(frozen=True)
class Embedding:
    """A vocabulary and its dense vector matrix, one row per word.

    Word order is frequency order (index = frequency rank). Instances are
    immutable after construction and safe to share across threads.
    """

    words: tuple[str, ...]
    vectors: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "words", tuple(self.words))
        if self.vectors.ndim != 2:
            raise ValueError("vectors must be a 2-d matrix")
        if len(self.words) != self.vectors.shape[0]:
            raise ValueError(
                f"{len(self.words)} words but {self.vectors.shape[0]} vector rows"
            )
        if len(set(self.words)) != len(self.words):
            raise ValueError("duplicate words in vocabulary")
        self.vectors.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def __len__(self) -> int:
        return len(self.words)

    @cached_property
    def word_index(self) -> dict[str, int]:
        return {w: i for i, w in enumerate(self.words)}


@dataclass(frozen=True)
class WordPairList:
    """Ordered, deduplicated (source, target) word pairs.

    A source word may appear with several targets; identical pairs are
    collapsed to their first occurrence.
    """

    pairs: tuple[tuple[str, str], ...]

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple(tuple(p) for p in self.pairs))

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self) -> Iterator[tuple[str, str]]:
        return iter(self.pairs)

    @cached_property
    def targets_by_source(self) -> dict[str, set[str]]:
        grouped: dict[str, set[str]] = {}
        for src, tgt in self.pairs:
            grouped.setdefault(src, set()).add(tgt)
        return grouped


def _open_text(source, mode: str = "r"):
    """Accept a path or an open (text or binary) stream; return (stream, owns)."""
    if isinstance(source, (str, Path)):
        return open(source, mode, encoding="utf-8", newline="\n"), True
    if hasattr(source, "read" if "r" in mode else "write"):
        return source, False
    raise TypeError(f"expected a path or file object, got {type(source)!r}")


def _decode(line) -> str:
    return line.decode("utf-8") if isinstance(line, bytes) else line


def load_embeddings(reader, max_vocab: int | None = None) -> Embedding:
    """Load a word2vec text file, keeping at most ``max_vocab`` valid rows.

    Rows appear in file order. A word seen before is skipped (first
    occurrence wins; files are frequency ordered so the first one is the
    most frequent). All-zero rows cannot be length normalized later and are
    dropped with a warning.
    """
    if max_vocab is not None and max_vocab < 1:
        raise ValueError("max_vocab must be positive")
    stream, owns = _open_text(reader)
    try:
        header = _decode(stream.readline()).rstrip("\r\n")
        parts = header.split(" ")
        if len(parts) != 2:
            raise ValueError(f"malformed header: {header!r}")
        try:
            count, dim = int(parts[0]), int(parts[1])
        except ValueError:
            raise ValueError(f"malformed header: {header!r}") from None
        if dim < 1:
            raise ValueError(f"malformed header: dimension {dim} < 1")

        limit = count if max_vocab is None else min(count, max_vocab)
        words: list[str] = []
        seen: set[str] = set()
        rows: list[np.ndarray] = []
        dropped_zero = 0
        for lineno, raw in enumerate(stream, start=2):
            if len(words) >= limit or lineno - 1 > count:
                break
            line = _decode(raw).rstrip("\r\n")
            fields = line.split(" ")
            if len(fields) != dim + 1:
                raise ValueError(
                    f"line {lineno}: expected {dim} components, got {len(fields) - 1}"
                )
            word = fields[0]
            if word in seen:
                continue
            try:
                vec = np.array([float(v) for v in fields[1:]], dtype=np.float32)
            except ValueError:
                raise ValueError(f"line {lineno}: non-numeric component") from None
            if not np.all(np.isfinite(vec)):
                raise ValueError(f"line {lineno}: non-finite component")
            if not np.any(vec):
                dropped_zero += 1
                continue
            seen.add(word)
            words.append(word)
            rows.append(vec)
    finally:
        if owns:
            stream.close()

    if dropped_zero:
        warnings.warn(f"dropped {dropped_zero} all-zero vector(s) at load")
    if not words:
        raise ValueError("empty vocabulary after filtering")
    return Embedding(words=tuple(words), vectors=np.vstack(rows))


def save_embeddings(emb: Embedding, writer) -> None:
    """Write an embedding in the word2vec text format read by load_embeddings.

    Values are printed with 9 significant digits, which round-trips float32
    exactly.
    """
    if len(emb) == 0:
        raise ValueError("cannot save an empty embedding")
    stream, owns = _open_text(writer, "w")
    try:
        try:
            stream.write("")
            emit = stream.write
        except TypeError:  # binary stream
            emit = lambda text: stream.write(text.encode("utf-8"))

        emit(f"{len(emb)} {emb.dim}\n")
        for word, row in zip(emb.words, emb.vectors):
            emit(word + " " + " ".join(f"{v:.9g}" for v in row) + "\n")
    finally:
        if owns:
            stream.close()


def load_dictionary(reader) -> WordPairList:
    """Load `source target` pairs, one per line, deduplicated in file order."""
    stream, owns = _open_text(reader)
    pairs: list[tuple[str, str]] = []
    seen: set[tuple[str, str]] = set()
    try:
        for lineno, raw in enumerate(stream, start=1):
            line = _decode(raw).strip()
            if not line:
                continue
            fields = line.split()
            if len(fields) < 2:
                raise ValueError(f"line {lineno}: fewer than 2 fields")
            pair = (fields[0], fields[1])
            if pair not in seen:
                seen.add(pair)
                pairs.append(pair)
    finally:
        if owns:
            stream.close()
    return WordPairList(pairs=tuple(pairs))

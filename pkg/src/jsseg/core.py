"""Domain types: alphabets, count-vector sequences, spans and segment trees.

Counts are kept as exact integers in an ``(N, k)`` array; frequencies are only
formed when a divergence is evaluated.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np


@dataclass(frozen=True)
class Alphabet:
    """Ordered set of distinct symbol labels."""

    labels: tuple[str, ...]
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        labels = tuple(self.labels)
        if not labels:
            raise ValueError("alphabet must hold at least one symbol")
        for label in labels:
            if not isinstance(label, str) or not label:
                raise ValueError(f"invalid symbol label {label!r}")
        index = {label: i for i, label in enumerate(labels)}
        if len(index) != len(labels):
            raise ValueError("alphabet labels must be unique")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "_index", index)

    @property
    def k(self) -> int:
        return len(self.labels)

    def __len__(self) -> int:
        return len(self.labels)

    def __contains__(self, label) -> bool:
        return label in self._index

    def index(self, label: str) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise KeyError(f"symbol {label!r} not in alphabet") from None


@dataclass(frozen=True)
class Span:
    """Half-open position range ``[start, end)``."""

    start: int
    end: int

    def __post_init__(self):
        if not 0 <= self.start < self.end:
            raise ValueError(f"invalid span [{self.start}, {self.end})")

    def __len__(self) -> int:
        return self.end - self.start

    @property
    def length(self) -> int:
        return self.end - self.start

    def split(self, split_after: int) -> tuple["Span", "Span"]:
        if not 1 <= split_after < self.length:
            raise ValueError(
                f"split_after={split_after} outside [1, {self.length - 1}]"
            )
        mid = self.start + split_after
        return Span(self.start, mid), Span(mid, self.end)


class WeightedSequence:
    """Positions holding nonnegative integer count vectors over an alphabet.

    Parameters
    ----------
    alphabet : Alphabet
    counts : array-like of shape (N, k)
        Nonnegative integer counts; row ``t`` is position ``t``.
    position_labels : sequence of str, optional
        Display labels, e.g. 1-based line or bar numbers. Defaults to
        ``"1" .. "N"``.
    """

    __slots__ = ("alphabet", "counts", "position_labels")

    def __init__(self, alphabet: Alphabet, counts, position_labels=None):
        arr = np.asarray(counts)
        if arr.ndim != 2:
            raise ValueError("counts must be a 2-D array of shape (N, k)")
        if arr.shape[1] != alphabet.k:
            raise ValueError(
                f"count vectors have length {arr.shape[1]}, alphabet has {alphabet.k}"
            )
        if arr.shape[0] < 1:
            raise ValueError("empty sequence")
        if arr.dtype.kind == "f":
            if not np.all(np.isfinite(arr)) or np.any(arr != np.round(arr)):
                raise ValueError("counts must be integers")
        elif arr.dtype.kind not in "iub":
            raise ValueError(f"counts must be integers, got dtype {arr.dtype}")
        arr = np.array(arr, dtype=np.int64, copy=True)
        if np.any(arr < 0):
            raise ValueError("counts must be nonnegative")
        if arr.sum() < 1:
            raise ValueError("sequence has zero total mass")
        arr.setflags(write=False)
        if position_labels is None:
            position_labels = tuple(str(i + 1) for i in range(arr.shape[0]))
        else:
            position_labels = tuple(str(x) for x in position_labels)
            if len(position_labels) != arr.shape[0]:
                raise ValueError("position_labels length must equal N")
        object.__setattr__(self, "alphabet", alphabet)
        object.__setattr__(self, "counts", arr)
        object.__setattr__(self, "position_labels", position_labels)

    def __setattr__(self, name, value):
        raise AttributeError("WeightedSequence is immutable")

    def __len__(self) -> int:
        return self.counts.shape[0]

    @property
    def n_positions(self) -> int:
        return self.counts.shape[0]

    @property
    def mass(self) -> int:
        return int(self.counts.sum())

    @property
    def full_span(self) -> Span:
        return Span(0, self.counts.shape[0])

    def __eq__(self, other):
        if not isinstance(other, WeightedSequence):
            return NotImplemented
        return (
            self.alphabet == other.alphabet
            and self.position_labels == other.position_labels
            and np.array_equal(self.counts, other.counts)
        )

    __hash__ = None

    def __repr__(self):
        return (
            f"WeightedSequence(N={len(self)}, k={self.alphabet.k}, mass={self.mass})"
        )


@dataclass(frozen=True)
class SegmentNode:
    """One node of the binary segmentation record.

    ``split_after`` is the number of positions in the left child, relative to
    ``span.start``. ``d_max`` and ``baseline`` are absent for nodes that were
    never evaluated (too short, or at the depth limit).
    """

    span: Span
    d_max: Optional[float] = None
    split_after: Optional[int] = None
    baseline: Optional[object] = None
    significant: bool = False
    children: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))
        if self.children:
            if len(self.children) != 2:
                raise ValueError("a segment node has zero or two children")
            left, right = self.children
            if self.split_after is None:
                raise ValueError("internal node needs split_after")
            expected = self.span.split(self.split_after)
            if (left.span, right.span) != expected:
                raise ValueError("children do not partition the parent span")
            if not self.significant:
                raise ValueError("only significant nodes may have children")
            if self.span.length < 2:
                raise ValueError("a single position cannot be split")
        if self.d_max is not None and self.d_max < 0:
            raise ValueError("d_max must be nonnegative")

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def leaves(self) -> list["SegmentNode"]:
        if self.is_leaf:
            return [self]
        return self.children[0].leaves() + self.children[1].leaves()

    def walk(self):
        """Yield ``(depth, node)`` in pre-order."""
        stack = [(0, self)]
        while stack:
            depth, node = stack.pop()
            yield depth, node
            for child in reversed(node.children):
                stack.append((depth + 1, child))

    def boundaries(self) -> list[int]:
        """Absolute split positions (count of positions left of each cut), sorted."""
        return sorted(
            node.span.start + node.split_after
            for _, node in self.walk()
            if node.children
        )

    def levels(self) -> list[list[int]]:
        """Absolute split positions grouped by depth, each level left to right."""
        out: list[list[int]] = []
        for depth, node in self.walk():
            if not node.children:
                continue
            while len(out) <= depth:
                out.append([])
            out[depth].append(node.span.start + node.split_after)
        return out


def build_alphabet(tokens: Iterable[str]) -> Alphabet:
    """Distinct tokens in order of first appearance."""
    seen: dict[str, None] = {}
    for tok in tokens:
        seen.setdefault(tok, None)
    if not seen:
        raise ValueError("empty sequence")
    return Alphabet(tuple(seen))


def one_hot(
    tokens: Sequence[str],
    alphabet: Optional[Alphabet] = None,
    position_labels=None,
) -> WeightedSequence:
    """One count of ``token_t`` at each position ``t``."""
    tokens = list(tokens)
    if alphabet is None:
        alphabet = build_alphabet(tokens)
    if not tokens:
        raise ValueError("empty sequence")
    idx = np.empty(len(tokens), dtype=np.int64)
    for t, tok in enumerate(tokens):
        if tok not in alphabet:
            raise ValueError(f"unknown token {tok!r} at position {t}")
        idx[t] = alphabet.index(tok)
    counts = np.zeros((len(tokens), alphabet.k), dtype=np.int64)
    counts[np.arange(len(tokens)), idx] = 1
    return WeightedSequence(alphabet, counts, position_labels)


def tally(seq: WeightedSequence, span: Optional[Span] = None) -> np.ndarray:
    """Componentwise integer sum of the count vectors over ``span``."""
    if span is None:
        span = seq.full_span
    if span.end > len(seq):
        raise ValueError(
            f"span [{span.start}, {span.end}) exceeds sequence length {len(seq)}"
        )
    return seq.counts[span.start : span.end].sum(axis=0)


# -- file formats -----------------------------------------------------------


def parse_tokens(text: str) -> list[str]:
    """One symbol per line; blank lines and ``#`` comments are skipped."""
    out = []
    for line in text.splitlines():
        sym = line.strip()
        if not sym or sym.startswith("#"):
            continue
        out.append(sym)
    return out


def format_tokens(tokens: Iterable[str]) -> str:
    return "".join(f"{tok}\n" for tok in tokens)


def sequence_to_tokens(seq: WeightedSequence) -> list[str]:
    """Inverse of :func:`one_hot`; fails unless every position is one-hot."""
    rows = seq.counts
    if not (np.all(rows.sum(axis=1) == 1)):
        raise ValueError("sequence is not one-hot")
    labels = seq.alphabet.labels
    return [labels[i] for i in rows.argmax(axis=1)]


def parse_counts(text: str, position_labels=None) -> WeightedSequence:
    """Read a ``counts`` TSV: a header of symbol labels, then one row per position."""
    rows = [r for r in csv.reader(io.StringIO(text), delimiter="\t") if r]
    if not rows:
        raise ValueError("counts file has no header")
    header = [h.strip() for h in rows[0]]
    alphabet = Alphabet(tuple(header))
    body = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != alphabet.k:
            raise ValueError(
                f"line {lineno}: expected {alphabet.k} columns, got {len(row)}"
            )
        try:
            body.append([int(x) for x in row])
        except ValueError:
            raise ValueError(f"line {lineno}: non-integer count") from None
    if not body:
        raise ValueError("empty sequence")
    return WeightedSequence(alphabet, np.array(body, dtype=np.int64), position_labels)


def format_counts(seq: WeightedSequence) -> str:
    lines = ["\t".join(seq.alphabet.labels)]
    lines.extend("\t".join(str(int(c)) for c in row) for row in seq.counts)
    return "\n".join(lines) + "\n"

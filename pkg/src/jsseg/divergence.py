"""Shannon entropy, weighted Jensen-Shannon divergence and split profiles.

All values are in bits. The profile over a span is computed from one pass of
integer prefix sums, processed in row chunks so memory stays bounded for long
sequences with large alphabets.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from jsseg.core import Span, WeightedSequence

WEIGHT_MODES = ("positions", "mass")

_CHUNK_ELEMENTS = 1 << 15  # cache-sized; larger chunks are slower


def _check_distribution(p, name="p") -> np.ndarray:
    arr = np.asarray(p, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError(f"{name} must be a nonempty 1-D distribution")
    if np.any(arr < 0) or not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has negative or non-finite entries")
    if abs(arr.sum() - 1.0) > 1e-9:
        raise ValueError(f"{name} does not sum to 1 (sum={arr.sum()!r})")
    return arr


def _entropy_rows(p: np.ndarray) -> np.ndarray:
    # 0 log 0 := 0
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0, p * np.log2(p), 0.0)
    return -terms.sum(axis=-1)


def _js_rows(f: np.ndarray, g: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Row-wise divergence for distributions ``f``, ``g`` and left weights ``w``."""
    w = np.asarray(w, dtype=np.float64)
    # Written relative to g so that f == g gives exactly 0.
    mix = g + w[..., None] * (f - g)
    h_g = _entropy_rows(g)
    d = (_entropy_rows(mix) - h_g) - w * (_entropy_rows(f) - h_g)
    return np.maximum(d, 0.0)


def shannon_entropy(p) -> float:
    """Entropy ``-sum p_i log2 p_i`` of a distribution, in bits."""
    return float(_entropy_rows(_check_distribution(p)))


def jensen_shannon(p, q, w_p: float = 0.5) -> float:
    """Weighted Jensen-Shannon divergence in bits.

    ``H[w_p p + w_q q] - w_p H[p] - w_q H[q]`` with ``w_q = 1 - w_p``. Rounding
    residue below zero is clamped.
    """
    p = _check_distribution(p, "p")
    q = _check_distribution(q, "q")
    if p.shape != q.shape:
        raise ValueError("p and q must have the same length")
    if not 0.0 <= w_p <= 1.0:
        raise ValueError("w_p must lie in [0, 1]")
    # canonical argument order, so swapping (p, w_p) with (q, 1 - w_p) is exact
    if w_p > 0.5 or (w_p == 0.5 and tuple(p) > tuple(q)):
        p, q, w_p = q, p, 1.0 - w_p
    return float(_js_rows(p[None, :], q[None, :], np.array([w_p]))[0])


@dataclass(frozen=True)
class SplitProfile:
    """Divergence for every interior split of a span.

    ``n[i]`` is the number of positions left of split ``i`` (1..L-1) and
    ``d[i]`` the divergence there.
    """

    span: Span
    n: np.ndarray
    d: np.ndarray
    weight_mode: str = "positions"

    def __len__(self):
        return len(self.d)

    @property
    def values(self) -> list[tuple[int, float]]:
        return [(int(n), float(d)) for n, d in zip(self.n, self.d)]


def _check_span(seq: WeightedSequence, span: Optional[Span]) -> Span:
    if span is None:
        return seq.full_span
    if span.end > len(seq):
        raise ValueError(
            f"span [{span.start}, {span.end}) exceeds sequence length {len(seq)}"
        )
    return span


def _xlogx_table(max_count: int) -> np.ndarray:
    c = np.arange(max_count + 1, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(c > 0, c * np.log2(c), 0.0)


def profile_values(counts: np.ndarray, weight_mode: str = "positions") -> np.ndarray:
    """Interior-split divergences for a raw ``(L, k)`` count block.

    Returns an array of length ``L - 1``; entry ``i`` is the split after
    ``i + 1`` positions.
    """
    if weight_mode not in WEIGHT_MODES:
        raise ValueError(f"weight_mode must be one of {WEIGHT_MODES}")
    counts = np.asarray(counts)
    L, k = counts.shape
    if L < 2:
        raise ValueError("span too short to split")
    total = counts.sum(axis=0, dtype=np.int64)
    total_mass = int(total.sum())
    out = np.zeros(L - 1, dtype=np.float64)
    if total_mass == 0:
        return out

    # Side entropies use H = log2(m) - sum(c log2 c) / m over integer counts.
    xlogx = _xlogx_table(int(total.max()))
    row_mass = counts.sum(axis=1, dtype=np.int64)
    # With equal mass per position (or mass weighting) the mixture is the
    # span composition for every split.
    constant_mix = weight_mode == "mass" or bool(np.all(row_mass == row_mass[0]))
    if constant_mix:
        h_mix_const = float(_entropy_rows(total / total_mass))

    chunk = max(1, _CHUNK_ELEMENTS // max(k, 1))
    carry = np.zeros(k, dtype=np.int64)
    for lo in range(0, L - 1, chunk):
        hi = min(lo + chunk, L - 1)
        left = np.cumsum(counts[lo:hi], axis=0, dtype=np.int64)
        left += carry
        carry = left[-1].copy()
        right = total - left
        m_left = left.sum(axis=1)
        m_right = total_mass - m_left
        ok = (m_left > 0) & (m_right > 0)
        if not ok.any():
            continue
        left, right = left[ok], right[ok]
        m_left, m_right = m_left[ok], m_right[ok]
        ml = m_left.astype(np.float64)
        mr = m_right.astype(np.float64)
        h_f = np.log2(ml) - xlogx[left].sum(axis=1) / ml
        h_g = np.log2(mr) - xlogx[right].sum(axis=1) / mr
        if weight_mode == "positions":
            w = np.arange(lo + 1, hi + 1, dtype=np.float64)[ok] / L
        else:
            w = ml / total_mass
        if constant_mix:
            h_mix = h_mix_const
        else:
            f = left / ml[:, None]
            g = right / mr[:, None]
            h_mix = _entropy_rows(g + w[:, None] * (f - g))
        d = (h_mix - h_g) - w * (h_f - h_g)
        # identical compositions on both sides score exactly 0
        tiny = np.flatnonzero(d < 1e-9)
        if tiny.size:
            same = np.all(
                left[tiny] * m_right[tiny, None] == right[tiny] * m_left[tiny, None],
                axis=1,
            )
            d[tiny[same]] = 0.0
        out[lo:hi][ok] = np.maximum(d, 0.0)
    return out


def split_profile(
    seq: WeightedSequence,
    span: Optional[Span] = None,
    weight_mode: str = "positions",
) -> SplitProfile:
    """Divergence between left and right compositions at every split of ``span``.

    In ``positions`` mode the left weight is ``n / L``; in ``mass`` mode it is
    the left share of the span's total count. A split with an empty (zero
    mass) side scores 0.
    """
    span = _check_span(seq, span)
    if span.length < 2:
        raise ValueError("span too short to split")
    d = profile_values(seq.counts[span.start : span.end], weight_mode)
    n = np.arange(1, span.length, dtype=np.int64)
    d.setflags(write=False)
    n.setflags(write=False)
    return SplitProfile(span=span, n=n, d=d, weight_mode=weight_mode)

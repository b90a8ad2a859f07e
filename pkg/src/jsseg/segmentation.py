"""Split selection, shuffle baseline and the recursive segmentation driver."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields
from typing import Optional

import numpy as np

from jsseg.core import SegmentNode, Span, WeightedSequence
from jsseg.divergence import WEIGHT_MODES, SplitProfile, profile_values, split_profile

#: Recorded in run metadata so shuffles can be reproduced elsewhere.
GENERATOR_NAME = f"numpy.random.Philox+SeedSequence(seed,start,end,replicate)/numpy-{np.__version__}"

_UINT64_MAX = (1 << 64) - 1


@dataclass(frozen=True)
class BaselineStats:
    """Mean and dispersion of split divergences over shuffled copies of a span."""

    mean: float
    sigma: float
    replicates: int
    seed: int

    def __post_init__(self):
        if self.mean < 0 or self.sigma < 0:
            raise ValueError("baseline mean and sigma must be nonnegative")
        if self.replicates < 1:
            raise ValueError("replicates must be positive")

    @property
    def upper(self) -> float:
        return self.mean + self.sigma


@dataclass(frozen=True)
class SegmentationConfig:
    min_split_length: int = 3
    threshold_multiplier: float = 1.0
    shuffle_replicates: int = 10
    seed: int = 42
    max_depth: int = 32
    weight_mode: str = "positions"

    def __post_init__(self):
        if int(self.min_split_length) != self.min_split_length or self.min_split_length < 2:
            raise ValueError("min_split_length must be an integer >= 2")
        if not (self.threshold_multiplier >= 0 and math.isfinite(self.threshold_multiplier)):
            raise ValueError("threshold_multiplier must be a finite real >= 0")
        if int(self.shuffle_replicates) != self.shuffle_replicates or self.shuffle_replicates < 1:
            raise ValueError("shuffle_replicates must be an integer >= 1")
        if int(self.seed) != self.seed or not 0 <= self.seed <= _UINT64_MAX:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if int(self.max_depth) != self.max_depth or self.max_depth < 1:
            raise ValueError("max_depth must be an integer >= 1")
        if self.weight_mode not in WEIGHT_MODES:
            raise ValueError(f"weight_mode must be one of {WEIGHT_MODES}")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["threshold_multiplier"] = float(d["threshold_multiplier"])
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SegmentationConfig":
        names = {f.name for f in fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)


def best_split(profile) -> tuple[int, float]:
    """Leftmost split attaining the maximum divergence, as ``(n_max, d_max)``.

    Accepts a :class:`SplitProfile` or a plain sequence of values for
    ``n = 1, 2, ...``.
    """
    if isinstance(profile, SplitProfile):
        n, d = profile.n, profile.d
    else:
        d = np.asarray(profile, dtype=np.float64)
        n = np.arange(1, d.size + 1)
    if d.size == 0:
        raise ValueError("empty profile")
    i = int(np.argmax(d))
    return int(n[i]), float(d[i])


def _replicate_rng(seed: int, span: Span, replicate: int) -> np.random.Generator:
    ss = np.random.SeedSequence([seed, span.start, span.end, replicate])
    return np.random.Generator(np.random.Philox(ss))


def _shuffled_values(block, weight_mode, seed, span, r):
    rng = _replicate_rng(seed, span, r)
    perm = rng.permutation(block.shape[0])
    return profile_values(block[perm], weight_mode)


def shuffle_baseline(
    seq: WeightedSequence,
    span: Optional[Span] = None,
    config: Optional[SegmentationConfig] = None,
    executor=None,
) -> BaselineStats:
    """Pooled mean and dispersion of the split profile over shuffled copies.

    Each replicate permutes the span's whole positions with its own stream,
    derived from ``(seed, span.start, span.end, replicate)``, so the result
    does not depend on evaluation order.
    """
    config = config or SegmentationConfig()
    if span is None:
        span = seq.full_span
    if span.end > len(seq):
        raise ValueError("span exceeds sequence length")
    if span.length < 2:
        raise ValueError("span too short to split")
    block = seq.counts[span.start : span.end]
    args = [
        (block, config.weight_mode, config.seed, span, r)
        for r in range(config.shuffle_replicates)
    ]
    if executor is None:
        pooled = [_shuffled_values(*a) for a in args]
    else:
        pooled = list(executor.map(lambda a: _shuffled_values(*a), args))
    values = np.concatenate(pooled)
    mean = float(values.mean())
    sigma = float(np.sqrt(np.mean((values - mean) ** 2)))
    return BaselineStats(
        mean=max(mean, 0.0),
        sigma=sigma,
        replicates=config.shuffle_replicates,
        seed=config.seed,
    )


def _segment(seq, span, config, depth, executor):
    if span.length < config.min_split_length or depth >= config.max_depth:
        return SegmentNode(span=span)
    profile = split_profile(seq, span, config.weight_mode)
    n_max, d_max = best_split(profile)
    baseline = shuffle_baseline(seq, span, config, executor)
    significant = d_max > baseline.mean + config.threshold_multiplier * baseline.sigma
    if not significant:
        return SegmentNode(span=span, d_max=d_max, baseline=baseline)
    left, right = span.split(n_max)
    children = (
        _segment(seq, left, config, depth + 1, executor),
        _segment(seq, right, config, depth + 1, executor),
    )
    return SegmentNode(
        span=span,
        d_max=d_max,
        split_after=n_max,
        baseline=baseline,
        significant=True,
        children=children,
    )


def segment(
    seq: WeightedSequence,
    span: Optional[Span] = None,
    config: Optional[SegmentationConfig] = None,
    n_jobs: int = 1,
) -> SegmentNode:
    """Recursively split ``span`` at maximal divergence while the split is significant.

    A node is split when ``d_max > mean + t * sigma`` of its shuffle baseline.
    Spans shorter than ``config.min_split_length`` and nodes at
    ``config.max_depth`` are left unevaluated. ``n_jobs`` only changes how
    shuffle replicates are scheduled; the tree is identical for any value.
    """
    config = config or SegmentationConfig()
    if span is None:
        span = seq.full_span
    if span.end > len(seq):
        raise ValueError("span exceeds sequence length")
    if n_jobs is None or n_jobs <= 1:
        return _segment(seq, span, config, 0, None)
    with ThreadPoolExecutor(max_workers=n_jobs) as pool:
        return _segment(seq, span, config, 0, pool)

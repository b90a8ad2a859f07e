"""Compositional segmentation of symbolic sequences by Jensen-Shannon divergence."""

from jsseg.core import (
    Alphabet,
    SegmentNode,
    Span,
    WeightedSequence,
    build_alphabet,
    one_hot,
    tally,
)
from jsseg.divergence import (
    SplitProfile,
    jensen_shannon,
    shannon_entropy,
    split_profile,
)
from jsseg.estimator import JSSegmenter
from jsseg.segmentation import (
    BaselineStats,
    SegmentationConfig,
    best_split,
    segment,
    shuffle_baseline,
)

__version__ = "0.1.0"

__all__ = [
    "Alphabet",
    "BaselineStats",
    "JSSegmenter",
    "SegmentNode",
    "SegmentationConfig",
    "Span",
    "SplitProfile",
    "WeightedSequence",
    "best_split",
    "build_alphabet",
    "jensen_shannon",
    "one_hot",
    "segment",
    "shannon_entropy",
    "shuffle_baseline",
    "split_profile",
    "tally",
]

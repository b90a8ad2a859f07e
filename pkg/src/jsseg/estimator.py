"""scikit-learn style front end for recursive divergence segmentation."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from jsseg.core import Alphabet, WeightedSequence, one_hot
from jsseg.divergence import split_profile
from jsseg.segmentation import SegmentationConfig, segment


def check_sequence(X, alphabet=None) -> WeightedSequence:
    """Coerce ``X`` into a :class:`WeightedSequence`.

    ``X`` may already be a WeightedSequence, a 1-D sequence of symbol strings
    (one-hot encoded, alphabet by first appearance), or a 2-D array of
    nonnegative integer counts with shape ``(n_positions, n_symbols)``.
    """
    if isinstance(X, WeightedSequence):
        return X
    if isinstance(X, str):
        raise TypeError("pass a sequence of symbols, not a single string")
    arr = np.asarray(X, dtype=object) if not hasattr(X, "dtype") else np.asarray(X)
    if arr.ndim == 1:
        return one_hot([str(t) for t in arr], alphabet)
    counts = check_array(X, dtype="numeric", ensure_min_samples=1)
    if alphabet is None:
        alphabet = Alphabet(tuple(str(i) for i in range(counts.shape[1])))
    return WeightedSequence(alphabet, counts)


class JSSegmenter(BaseEstimator):
    """Segment a symbolic sequence into compositionally divergent domains.

    The sequence is cut recursively where the Jensen-Shannon divergence
    between the left and right symbol frequencies is largest, as long as that
    maximum exceeds ``mean + threshold_multiplier * sigma`` of the same
    profile on shuffled copies.

    Parameters
    ----------
    min_split_length : int, default=3
        Spans shorter than this are never split.
    threshold_multiplier : float, default=1.0
        Multiplier on the shuffle dispersion in the significance test.
    shuffle_replicates : int, default=10
        Number of shuffled copies pooled per node.
    seed : int, default=42
        Root of every shuffle stream.
    max_depth : int, default=32
        Maximum number of segmentation levels.
    weight_mode : {"positions", "mass"}, default="positions"
        How the two sides are weighted in the divergence.
    n_jobs : int, default=1
        Worker threads for shuffle replicates. Does not affect results.

    Attributes
    ----------
    sequence_ : WeightedSequence
    tree_ : SegmentNode
    change_points_ : ndarray of int
        Sorted absolute cut positions (number of positions left of each cut).
    labels_ : ndarray of int
        Segment index of every position.

    Examples
    --------
    >>> seg = JSSegmenter().fit(list("AAAABBBB"))
    >>> seg.change_points_.tolist()
    [4]
    >>> seg.labels_.tolist()
    [0, 0, 0, 0, 1, 1, 1, 1]
    """

    def __init__(
        self,
        min_split_length=3,
        threshold_multiplier=1.0,
        shuffle_replicates=10,
        seed=42,
        max_depth=32,
        weight_mode="positions",
        n_jobs=1,
    ):
        self.min_split_length = min_split_length
        self.threshold_multiplier = threshold_multiplier
        self.shuffle_replicates = shuffle_replicates
        self.seed = seed
        self.max_depth = max_depth
        self.weight_mode = weight_mode
        self.n_jobs = n_jobs

    def _config(self) -> SegmentationConfig:
        return SegmentationConfig(
            min_split_length=self.min_split_length,
            threshold_multiplier=self.threshold_multiplier,
            shuffle_replicates=self.shuffle_replicates,
            seed=self.seed,
            max_depth=self.max_depth,
            weight_mode=self.weight_mode,
        )

    def fit(self, X, y=None):
        self.config_ = self._config()
        self.sequence_ = check_sequence(X)
        self.alphabet_ = self.sequence_.alphabet
        self.n_positions_ = len(self.sequence_)
        self.tree_ = segment(self.sequence_, None, self.config_, n_jobs=self.n_jobs)
        self.change_points_ = np.asarray(self.tree_.boundaries(), dtype=np.int64)
        labels = np.zeros(self.n_positions_, dtype=np.int64)
        for i, leaf in enumerate(self.tree_.leaves()):
            labels[leaf.span.start : leaf.span.end] = i
        self.labels_ = labels
        return self

    def fit_predict(self, X, y=None):
        return self.fit(X).labels_

    def predict(self, X=None):
        """Segment labels of the fitted sequence.

        Segmentation is transductive; ``X`` is accepted for API symmetry and
        must have the fitted length if given.
        """
        check_is_fitted(self, "tree_")
        if X is not None and len(X) != self.n_positions_:
            raise ValueError(
                f"X has {len(X)} positions, fitted sequence has {self.n_positions_}"
            )
        return self.labels_

    def profile(self, span=None):
        """Split profile of ``span`` (default the whole fitted sequence)."""
        check_is_fitted(self, "tree_")
        return split_profile(self.sequence_, span, self.weight_mode)

    def segment_compositions(self) -> np.ndarray:
        """Per-segment symbol frequencies, shape ``(n_segments, k)``."""
        check_is_fitted(self, "tree_")
        rows = []
        for leaf in self.tree_.leaves():
            c = self.sequence_.counts[leaf.span.start : leaf.span.end].sum(axis=0)
            m = c.sum()
            rows.append(c / m if m else np.zeros_like(c, dtype=np.float64))
        return np.asarray(rows, dtype=np.float64)

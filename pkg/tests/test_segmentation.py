import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import enumerate_baseline

from jsseg.core import Alphabet, SegmentNode, Span, WeightedSequence, one_hot
from jsseg.divergence import split_profile
from jsseg.segmentation import (
    SegmentationConfig,
    best_split,
    segment,
    shuffle_baseline,
)


def test_best_split():
    assert best_split([0.311278, 1.0, 0.311278]) == (2, 1.0)
    assert best_split([0.5, 0.5]) == (1, 0.5)
    with pytest.raises(ValueError):
        best_split([])


def test_best_split_profile_uses_n():
    prof = split_profile(one_hot(list("ABABBBBB")), Span(2, 8))
    n, d = best_split(prof)
    assert n == int(prof.n[np.argmax(prof.d)])


def test_baseline_constant():
    b = shuffle_baseline(one_hot(list("AAAA")))
    assert (b.mean, b.sigma) == (0.0, 0.0)


def test_baseline_two_positions():
    # both orderings of "AB" give D = 1 at the only split
    assert enumerate_baseline([[1, 0], [0, 1]]) == (1.0, 0.0)
    b = shuffle_baseline(one_hot(list("AB")))
    assert (b.mean, b.sigma) == (1.0, 0.0)


def test_baseline_converges_to_enumeration():
    rows = [[1, 0], [1, 0], [0, 1], [0, 1]]
    mean, sigma = enumerate_baseline(rows)
    seq = WeightedSequence(Alphabet(("A", "B")), rows)
    b = shuffle_baseline(seq, None, SegmentationConfig(shuffle_replicates=4000))
    assert b.mean == pytest.approx(mean, abs=0.01)
    assert b.sigma == pytest.approx(sigma, abs=0.01)


def test_baseline_deterministic_and_seeded():
    seq = one_hot(list("ABCABBBCCAACBABCBBACAB"))
    cfg = SegmentationConfig(seed=7)
    assert shuffle_baseline(seq, None, cfg) == shuffle_baseline(seq, None, cfg)
    assert shuffle_baseline(seq, None, cfg) != shuffle_baseline(
        seq, None, SegmentationConfig(seed=8)
    )


def test_baseline_too_short():
    with pytest.raises(ValueError):
        shuffle_baseline(one_hot(list("AB")), Span(0, 1))


def test_config_bounds():
    for bad in (
        dict(min_split_length=1),
        dict(threshold_multiplier=-1),
        dict(shuffle_replicates=0),
        dict(seed=-1),
        dict(seed=1 << 64),
        dict(max_depth=0),
        dict(weight_mode="bars"),
    ):
        with pytest.raises(ValueError):
            SegmentationConfig(**bad)
    cfg = SegmentationConfig(seed=(1 << 64) - 1)
    assert SegmentationConfig.from_dict(cfg.to_dict()) == cfg


def test_segment_disjoint_halves():
    root = segment(one_hot(list("AAAABBBB")))
    assert root.split_after == 4 and root.d_max == 1.0 and root.significant
    for child in root.children:
        assert child.is_leaf and child.d_max == 0.0
        assert (child.baseline.mean, child.baseline.sigma) == (0.0, 0.0)
        assert not child.significant


def test_segment_constant_is_single_leaf():
    root = segment(one_hot(["X"] * 50))
    assert root.is_leaf and root.d_max == 0.0 and not root.significant
    assert (root.baseline.mean, root.baseline.sigma) == (0.0, 0.0)


def test_short_spans_not_evaluated():
    root = segment(one_hot(list("AB")))
    assert root.is_leaf and root.d_max is None and root.baseline is None


def test_max_depth_limits_levels():
    tokens = list("A" * 20 + "B" * 20 + "C" * 20 + "D" * 20)
    root = segment(one_hot(tokens), None, SegmentationConfig(max_depth=1))
    assert root.boundaries() == [root.split_after]
    full = segment(one_hot(tokens))
    assert full.boundaries() == [20, 40, 60]


def _random_seq(rng, n, k):
    return one_hot([f"s{i}" for i in rng.integers(0, k, n)])


def _assert_tiles(root, n):
    leaves = root.leaves()
    assert leaves[0].span.start == 0 and leaves[-1].span.end == n
    for a, b in zip(leaves, leaves[1:]):
        assert a.span.end == b.span.start


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.integers(3, 120), st.integers(1, 5))
def test_tree_well_formed(seed, n, k):
    rng = np.random.default_rng(seed)
    seq = _random_seq(rng, n, k)
    cfg = SegmentationConfig(seed=seed, threshold_multiplier=0.0, shuffle_replicates=2)
    root = segment(seq, None, cfg)
    _assert_tiles(root, n)
    for _, node in root.walk():
        if node.children:
            assert node.span.length >= cfg.min_split_length
            assert node.d_max > node.baseline.mean


def _is_prefix_subtree(small: SegmentNode, big: SegmentNode) -> bool:
    if small.span != big.span:
        return False
    if not small.children:
        return True
    if small.split_after != big.split_after or not big.children:
        return False
    return all(_is_prefix_subtree(a, b) for a, b in zip(small.children, big.children))


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000), st.floats(0, 2), st.floats(0, 2))
def test_threshold_monotone(seed, t1, t2):
    t1, t2 = sorted((t1, t2))
    rng = np.random.default_rng(seed)
    seq = _random_seq(rng, 150, 3)
    lo = segment(seq, None, SegmentationConfig(threshold_multiplier=t1, seed=seed))
    hi = segment(seq, None, SegmentationConfig(threshold_multiplier=t2, seed=seed))
    assert _is_prefix_subtree(hi, lo)


def test_disjoint_support_boundary_exact():
    rng = np.random.default_rng(11)
    for run in range(20):
        left = [f"a{i}" for i in rng.integers(0, 3, 300)]
        right = [f"b{i}" for i in rng.integers(0, 3, 200)]
        root = segment(one_hot(left + right), None, SegmentationConfig(seed=run, max_depth=1))
        assert root.split_after == 300


def test_mass_mode_segments():
    rows = [[3, 0, 1]] * 10 + [[0, 4, 1]] * 10
    seq = WeightedSequence(Alphabet(("x", "y", "z")), rows)
    root = segment(seq, None, SegmentationConfig(weight_mode="mass"))
    assert root.split_after == 10


def test_thread_count_does_not_change_tree():
    rng = np.random.default_rng(5)
    seq = _random_seq(rng, 400, 4)
    assert segment(seq, n_jobs=1) == segment(seq, n_jobs=4)

"""Patch grid geometry and the extract/embed adjoint pair."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nonllrtv import ConfigurationError, average_embed, build_patch_grid, embed_accumulate, extract_patch
from nonllrtv.patches import accumulate_all, extract_all


def test_exact_tiling_single_patch():
    grid = build_patch_grid(4, 4, 4, 4, stride=4)
    assert grid.anchors == ((0, 0),)
    assert np.array_equal(grid.coverage, np.ones((4, 4), dtype=np.int64))


def test_even_overlap_anchors():
    grid = build_patch_grid(6, 6, 4, 4, stride=2)
    assert grid.anchors == ((0, 0), (0, 2), (2, 0), (2, 2))
    # the centre 2x2 block is covered by all four windows
    assert grid.coverage[2:4, 2:4].min() == 4
    assert grid.coverage.min() == 1


def test_border_clamp_appends_flush_anchor():
    grid = build_patch_grid(5, 5, 4, 4, stride=4)
    rows = sorted({a[0] for a in grid.anchors})
    cols = sorted({a[1] for a in grid.anchors})
    assert rows == [0, 1] and cols == [0, 1]


def test_default_stride_is_half_patch():
    grid = build_patch_grid(32, 32, 15, 15)
    assert (grid.stride_rows, grid.stride_cols) == (7, 7)
    rows = sorted({a[0] for a in grid.anchors})
    assert rows == [0, 7, 14, 17]


def test_patch_larger_than_image_rejected():
    with pytest.raises(ConfigurationError):
        build_patch_grid(4, 4, 5, 4, stride=1)


def test_bad_stride_rejected():
    with pytest.raises(ConfigurationError):
        build_patch_grid(4, 4, 2, 2, stride=0)


@settings(max_examples=40, deadline=None)
@given(
    m=st.integers(1, 12),
    n=st.integers(1, 12),
    pr=st.integers(1, 12),
    pc=st.integers(1, 12),
    sr=st.integers(1, 6),
    sc=st.integers(1, 6),
)
def test_coverage_matches_ones_embedding_and_is_positive(m, n, pr, pc, sr, sc):
    if pr > m or pc > n or sr > pr or sc > pc:
        with pytest.raises(ConfigurationError):
            build_patch_grid(m, n, pr, pc, stride=(sr, sc))
        return
    grid = build_patch_grid(m, n, pr, pc, stride=(sr, sc))
    # independent oracle: accumulate a ones patch at every anchor
    expected = np.zeros((m, n))
    for i, j in grid.anchors:
        expected[i : i + pr, j : j + pc] += 1.0
    assert np.array_equal(grid.coverage, expected)
    assert grid.coverage.min() >= 1
    assert all(i + pr <= m and j + pc <= n for i, j in grid.anchors)


def test_extract_constant_cube():
    grid = build_patch_grid(6, 5, 3, 2, stride=2)
    data = np.full((6, 5, 4), 0.7)
    patch = extract_patch(data, grid, grid.anchors[0])
    assert patch.shape == (6, 4)
    assert np.all(patch == 0.7)


def test_extract_matches_index_oracle():
    rng = np.random.default_rng(3)
    data = rng.random((7, 6, 3))
    grid = build_patch_grid(7, 6, 3, 4, stride=(2, 3))
    for anchor in grid.anchors:
        a, b = anchor
        patch = extract_patch(data, grid, anchor)
        for r in range(grid.patch_size):
            for k in range(3):
                assert patch[r, k] == data[a + r // 4, b + r % 4, k]


def test_extract_rejects_off_grid_anchor():
    grid = build_patch_grid(6, 6, 4, 4, stride=2)
    with pytest.raises(ValueError):
        extract_patch(np.zeros((6, 6, 2)), grid, (1, 1))


def test_embed_rejects_wrong_patch_shape():
    grid = build_patch_grid(6, 6, 4, 4, stride=2)
    with pytest.raises(ValueError):
        embed_accumulate(np.zeros((6, 6, 2)), grid, (0, 0), np.zeros((15, 2)))


def test_embed_places_and_accumulates():
    grid = build_patch_grid(6, 6, 4, 4, stride=2)
    target = np.zeros((6, 6, 1))
    ones = np.ones((16, 1))
    embed_accumulate(target, grid, (0, 0), ones)
    assert target[:4, :4, 0].min() == 1.0 and target[4:, :, 0].max() == 0.0
    embed_accumulate(target, grid, (2, 2), ones)
    assert target[2:4, 2:4, 0].min() == 2.0


def test_extract_embed_extract_reproduces():
    rng = np.random.default_rng(4)
    data = rng.random((8, 8, 2))
    grid = build_patch_grid(8, 8, 4, 4, stride=3)
    for anchor in grid.anchors:
        patch = extract_patch(data, grid, anchor)
        target = np.zeros_like(data)
        embed_accumulate(target, grid, anchor, patch)
        assert np.array_equal(extract_patch(target, grid, anchor), patch)


def test_extract_embed_adjoint_identity():
    rng = np.random.default_rng(5)
    m, n, p = 9, 7, 3
    data = rng.standard_normal((m, n, p))
    grid = build_patch_grid(m, n, 4, 3, stride=(3, 2))
    for anchor in grid.anchors:
        patch = rng.standard_normal((grid.patch_size, p))
        lhs = float(np.sum(extract_patch(data, grid, anchor) * patch))
        target = np.zeros((m, n, p))
        embed_accumulate(target, grid, anchor, patch)
        rhs = float(np.sum(data * target))
        scale = max(abs(lhs), abs(rhs), 1.0)
        assert abs(lhs - rhs) <= 1e-12 * scale


def test_average_embed_of_extractions_is_identity():
    rng = np.random.default_rng(6)
    data = rng.random((10, 9, 4))
    grid = build_patch_grid(10, 9, 4, 4, stride=3)
    fused = average_embed(extract_all(data, grid), grid)
    assert np.allclose(fused, data, rtol=0, atol=1e-14)


def test_accumulate_all_matches_loop():
    rng = np.random.default_rng(7)
    grid = build_patch_grid(8, 8, 4, 4, stride=2)
    patches = rng.standard_normal((len(grid.anchors), grid.patch_size, 3))
    fast = np.zeros((8, 8, 3))
    accumulate_all(fast, grid, patches)
    slow = np.zeros((8, 8, 3))
    for anchor, patch in zip(grid.anchors, patches):
        embed_accumulate(slow, grid, anchor, patch)
    assert np.array_equal(fast, slow)

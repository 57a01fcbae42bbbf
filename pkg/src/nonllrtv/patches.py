"""Overlapping spatial patch geometry and the extract/embed operator pair.

A patch grid tiles the m-by-n spatial plane with fixed-size windows
stepped by a stride.  When the stride does not land flush on the far
border, one extra anchor per axis is clamped so the last window ends
exactly at the border; every pixel is therefore covered at least once and
anchors never run past the image.

Extraction pulls one window through all bands into a ``(rows*cols, bands)``
matrix whose row order follows the cube scan order (column index fastest).
Embedding is the exact adjoint: it adds a patch matrix back into a cube at
its anchor.  Extraction is read-only and safe to run concurrently;
accumulating embeds into a shared target must be serialized, and the
solver keeps a fixed anchor order so sums are reproducible bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError

__all__ = [
    "PatchGrid",
    "build_patch_grid",
    "extract_patch",
    "embed_accumulate",
    "extract_all",
    "accumulate_all",
    "average_embed",
]


@dataclass(frozen=True, eq=False)
class PatchGrid:
    """Immutable description of one tiling: window size, anchors, coverage."""

    image_rows: int
    image_cols: int
    patch_rows: int
    patch_cols: int
    stride_rows: int
    stride_cols: int
    anchors: tuple[tuple[int, int], ...]
    coverage: np.ndarray
    _anchor_set: frozenset = field(repr=False)

    @property
    def patch_size(self) -> int:
        return self.patch_rows * self.patch_cols


def _axis_starts(extent: int, window: int, step: int) -> list[int]:
    starts = list(range(0, extent - window + 1, step))
    if starts[-1] != extent - window:
        starts.append(extent - window)
    return starts


def build_patch_grid(image_rows, image_cols, patch_rows, patch_cols, stride=None) -> PatchGrid:
    """Build the anchor set and coverage map for an overlapping tiling.

    Parameters
    ----------
    image_rows, image_cols : int
        Spatial extents of the cube.
    patch_rows, patch_cols : int
        Window size; must fit inside the image.
    stride : int, (int, int), or None
        Step between anchors per axis.  None means half the window size
        (at least 1), the default overlap.
    """
    if stride is None:
        stride_rows = max(patch_rows // 2, 1)
        stride_cols = max(patch_cols // 2, 1)
    elif isinstance(stride, (tuple, list)):
        stride_rows, stride_cols = stride
    else:
        stride_rows = stride_cols = stride

    for name, value in (
        ("image_rows", image_rows),
        ("image_cols", image_cols),
        ("patch_rows", patch_rows),
        ("patch_cols", patch_cols),
        ("stride_rows", stride_rows),
        ("stride_cols", stride_cols),
    ):
        if not isinstance(value, (int, np.integer)) or value < 1:
            raise ConfigurationError(f"{name} must be a positive integer, got {value!r}")
    if patch_rows > image_rows or patch_cols > image_cols:
        raise ConfigurationError(
            f"patch {patch_rows}x{patch_cols} does not fit in image {image_rows}x{image_cols}"
        )
    # a step wider than the window would leave pixels covered by no patch
    if stride_rows > patch_rows or stride_cols > patch_cols:
        raise ConfigurationError(
            f"stride ({stride_rows}, {stride_cols}) cannot exceed the patch size "
            f"({patch_rows}, {patch_cols})"
        )

    row_starts = _axis_starts(image_rows, patch_rows, stride_rows)
    col_starts = _axis_starts(image_cols, patch_cols, stride_cols)
    anchors = tuple((i, j) for i in row_starts for j in col_starts)

    coverage = np.zeros((image_rows, image_cols), dtype=np.int64)
    for i, j in anchors:
        coverage[i : i + patch_rows, j : j + patch_cols] += 1

    return PatchGrid(
        image_rows=int(image_rows),
        image_cols=int(image_cols),
        patch_rows=int(patch_rows),
        patch_cols=int(patch_cols),
        stride_rows=int(stride_rows),
        stride_cols=int(stride_cols),
        anchors=anchors,
        coverage=coverage,
        _anchor_set=frozenset(anchors),
    )


def _check_anchor(grid: PatchGrid, anchor) -> tuple[int, int]:
    anchor = (int(anchor[0]), int(anchor[1]))
    if anchor not in grid._anchor_set:
        raise ValueError(f"anchor {anchor} is not on the grid")
    return anchor


def extract_patch(data, grid: PatchGrid, anchor) -> np.ndarray:
    """Copy the window at ``anchor`` out of a cube as a (patch_size, bands) matrix."""
    i, j = _check_anchor(grid, anchor)
    block = data[i : i + grid.patch_rows, j : j + grid.patch_cols, :]
    return np.ascontiguousarray(block).reshape(grid.patch_size, data.shape[2])


def embed_accumulate(target, grid: PatchGrid, anchor, patch) -> None:
    """Add a patch matrix into ``target`` at ``anchor`` (adjoint of extraction)."""
    i, j = _check_anchor(grid, anchor)
    patch = np.asarray(patch)
    bands = target.shape[2]
    if patch.shape != (grid.patch_size, bands):
        raise ValueError(f"patch shape {patch.shape} does not match ({grid.patch_size}, {bands})")
    target[i : i + grid.patch_rows, j : j + grid.patch_cols, :] += patch.reshape(
        grid.patch_rows, grid.patch_cols, bands
    )


def extract_all(data, grid: PatchGrid) -> np.ndarray:
    """Stack every patch of a cube into a (num_patches, patch_size, bands) array."""
    return np.stack([extract_patch(data, grid, a) for a in grid.anchors])


def accumulate_all(target, grid: PatchGrid, patches) -> None:
    """Add a full patch stack into ``target``, one anchor at a time in grid order."""
    if len(patches) != len(grid.anchors):
        raise ValueError(f"expected {len(grid.anchors)} patches, got {len(patches)}")
    for anchor, patch in zip(grid.anchors, patches):
        embed_accumulate(target, grid, anchor, patch)


def average_embed(patches, grid: PatchGrid, bands=None) -> np.ndarray:
    """Fuse a patch stack into a cube by coverage-weighted averaging.

    Overlapping contributions are summed and divided by how many windows
    cover each pixel, so a stack of extractions of one cube fuses back to
    exactly that cube.
    """
    patches = np.asarray(patches)
    if bands is None:
        bands = patches.shape[-1]
    out = np.zeros((grid.image_rows, grid.image_cols, bands))
    accumulate_all(out, grid, patches)
    out /= grid.coverage[:, :, None]
    return out

"""Weighted periodic forward differences along the three cube modes.

The gradient field stacks three components of cube shape: component 0
differences along the spectral axis, component 1 along spatial columns,
component 2 along spatial rows, each scaled by its own weight.  All
differences wrap around (periodic boundary), which keeps every component
the same shape as the source and makes the operators circulant: the
normal-equation system ``(I + D^T D) X = B`` is diagonal in the 3-D
Fourier basis, so it is solved exactly by one forward and one inverse FFT.

The spatial-spectral total variation of a cube is the plain L1 norm of
this gradient field.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import ConfigurationError

__all__ = [
    "DiffWeights",
    "forward_diff",
    "adjoint_diff",
    "sstv_value",
    "build_fft_denominator",
    "fft_solve",
]


class DiffWeights(NamedTuple):
    """Per-mode difference weights: spectral, spatial columns, spatial rows."""

    spectral: float = 1.0
    cols: float = 1.0
    rows: float = 0.5


# numpy axis differenced by each gradient-field component, in stack order.
MODE_AXES = (2, 1, 0)


def check_weights(weights) -> DiffWeights:
    weights = DiffWeights(*weights)
    if not all(np.isfinite(w) and w >= 0 for w in weights):
        raise ConfigurationError(f"difference weights must be finite and nonnegative, got {weights}")
    if not any(w > 0 for w in weights):
        raise ConfigurationError("at least one difference weight must be positive")
    return weights


def forward_diff(x, weights) -> np.ndarray:
    """Weighted periodic forward differences of a cube, stacked as (3, m, n, p)."""
    weights = check_weights(weights)
    x = np.asarray(x, dtype=np.float64)
    out = np.empty((3,) + x.shape)
    for t, (axis, w) in enumerate(zip(MODE_AXES, weights)):
        out[t] = w * (x - np.roll(x, 1, axis=axis))
    return out


def adjoint_diff(field, weights) -> np.ndarray:
    """Exact adjoint of :func:`forward_diff`: negative weighted backward differences."""
    weights = check_weights(weights)
    field = np.asarray(field, dtype=np.float64)
    if field.ndim != 4 or field.shape[0] != 3:
        raise ValueError(f"expected a (3, m, n, p) gradient field, got shape {field.shape}")
    out = np.zeros(field.shape[1:])
    for t, (axis, w) in enumerate(zip(MODE_AXES, weights)):
        out += w * (field[t] - np.roll(field[t], -1, axis=axis))
    return out


def sstv_value(x, weights) -> float:
    """Spatial-spectral total variation: L1 norm of the weighted gradient field."""
    return float(np.abs(forward_diff(x, weights)).sum())


def build_fft_denominator(dims, weights) -> np.ndarray:
    """Fourier symbol of ``I + D^T D`` on a cube of shape ``dims``.

    Each periodic difference contributes ``w**2 * (2 - 2cos(2*pi*f/N))``
    along its axis, so the symbol is real, at least 1 everywhere, and
    exactly 1 at the zero frequency (constants pass through untouched).
    """
    weights = check_weights(weights)
    m, n, p = dims
    denominator = np.ones((m, n, p))
    for axis, w in zip(MODE_AXES, weights):
        size = dims[axis]
        symbol = (w * w) * (2.0 - 2.0 * np.cos(2.0 * np.pi * np.arange(size) / size))
        shape = [1, 1, 1]
        shape[axis] = size
        denominator = denominator + symbol.reshape(shape)
    return denominator


def fft_solve(rhs, denominator) -> np.ndarray:
    """Solve ``(I + D^T D) X = rhs`` given the precomputed Fourier symbol."""
    rhs = np.asarray(rhs, dtype=np.float64)
    if rhs.shape != denominator.shape:
        raise ValueError(f"rhs shape {rhs.shape} does not match denominator {denominator.shape}")
    return np.fft.ifftn(np.fft.fftn(rhs) / denominator).real

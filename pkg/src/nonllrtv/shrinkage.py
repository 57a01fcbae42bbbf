"""Elementwise and singular-value shrinkage operators.

The low-rank penalty used on patch matrices is
``sum_t (1 - exp(-sigma_t / gamma))`` over singular values.  It saturates
at 1 per value, so the total is bounded by the matrix rank, and as
``gamma -> 0`` it counts the nonzero singular values.  Its gradient
``exp(-sigma / gamma) / gamma`` decays in sigma, which is what makes the
induced thresholding shrink small singular values hard while leaving the
dominant ones nearly untouched.  Replacing that weight by the constant 1
degenerates the same operator to classic singular-value thresholding, the
nuclear-norm proximal map.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError

__all__ = [
    "ShrinkageSpec",
    "soft_threshold",
    "gamma_norm",
    "gamma_norm_gradient",
    "wsvt",
]

MODE_NONCONVEX = "nonconvex_gamma"
MODE_NUCLEAR = "nuclear"


@dataclass(frozen=True)
class ShrinkageSpec:
    """How singular values are shrunk: penalty mode, scale, optional rank cap."""

    mode: str = MODE_NONCONVEX
    threshold_scale: float = 1.0
    rank_cap: int | None = None

    def __post_init__(self):
        if self.mode not in (MODE_NONCONVEX, MODE_NUCLEAR):
            raise ConfigurationError(f"unknown shrinkage mode {self.mode!r}")
        if not (np.isfinite(self.threshold_scale) and self.threshold_scale > 0):
            raise ConfigurationError(f"threshold_scale must be positive, got {self.threshold_scale!r}")
        if self.rank_cap is not None and (not isinstance(self.rank_cap, (int, np.integer)) or self.rank_cap < 1):
            raise ConfigurationError(f"rank_cap must be a positive integer or None, got {self.rank_cap!r}")


def soft_threshold(values, level):
    """Shrink values toward zero by ``level``: sign(v) * max(|v| - level, 0).

    Works elementwise on arrays of any shape.  This is the proximal map of
    ``level * |v|``, so each output minimizes
    ``level * |u| + (u - v)**2 / 2`` exactly.
    """
    if level < 0:
        raise ConfigurationError(f"threshold level must be nonnegative, got {level!r}")
    values = np.asarray(values)
    return np.sign(values) * np.maximum(np.abs(values) - level, 0.0)


def _check_gamma(gamma):
    if not (np.isfinite(gamma) and gamma > 0):
        raise ConfigurationError(f"gamma must be a positive finite number, got {gamma!r}")


def gamma_norm(matrix, gamma):
    """Saturating low-rank penalty: sum of ``1 - exp(-sigma/gamma)`` over singular values.

    Always within [0, min(matrix dims)]; for gamma far below the smallest
    nonzero singular value it approaches the rank.  Accepts a stack of
    matrices, returning one value per matrix.
    """
    _check_gamma(gamma)
    sigma = np.linalg.svd(np.asarray(matrix, dtype=np.float64), compute_uv=False)
    total = (1.0 - np.exp(-sigma / gamma)).sum(axis=-1)
    return float(total) if np.ndim(total) == 0 else total


def gamma_norm_gradient(sigma, gamma):
    """Gradient of the saturating penalty at ``sigma``: exp(-sigma/gamma) / gamma.

    Decreasing in sigma; equals 1/gamma at zero.  Elementwise on arrays.
    """
    _check_gamma(gamma)
    return np.exp(-np.asarray(sigma, dtype=np.float64) / gamma) / gamma


def wsvt(values, spec: ShrinkageSpec, gamma, mu):
    """Weighted singular-value thresholding of a matrix (or stack of matrices).

    Takes the thin SVD and shrinks each singular value by
    ``threshold_scale * weight(sigma) / mu`` where the weight is the
    penalty gradient in nonconvex mode and 1 in nuclear mode, then zeroes
    everything past ``rank_cap`` if one is set.  Weights are evaluated at
    the input spectrum, so larger singular values always shrink less in
    nonconvex mode and the output spectrum stays ordered.

    SVD non-convergence propagates as ``numpy.linalg.LinAlgError``.
    """
    if not (np.isfinite(mu) and mu > 0):
        raise ConfigurationError(f"mu must be positive, got {mu!r}")
    values = np.asarray(values, dtype=np.float64)
    u, sigma, vt = np.linalg.svd(values, full_matrices=False)
    if spec.mode == MODE_NUCLEAR:
        weight = np.ones_like(sigma)
    else:
        weight = gamma_norm_gradient(sigma, gamma)
    shrunk = np.maximum(sigma - spec.threshold_scale * weight / mu, 0.0)
    if spec.rank_cap is not None:
        # numpy returns spectra sorted descending and the shrink map is
        # monotone, so truncating the tail keeps the rank_cap largest.
        shrunk[..., spec.rank_cap :] = 0.0
    return (u * shrunk[..., None, :]) @ vt

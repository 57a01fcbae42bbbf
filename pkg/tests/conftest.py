"""Shared fixtures and independent oracles.

The oracles here are deliberately naive re-implementations (index loops,
dense matrices, explicit SVDs) so the package's vectorized code is checked
against a second route, not against itself.
"""

import numpy as np


def make_synthetic(m=32, n=32, p=24):
    """Rank-3 piecewise-constant synthetic cube with values in [0, 1].

    Three smooth spectral signatures mixed by abundance maps that are
    constant on a handful of axis-aligned regions, so the flattened cube
    has rank 3 and every band is piecewise constant spatially.
    """
    bands = np.arange(p, dtype=np.float64)
    signatures = np.stack([
        0.20 + 0.75 * bands / max(p - 1, 1),
        0.15 + 0.80 * np.exp(-0.5 * ((bands - p / 3.0) / (p / 6.0)) ** 2),
        0.50 + 0.40 * np.cos(2.0 * np.pi * bands / p),
    ])
    abundance = np.zeros((m, n, 3))
    half_m, half_n = m // 2, n // 2
    abundance[:half_m, :half_n] = (0.90, 0.05, 0.05)
    abundance[:half_m, half_n:] = (0.10, 0.80, 0.10)
    abundance[half_m:, :half_n] = (0.20, 0.20, 0.60)
    abundance[half_m:, half_n:] = (0.34, 0.33, 0.33)
    quarter_m, quarter_n = m // 4, n // 4
    abundance[quarter_m : quarter_m + half_m, quarter_n : quarter_n + half_n] = (0.60, 0.30, 0.10)
    cube = abundance @ signatures
    assert cube.min() >= 0.0 and cube.max() <= 1.0
    return cube


def dense_diff_matrices(dims, weights):
    """The three periodic difference operators as dense matrices.

    Built purely from index arithmetic on the frozen scan order
    (row-major, column fastest within a band), one matrix row per voxel.
    """
    m, n, p = dims
    size = m * n * p

    def flat(i, j, k):
        return (i * n + j) * p + k

    previous = [
        lambda i, j, k: (i, j, (k - 1) % p),
        lambda i, j, k: (i, (j - 1) % n, k),
        lambda i, j, k: ((i - 1) % m, j, k),
    ]
    matrices = []
    for t in range(3):
        w = float(weights[t])
        mat = np.zeros((size, size))
        for i in range(m):
            for j in range(n):
                for k in range(p):
                    row = flat(i, j, k)
                    mat[row, flat(i, j, k)] += w
                    mat[row, flat(*previous[t](i, j, k))] -= w
        matrices.append(mat)
    return matrices


def dense_normal_matrix(dims, weights):
    """Dense I + sum_t D_t^T D_t for the same operators."""
    size = int(np.prod(dims))
    normal = np.eye(size)
    for mat in dense_diff_matrices(dims, weights):
        normal += mat.T @ mat
    return normal


def svt_oracle(matrix, threshold):
    """Textbook singular-value thresholding at a constant threshold."""
    u, sigma, vt = np.linalg.svd(matrix, full_matrices=False)
    return u @ np.diag(np.maximum(sigma - threshold, 0.0)) @ vt


def soft_oracle(values, level):
    return np.sign(values) * np.maximum(np.abs(values) - level, 0.0)


def rpca_alm_step(obs, sparse, dual, mu, lam):
    """One inexact augmented-Lagrangian robust-PCA sweep.

    Returns the new (low_rank, sparse) for the decomposition
    obs = low_rank + sparse: SVT of the dual-corrected residual at 1/mu,
    then soft thresholding of what is left at lam/mu.
    """
    low_rank = svt_oracle(obs - sparse + dual / mu, 1.0 / mu)
    new_sparse = soft_oracle(obs - low_rank + dual / mu, lam / mu)
    return low_rank, new_sparse


def prox_objective_scalar(u, target, weight_l1, weight_quad):
    """weight_l1 * |u| + (weight_quad / 2) * (u - target)**2."""
    return weight_l1 * abs(u) + 0.5 * weight_quad * (u - target) ** 2


def grid_min_objective(target, weight_l1, weight_quad, step=1e-4, span=None):
    """Brute-force minimum of the scalar prox objective on a grid."""
    if span is None:
        span = abs(target) + weight_l1 / weight_quad + 1.0
    grid = np.arange(-span, span + step, step)
    values = weight_l1 * np.abs(grid) + 0.5 * weight_quad * (grid - target) ** 2
    return float(values.min())

"""Alternating-direction solver for mixed-noise removal.

The model splits an observed cube O into overlapping patch matrices that
must each be low rank (saturating penalty) plus sparse (L1), ties the
patches together through a consensus cube J, and couples J to the output
cube X, which additionally pays a weighted L1 penalty on its periodic
spatial-spectral gradient through a split variable U = DX.  Scaled dual
variables enforce the four constraint families

    O_ij = L_ij + S_ij,   L_ij = J restricted to patch ij,
    J = X,                U = DX,

and one sweep updates, in order: every patch's (L, S) pair by weighted
singular-value thresholding and soft thresholding, J in closed form by
coverage-weighted averaging, X by an FFT solve of the gradient normal
equations, U by soft thresholding, then all multipliers, then the penalty
weight mu (geometric growth, capped).  All iterates start at zero.
Convergence is declared when both infinity-norm residuals, the patch fit
max|O_ij - L_ij - S_ij| and the consensus split max|J - X|, drop to the
tolerance.

Every step is deterministic: no randomness, a fixed patch order, and a
thread pool that only partitions the independent per-patch work, so
results are bit-identical across runs and thread counts.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .cube import as_cube_array
from .diffops import (
    DiffWeights,
    adjoint_diff,
    build_fft_denominator,
    check_weights,
    fft_solve,
    forward_diff,
)
from .errors import ConfigurationError, NumericalError
from .patches import (
    PatchGrid,
    accumulate_all,
    average_embed,
    build_patch_grid,
    extract_all,
)
from .shrinkage import (
    MODE_NONCONVEX,
    MODE_NUCLEAR,
    ShrinkageSpec,
    soft_threshold,
    wsvt,
)

__all__ = [
    "SolverConfig",
    "AdmmState",
    "IterationRecord",
    "DenoiseReport",
    "DenoiseResult",
    "init_state",
    "update_patch",
    "update_consensus",
    "update_restored",
    "update_grad_aux",
    "update_multipliers",
    "residuals",
    "check_convergence",
    "denoise",
]


@dataclass(frozen=True)
class SolverConfig:
    """All knobs of one solver run.

    Defaults reproduce the reference operating point: sparsity weight
    0.14, smoothing weight 0.03, saturation scale 0.01, difference weights
    (1, 1, 0.5), penalty weight growing from 0.01 by factor 1.5 up to 1e6,
    tolerance 1e-6 within 60 sweeps, 15x15 patches stepped by half a
    patch.  ``patch_rows``/``patch_cols`` of None mean one patch spanning
    the whole image.
    """

    lam: float = 0.14
    tau: float = 0.03
    gamma: float = 0.01
    rank_cap: int | None = None
    weights: DiffWeights = DiffWeights(1.0, 1.0, 0.5)
    mu0: float = 1e-2
    mu_max: float = 1e6
    rho: float = 1.5
    epsilon: float = 1e-6
    max_iters: int = 60
    patch_rows: int | None = 15
    patch_cols: int | None = 15
    stride: int | tuple[int, int] | None = None
    penalty_mode: str = MODE_NONCONVEX
    threshold_factor: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "weights", DiffWeights(*self.weights))
        self.validate()

    def validate(self) -> None:
        if not (np.isfinite(self.lam) and self.lam > 0):
            raise ConfigurationError(f"lam must be positive, got {self.lam!r}")
        # tau == 0 is allowed: it turns the smoothing term off (ablation mode).
        if not (np.isfinite(self.tau) and self.tau >= 0):
            raise ConfigurationError(f"tau must be nonnegative, got {self.tau!r}")
        if not (np.isfinite(self.gamma) and self.gamma > 0):
            raise ConfigurationError(f"gamma must be positive, got {self.gamma!r}")
        if self.rank_cap is not None and (not isinstance(self.rank_cap, (int, np.integer)) or self.rank_cap < 1):
            raise ConfigurationError(f"rank_cap must be a positive integer or None, got {self.rank_cap!r}")
        check_weights(self.weights)
        if not (np.isfinite(self.mu0) and self.mu0 > 0):
            raise ConfigurationError(f"mu0 must be positive, got {self.mu0!r}")
        if not (np.isfinite(self.mu_max) and self.mu_max >= self.mu0):
            raise ConfigurationError(f"mu_max must be at least mu0, got {self.mu_max!r}")
        if not (np.isfinite(self.rho) and self.rho > 1):
            raise ConfigurationError(f"rho must exceed 1, got {self.rho!r}")
        if not (np.isfinite(self.epsilon) and self.epsilon > 0):
            raise ConfigurationError(f"epsilon must be positive, got {self.epsilon!r}")
        if not isinstance(self.max_iters, (int, np.integer)) or self.max_iters < 1:
            raise ConfigurationError(f"max_iters must be a positive integer, got {self.max_iters!r}")
        for name, value in (("patch_rows", self.patch_rows), ("patch_cols", self.patch_cols)):
            if value is not None and (not isinstance(value, (int, np.integer)) or value < 1):
                raise ConfigurationError(f"{name} must be a positive integer or None, got {value!r}")
        if (self.patch_rows is None) != (self.patch_cols is None):
            raise ConfigurationError("patch_rows and patch_cols must both be set or both be None")
        if self.stride is not None:
            values = self.stride if isinstance(self.stride, (tuple, list)) else (self.stride, self.stride)
            if len(values) != 2 or any(not isinstance(v, (int, np.integer)) or v < 1 for v in values):
                raise ConfigurationError(f"stride must be a positive integer or pair, got {self.stride!r}")
        if self.penalty_mode not in (MODE_NONCONVEX, MODE_NUCLEAR):
            raise ConfigurationError(f"unknown penalty_mode {self.penalty_mode!r}")
        if not (np.isfinite(self.threshold_factor) and self.threshold_factor > 0):
            raise ConfigurationError(f"threshold_factor must be positive, got {self.threshold_factor!r}")

    def resolved_patch(self, image_rows, image_cols) -> tuple[int, int]:
        """Window size for a given image; None means the full image."""
        if self.patch_rows is None:
            return image_rows, image_cols
        return self.patch_rows, self.patch_cols

    def shrinkage_spec(self) -> ShrinkageSpec:
        return ShrinkageSpec(
            mode=self.penalty_mode,
            threshold_scale=self.threshold_factor,
            rank_cap=self.rank_cap,
        )

    def to_dict(self) -> dict:
        stride = self.stride
        if isinstance(stride, (tuple, list)):
            stride = list(stride)
        return {
            "lam": self.lam,
            "tau": self.tau,
            "gamma": self.gamma,
            "rank_cap": self.rank_cap,
            "weights": list(self.weights),
            "mu0": self.mu0,
            "mu_max": self.mu_max,
            "rho": self.rho,
            "epsilon": self.epsilon,
            "max_iters": self.max_iters,
            "patch_rows": self.patch_rows,
            "patch_cols": self.patch_cols,
            "stride": stride,
            "penalty_mode": self.penalty_mode,
            "threshold_factor": self.threshold_factor,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "SolverConfig":
        if not isinstance(payload, dict):
            raise ConfigurationError(f"solver config must be a JSON object, got {type(payload).__name__}")
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(payload) - known
        if unknown:
            raise ConfigurationError(f"unknown solver config keys: {sorted(unknown)}")
        kwargs = dict(payload)
        if "weights" in kwargs:
            kwargs["weights"] = DiffWeights(*kwargs["weights"])
        if isinstance(kwargs.get("stride"), list):
            kwargs["stride"] = tuple(kwargs["stride"])
        return cls(**kwargs)


@dataclass(eq=False)
class AdmmState:
    """Mutable iterate bundle for one run.

    Patch-indexed arrays have shape (num_patches, patch_size, bands); the
    cubes have the image shape; the gradient pairs have a leading mode
    axis of 3.
    """

    grid: PatchGrid
    obs_patches: np.ndarray
    low_rank: np.ndarray
    sparse: np.ndarray
    dual_fit: np.ndarray
    dual_patch: np.ndarray
    consensus: np.ndarray
    restored: np.ndarray
    dual_consensus: np.ndarray
    grad_aux: np.ndarray
    dual_grad: np.ndarray
    mu: float
    iteration: int = 0
    residual_history: list = field(default_factory=list)


def init_state(observed, grid: PatchGrid, config: SolverConfig) -> AdmmState:
    """Zero-initialized state: every iterate and multiplier starts at zero."""
    data = as_cube_array(observed)
    obs_patches = extract_all(data, grid)
    cube_shape = data.shape
    return AdmmState(
        grid=grid,
        obs_patches=obs_patches,
        low_rank=np.zeros_like(obs_patches),
        sparse=np.zeros_like(obs_patches),
        dual_fit=np.zeros_like(obs_patches),
        dual_patch=np.zeros_like(obs_patches),
        consensus=np.zeros(cube_shape),
        restored=np.zeros(cube_shape),
        dual_consensus=np.zeros(cube_shape),
        grad_aux=np.zeros((3,) + cube_shape),
        dual_grad=np.zeros((3,) + cube_shape),
        mu=config.mu0,
    )


def update_patch(obs, consensus_patch, sparse, dual_fit, dual_patch, mu, config: SolverConfig):
    """One patch sweep: new (low_rank, sparse) for a patch matrix or stack.

    The low-rank block proxies both quadratic couplings at once, so its
    shrinkage target is the average of the fit residual and the consensus
    patch, each corrected by its scaled dual.  The sparse block then soft
    thresholds the remaining fit residual.
    """
    target = 0.5 * (obs + consensus_patch - sparse + (dual_fit - dual_patch) / mu)
    low_rank = wsvt(target, config.shrinkage_spec(), config.gamma, mu)
    new_sparse = soft_threshold(obs - low_rank + dual_fit / mu, config.lam / mu)
    return low_rank, new_sparse


def update_consensus(restored, dual_consensus, low_rank, dual_patch, grid: PatchGrid, mu):
    """Closed-form consensus cube: average the restored cube with every
    embedded patch estimate, weighting each pixel by 1 + coverage."""
    out = restored - dual_consensus / mu
    accumulate_all(out, grid, low_rank + dual_patch / mu)
    out /= 1.0 + grid.coverage[:, :, None]
    return out


def update_restored(consensus, dual_consensus, grad_aux, dual_grad, mu, denominator, weights):
    """FFT solve of the gradient normal equations tying X to J and U."""
    rhs = consensus + dual_consensus / mu + adjoint_diff(grad_aux + dual_grad / mu, weights)
    return fft_solve(rhs, denominator)


def update_grad_aux(restored, dual_grad, mu, tau, weights):
    """Soft threshold the corrected gradient field at tau/mu."""
    return soft_threshold(forward_diff(restored, weights) - dual_grad / mu, tau / mu)


def update_multipliers(state: AdmmState, config: SolverConfig) -> None:
    """Ascend all four dual families at step mu, then grow mu geometrically."""
    consensus_patches = extract_all(state.consensus, state.grid)
    gradient = forward_diff(state.restored, config.weights)
    mu = state.mu
    state.dual_fit += mu * (state.obs_patches - state.low_rank - state.sparse)
    state.dual_patch += mu * (state.low_rank - consensus_patches)
    state.dual_consensus += mu * (state.consensus - state.restored)
    state.dual_grad += mu * (state.grad_aux - gradient)
    state.mu = min(config.rho * mu, config.mu_max)


def residuals(state: AdmmState) -> tuple[float, float]:
    """Infinity-norm residuals: (patch fit, consensus split)."""
    fit = float(np.abs(state.obs_patches - state.low_rank - state.sparse).max())
    split = float(np.abs(state.consensus - state.restored).max())
    return fit, split


def check_convergence(state: AdmmState, epsilon) -> bool:
    """True when both infinity-norm residuals are at most epsilon."""
    fit, split = residuals(state)
    return max(fit, split) <= epsilon


@dataclass(frozen=True)
class IterationRecord:
    """One sweep's diagnostics; mu is the value used during the sweep."""

    iteration: int
    fit_residual: float
    split_residual: float
    mu: float


@dataclass(frozen=True)
class DenoiseReport:
    iterations: int
    converged: bool
    fit_residual: float
    split_residual: float
    history: tuple[IterationRecord, ...]
    runtime_seconds: float


@dataclass(frozen=True, eq=False)
class DenoiseResult:
    """Solver outputs: the restored cube, the fused sparse component, the
    consensus and fused low-rank diagnostics, and the run report."""

    restored: np.ndarray
    sparse: np.ndarray
    report: DenoiseReport
    consensus: np.ndarray
    low_rank: np.ndarray


_STATE_ARRAYS = (
    "low_rank",
    "sparse",
    "consensus",
    "restored",
    "grad_aux",
    "dual_fit",
    "dual_patch",
    "dual_consensus",
    "dual_grad",
)


def _check_state_finite(state: AdmmState, iteration: int) -> None:
    for name in _STATE_ARRAYS:
        if not np.isfinite(getattr(state, name)).all():
            raise NumericalError(f"non-finite values in {name} at iteration {iteration}")


def _patch_sweep(state: AdmmState, config: SolverConfig, threads: int) -> None:
    consensus_patches = extract_all(state.consensus, state.grid)
    count = state.obs_patches.shape[0]
    if threads <= 1 or count == 1:
        state.low_rank, state.sparse = update_patch(
            state.obs_patches, consensus_patches, state.sparse,
            state.dual_fit, state.dual_patch, state.mu, config,
        )
        return

    # Partition the patch axis; each worker runs the identical batched
    # update on its contiguous slice, so results match the serial path
    # bit for bit.
    low_rank = np.empty_like(state.obs_patches)
    sparse = np.empty_like(state.obs_patches)
    workers = min(threads, count)
    bounds = np.linspace(0, count, workers + 1, dtype=int)

    def run_chunk(a, b):
        low_rank[a:b], sparse[a:b] = update_patch(
            state.obs_patches[a:b], consensus_patches[a:b], state.sparse[a:b],
            state.dual_fit[a:b], state.dual_patch[a:b], state.mu, config,
        )

    with ThreadPoolExecutor(max_workers=workers) as pool:
        list(pool.map(run_chunk, bounds[:-1], bounds[1:]))
    state.low_rank, state.sparse = low_rank, sparse


def denoise(
    observed,
    config: SolverConfig | None = None,
    progress: Callable[[IterationRecord], None] | None = None,
    threads: int = 1,
    state_hook: Callable[[AdmmState], None] | None = None,
) -> DenoiseResult:
    """Run the full solver on an observed cube.

    Parameters
    ----------
    observed : cube or array, shape (m, n, p)
        Degraded data; must be finite.
    config : SolverConfig, optional
        Defaults to ``SolverConfig()``.
    progress : callable, optional
        Called with an IterationRecord after every sweep.
    threads : int
        Worker threads for the per-patch phase; never changes the result.
    state_hook : callable, optional
        Called with the live AdmmState after every sweep (diagnostics and
        testing; treat the state as read-only).
    """
    if config is None:
        config = SolverConfig()
    config.validate()
    if not isinstance(threads, (int, np.integer)) or threads < 1:
        raise ConfigurationError(f"threads must be a positive integer, got {threads!r}")
    data = as_cube_array(observed)
    if not np.isfinite(data).all():
        raise ConfigurationError("observed cube contains non-finite values")

    rows, cols, _ = data.shape
    patch_rows, patch_cols = config.resolved_patch(rows, cols)
    grid = build_patch_grid(rows, cols, patch_rows, patch_cols, config.stride)
    denominator = build_fft_denominator(data.shape, config.weights)
    state = init_state(data, grid, config)

    started = time.perf_counter()
    records: list[IterationRecord] = []
    converged = False
    for iteration in range(1, config.max_iters + 1):
        mu = state.mu
        try:
            _patch_sweep(state, config, threads)
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"singular value decomposition failed at iteration {iteration}") from exc
        state.consensus = update_consensus(
            state.restored, state.dual_consensus, state.low_rank, state.dual_patch, grid, mu
        )
        state.restored = update_restored(
            state.consensus, state.dual_consensus, state.grad_aux, state.dual_grad,
            mu, denominator, config.weights,
        )
        state.grad_aux = update_grad_aux(state.restored, state.dual_grad, mu, config.tau, config.weights)
        update_multipliers(state, config)
        state.iteration = iteration

        fit, split = residuals(state)
        state.residual_history.append((fit, split))
        _check_state_finite(state, iteration)
        record = IterationRecord(iteration=iteration, fit_residual=fit, split_residual=split, mu=mu)
        records.append(record)
        if progress is not None:
            progress(record)
        if state_hook is not None:
            state_hook(state)
        if check_convergence(state, config.epsilon):
            converged = True
            break

    elapsed = time.perf_counter() - started
    last = records[-1]
    report = DenoiseReport(
        iterations=state.iteration,
        converged=converged,
        fit_residual=last.fit_residual,
        split_residual=last.split_residual,
        history=tuple(records),
        runtime_seconds=elapsed,
    )
    return DenoiseResult(
        restored=state.restored,
        sparse=average_embed(state.sparse, grid),
        report=report,
        consensus=state.consensus,
        low_rank=average_embed(state.low_rank, grid),
    )

"""Restoration quality metrics and their report formats.

All metrics treat the cube band by band: a cube-level score is the plain
arithmetic mean of the per-band scores.  PSNR of a band that matches the
reference exactly has no finite value, so it is reported as the sentinel
999.0 dB and the band is flagged in the report.

SSIM uses the windowed form: local means, variances, and covariance under
an 11x11 Gaussian window (sigma 1.5), stabilizers (0.01*peak)**2 and
(0.03*peak)**2, averaged over window positions that fit entirely inside
the band.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .cube import as_cube_array

__all__ = [
    "PSNR_SENTINEL_DB",
    "psnr",
    "ssim",
    "spectrum_at",
    "QualityReport",
    "quality_report",
    "write_report_csv",
    "report_to_json",
]

PSNR_SENTINEL_DB = 999.0

_SSIM_WINDOW = 11
_SSIM_SIGMA = 1.5


def psnr(reference, test, peak=1.0) -> float:
    """Peak signal-to-noise ratio in dB; 999.0 when the inputs are identical."""
    reference = np.asarray(reference, dtype=np.float64)
    test = np.asarray(test, dtype=np.float64)
    if reference.shape != test.shape:
        raise ValueError(f"shape mismatch: {reference.shape} vs {test.shape}")
    if not (peak > 0):
        raise ValueError(f"peak must be positive, got {peak!r}")
    mse = float(np.mean((reference - test) ** 2))
    if mse == 0.0:
        return PSNR_SENTINEL_DB
    return float(10.0 * np.log10(peak * peak / mse))


def _gaussian_window() -> np.ndarray:
    offsets = np.arange(_SSIM_WINDOW) - (_SSIM_WINDOW - 1) / 2
    g = np.exp(-(offsets**2) / (2.0 * _SSIM_SIGMA**2))
    g /= g.sum()
    return np.outer(g, g)


def _window_filter(image, kernel) -> np.ndarray:
    windows = np.lib.stride_tricks.sliding_window_view(image, kernel.shape)
    return np.einsum("ijkl,kl->ij", windows, kernel)


def ssim(reference, test, peak=1.0) -> float:
    """Mean structural similarity between two 2-D images."""
    reference = np.asarray(reference, dtype=np.float64)
    test = np.asarray(test, dtype=np.float64)
    if reference.shape != test.shape:
        raise ValueError(f"shape mismatch: {reference.shape} vs {test.shape}")
    if reference.ndim != 2:
        raise ValueError(f"ssim expects 2-D images, got shape {reference.shape}")
    if min(reference.shape) < _SSIM_WINDOW:
        raise ValueError(
            f"image {reference.shape} is smaller than the {_SSIM_WINDOW}x{_SSIM_WINDOW} window"
        )
    if not (peak > 0):
        raise ValueError(f"peak must be positive, got {peak!r}")

    kernel = _gaussian_window()
    mean_r = _window_filter(reference, kernel)
    mean_t = _window_filter(test, kernel)
    var_r = _window_filter(reference * reference, kernel) - mean_r * mean_r
    var_t = _window_filter(test * test, kernel) - mean_t * mean_t
    covar = _window_filter(reference * test, kernel) - mean_r * mean_t

    c1 = (0.01 * peak) ** 2
    c2 = (0.03 * peak) ** 2
    score = ((2.0 * mean_r * mean_t + c1) * (2.0 * covar + c2)) / (
        (mean_r * mean_r + mean_t * mean_t + c1) * (var_r + var_t + c2)
    )
    return float(score.mean())


def spectrum_at(cube, row, col) -> np.ndarray:
    """Spectral profile of one pixel: the length-p vector cube[row, col, :]."""
    data = as_cube_array(cube)
    rows, cols, _ = data.shape
    if not (0 <= row < rows and 0 <= col < cols):
        raise ValueError(f"pixel ({row}, {col}) is outside the {rows}x{cols} image")
    return data[row, col, :].copy()


@dataclass(frozen=True)
class QualityReport:
    """Per-band PSNR/SSIM plus their means and an optional runtime."""

    band_psnr: tuple[float, ...]
    band_ssim: tuple[float, ...]
    mpsnr: float
    mssim: float
    sentinel_bands: tuple[int, ...]
    runtime_seconds: float | None = None


def quality_report(reference, test, peak=1.0, runtime_seconds=None) -> QualityReport:
    """Score a restored cube against its reference, band by band."""
    reference = as_cube_array(reference)
    test = as_cube_array(test)
    if reference.shape != test.shape:
        raise ValueError(f"cube shape mismatch: {reference.shape} vs {test.shape}")
    bands = reference.shape[2]
    band_psnr = []
    band_ssim = []
    sentinels = []
    for k in range(bands):
        value = psnr(reference[:, :, k], test[:, :, k], peak=peak)
        if value == PSNR_SENTINEL_DB:
            sentinels.append(k)
        band_psnr.append(value)
        band_ssim.append(ssim(reference[:, :, k], test[:, :, k], peak=peak))
    return QualityReport(
        band_psnr=tuple(band_psnr),
        band_ssim=tuple(band_ssim),
        mpsnr=float(np.mean(band_psnr)),
        mssim=float(np.mean(band_ssim)),
        sentinel_bands=tuple(sentinels),
        runtime_seconds=runtime_seconds,
    )


def write_report_csv(report: QualityReport, path) -> None:
    """Write one row per band plus a final mean row: band, psnr_db, ssim."""
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["band", "psnr_db", "ssim"])
        for k, (p_val, s_val) in enumerate(zip(report.band_psnr, report.band_ssim)):
            writer.writerow([k, repr(float(p_val)), repr(float(s_val))])
        writer.writerow(["mean", repr(float(report.mpsnr)), repr(float(report.mssim))])


def report_to_json(report: QualityReport) -> dict:
    """Report as a JSON-ready dict."""
    return {
        "band_psnr_db": [float(v) for v in report.band_psnr],
        "band_ssim": [float(v) for v in report.band_ssim],
        "mpsnr_db": float(report.mpsnr),
        "mssim": float(report.mssim),
        "sentinel_bands": [int(k) for k in report.sentinel_bands],
        "psnr_sentinel_db": PSNR_SENTINEL_DB,
        "runtime_seconds": report.runtime_seconds,
    }

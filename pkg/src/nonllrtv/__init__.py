"""Mixed-noise removal for hyperspectral cubes.

Restores a degraded cube by modeling every overlapping spatial patch as a
low-rank-plus-sparse matrix under a saturating rank penalty, while a
weighted total-variation term smooths the cube across both spatial axes
and the spectral axis.  The package also ships the seeded degradation
protocols and band-wise quality metrics used to measure it, plus a CLI
(`nonllrtv`) that chains simulate / denoise / evaluate over cube files.
"""

from .cube import HsiCube, casorati, inverse_casorati, load_cube, save_cube
from .diffops import (
    DiffWeights,
    adjoint_diff,
    build_fft_denominator,
    fft_solve,
    forward_diff,
    sstv_value,
)
from .errors import ConfigurationError, NumericalError
from .metrics import (
    PSNR_SENTINEL_DB,
    QualityReport,
    psnr,
    quality_report,
    report_to_json,
    spectrum_at,
    ssim,
    write_report_csv,
)
from .noise import DegradeResult, NoiseSpec, apply_noise, case_spec, degrade
from .patches import (
    PatchGrid,
    average_embed,
    build_patch_grid,
    embed_accumulate,
    extract_patch,
)
from .shrinkage import (
    ShrinkageSpec,
    gamma_norm,
    gamma_norm_gradient,
    soft_threshold,
    wsvt,
)
from .solver import (
    AdmmState,
    DenoiseReport,
    DenoiseResult,
    IterationRecord,
    SolverConfig,
    check_convergence,
    denoise,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "HsiCube",
    "casorati",
    "inverse_casorati",
    "load_cube",
    "save_cube",
    "DiffWeights",
    "forward_diff",
    "adjoint_diff",
    "sstv_value",
    "build_fft_denominator",
    "fft_solve",
    "ConfigurationError",
    "NumericalError",
    "PSNR_SENTINEL_DB",
    "QualityReport",
    "psnr",
    "ssim",
    "quality_report",
    "report_to_json",
    "write_report_csv",
    "spectrum_at",
    "NoiseSpec",
    "DegradeResult",
    "case_spec",
    "degrade",
    "apply_noise",
    "PatchGrid",
    "build_patch_grid",
    "extract_patch",
    "embed_accumulate",
    "average_embed",
    "ShrinkageSpec",
    "soft_threshold",
    "gamma_norm",
    "gamma_norm_gradient",
    "wsvt",
    "SolverConfig",
    "AdmmState",
    "IterationRecord",
    "DenoiseReport",
    "DenoiseResult",
    "denoise",
    "check_convergence",
]

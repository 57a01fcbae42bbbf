"""Seeded mixed-noise degradation of clean cubes.

One call applies up to four stages in a fixed order: additive Gaussian
noise, salt-and-pepper impulse replacement, dead column runs (zeroed),
and striped rows (constant offsets), followed by a single clip to [0, 1].
Nothing is clipped between stages.

Per-band Gaussian levels and impulse fractions are either fixed values or
ranges drawn uniformly per band.  The Gaussian level is interpreted as a
variance by default (a level of 0.05 means a standard deviation of
sqrt(0.05)); set ``gaussian_interpretation="stddev"`` to use it directly.

Randomness is fully determined by one 64-bit seed.  The seed expands into
independent substreams per stage and per band, so the same spec and seed
reproduce the same cube bit for bit, a stage with zero magnitude leaves
the data untouched bitwise, and changing one stage's settings never
perturbs another stage's draws.

Band intervals are half-open, zero-based ``[start, stop)``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .cube import as_cube_array
from .errors import ConfigurationError

__all__ = [
    "NoiseSpec",
    "DegradeResult",
    "case_spec",
    "degrade",
    "apply_noise",
]

INTERPRET_VARIANCE = "variance"
INTERPRET_STDDEV = "stddev"

_SPEC_KEYS = (
    "case",
    "gaussian_sigma",
    "gaussian_interpretation",
    "impulse_fraction",
    "deadline_bands",
    "stripe_bands",
    "deadline_count",
    "deadline_width",
    "stripe_count",
    "stripe_magnitude",
    "seed",
)


def _as_level(value, name):
    """Normalize a fixed level or (lo, hi) range; return float or (float, float)."""
    if isinstance(value, (tuple, list)):
        if len(value) != 2:
            raise ConfigurationError(f"{name} range must have two entries, got {value!r}")
        lo, hi = float(value[0]), float(value[1])
        if not (np.isfinite(lo) and np.isfinite(hi) and 0 <= lo <= hi):
            raise ConfigurationError(f"{name} range must satisfy 0 <= lo <= hi, got {value!r}")
        return (lo, hi)
    value = float(value)
    if not (np.isfinite(value) and value >= 0):
        raise ConfigurationError(f"{name} must be nonnegative, got {value!r}")
    return value


def _as_band_interval(value, name):
    if value is None:
        return None
    if not isinstance(value, (tuple, list)) or len(value) != 2:
        raise ConfigurationError(f"{name} must be a (start, stop) pair or None, got {value!r}")
    start, stop = int(value[0]), int(value[1])
    if start < 0 or stop <= start:
        raise ConfigurationError(f"{name} must satisfy 0 <= start < stop, got {value!r}")
    return (start, stop)


@dataclass(frozen=True)
class NoiseSpec:
    """Full description of one degradation, JSON-serializable.

    ``case`` is a label ("1" through "6" for the stock protocols, "custom"
    otherwise); the remaining fields are what actually drive the stages.
    """

    case: str = "custom"
    gaussian_sigma: float | tuple[float, float] = 0.0
    gaussian_interpretation: str = INTERPRET_VARIANCE
    impulse_fraction: float | tuple[float, float] = 0.0
    deadline_bands: tuple[int, int] | None = None
    stripe_bands: tuple[int, int] | None = None
    deadline_count: int = 10
    deadline_width: tuple[int, int] = (1, 3)
    stripe_count: int = 20
    stripe_magnitude: float = 0.25
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "case", str(self.case))
        object.__setattr__(self, "gaussian_sigma", _as_level(self.gaussian_sigma, "gaussian_sigma"))
        object.__setattr__(self, "impulse_fraction", _as_level(self.impulse_fraction, "impulse_fraction"))
        if self.gaussian_interpretation not in (INTERPRET_VARIANCE, INTERPRET_STDDEV):
            raise ConfigurationError(
                f"gaussian_interpretation must be '{INTERPRET_VARIANCE}' or '{INTERPRET_STDDEV}', "
                f"got {self.gaussian_interpretation!r}"
            )
        frac = self.impulse_fraction
        top = frac[1] if isinstance(frac, tuple) else frac
        if top > 1:
            raise ConfigurationError(f"impulse_fraction cannot exceed 1, got {frac!r}")
        object.__setattr__(self, "deadline_bands", _as_band_interval(self.deadline_bands, "deadline_bands"))
        object.__setattr__(self, "stripe_bands", _as_band_interval(self.stripe_bands, "stripe_bands"))
        width = self.deadline_width
        if not isinstance(width, (tuple, list)) or len(width) != 2:
            raise ConfigurationError(f"deadline_width must be a (min, max) pair, got {width!r}")
        lo, hi = int(width[0]), int(width[1])
        if not (1 <= lo <= hi):
            raise ConfigurationError(f"deadline_width must satisfy 1 <= min <= max, got {width!r}")
        object.__setattr__(self, "deadline_width", (lo, hi))
        if int(self.deadline_count) < 0 or int(self.stripe_count) < 0:
            raise ConfigurationError("deadline_count and stripe_count must be nonnegative")
        object.__setattr__(self, "deadline_count", int(self.deadline_count))
        object.__setattr__(self, "stripe_count", int(self.stripe_count))
        mag = float(self.stripe_magnitude)
        if not (np.isfinite(mag) and mag >= 0):
            raise ConfigurationError(f"stripe_magnitude must be nonnegative, got {mag!r}")
        object.__setattr__(self, "stripe_magnitude", mag)
        object.__setattr__(self, "seed", int(self.seed))

    def to_json(self) -> dict:
        def level(v):
            return list(v) if isinstance(v, tuple) else v

        return {
            "case": self.case,
            "gaussian_sigma": level(self.gaussian_sigma),
            "gaussian_interpretation": self.gaussian_interpretation,
            "impulse_fraction": level(self.impulse_fraction),
            "deadline_bands": list(self.deadline_bands) if self.deadline_bands else None,
            "stripe_bands": list(self.stripe_bands) if self.stripe_bands else None,
            "deadline_count": self.deadline_count,
            "deadline_width": list(self.deadline_width),
            "stripe_count": self.stripe_count,
            "stripe_magnitude": self.stripe_magnitude,
            "seed": self.seed,
        }

    @classmethod
    def from_json(cls, payload: dict) -> "NoiseSpec":
        if not isinstance(payload, dict):
            raise ConfigurationError(f"noise spec must be a JSON object, got {type(payload).__name__}")
        unknown = set(payload) - set(_SPEC_KEYS)
        if unknown:
            raise ConfigurationError(f"unknown noise spec keys: {sorted(unknown)}")
        kwargs = dict(payload)
        for key in ("gaussian_sigma", "impulse_fraction", "deadline_bands", "stripe_bands", "deadline_width"):
            if isinstance(kwargs.get(key), list):
                kwargs[key] = tuple(kwargs[key])
        return cls(**kwargs)


@dataclass(frozen=True, eq=False)
class DegradeResult:
    """Degraded cube plus ground truth about what was injected."""

    noisy: np.ndarray
    impulse_mask: np.ndarray
    band_sigma: np.ndarray
    band_impulse_fraction: np.ndarray


def case_spec(case_id, seed=0) -> NoiseSpec:
    """Stock degradation protocols 1 through 6.

    1 fixes the Gaussian variance at 0.05 and the impulse fraction at 0.1
    on every band; 2 draws both per band from [0, 0.2]; 3 is Gaussian-only
    with per-band variance from [0, 0.2]; 4, 5, and 6 extend protocol 2
    with dead columns (bands 130-159), stripes (bands 110-139), or both.
    """
    try:
        case_id = int(case_id)
    except (TypeError, ValueError):
        raise ConfigurationError(f"case must be an integer 1..6, got {case_id!r}") from None
    if case_id not in range(1, 7):
        raise ConfigurationError(f"case must be between 1 and 6, got {case_id}")
    base = dict(case=str(case_id), seed=seed)
    if case_id == 1:
        return NoiseSpec(gaussian_sigma=0.05, impulse_fraction=0.1, **base)
    if case_id == 3:
        return NoiseSpec(gaussian_sigma=(0.0, 0.2), **base)
    spec = NoiseSpec(gaussian_sigma=(0.0, 0.2), impulse_fraction=(0.0, 0.2), **base)
    if case_id == 4:
        spec = replace(spec, deadline_bands=(130, 160))
    elif case_id == 5:
        spec = replace(spec, stripe_bands=(110, 140))
    elif case_id == 6:
        spec = replace(spec, deadline_bands=(130, 160), stripe_bands=(110, 140))
    return spec


def _band_levels(level, bands, rng) -> np.ndarray:
    if isinstance(level, tuple):
        return rng.uniform(level[0], level[1], size=bands)
    return np.full(bands, level)


def _check_interval(interval, bands, name):
    if interval is not None and interval[1] > bands:
        raise ConfigurationError(f"{name} {interval} exceeds the cube's {bands} bands")


def degrade(clean, spec: NoiseSpec) -> DegradeResult:
    """Apply a degradation spec to a clean cube in [0, 1].

    Returns the noisy cube together with the impulse mask and the per-band
    Gaussian standard deviations and impulse fractions actually used, so
    callers can verify the injected statistics without re-deriving them
    from the data.
    """
    data = as_cube_array(clean)
    if not np.isfinite(data).all():
        raise ConfigurationError("clean cube contains non-finite values")
    if data.min() < 0.0 or data.max() > 1.0:
        raise ConfigurationError("clean cube must be scaled to [0, 1] before degradation")
    rows, cols, bands = data.shape
    _check_interval(spec.deadline_bands, bands, "deadline_bands")
    _check_interval(spec.stripe_bands, bands, "stripe_bands")

    root = np.random.SeedSequence(spec.seed)
    param_seq, gauss_seq, impulse_seq, deadline_seq, stripe_seq = root.spawn(5)
    param_rng = np.random.Generator(np.random.PCG64(param_seq))

    # Parameter draws happen in a fixed order (Gaussian levels first) so a
    # spec's per-band values never depend on the other stage's settings.
    levels = _band_levels(spec.gaussian_sigma, bands, param_rng)
    if spec.gaussian_interpretation == INTERPRET_VARIANCE:
        band_sigma = np.sqrt(levels)
    else:
        band_sigma = levels
    band_fraction = _band_levels(spec.impulse_fraction, bands, param_rng)

    noisy = data.copy()
    impulse_mask = np.zeros(data.shape, dtype=bool)

    if np.any(band_sigma > 0):
        children = gauss_seq.spawn(bands)
        for k in range(bands):
            if band_sigma[k] > 0:
                rng = np.random.Generator(np.random.PCG64(children[k]))
                noisy[:, :, k] += band_sigma[k] * rng.standard_normal((rows, cols))

    if np.any(band_fraction > 0):
        children = impulse_seq.spawn(bands)
        for k in range(bands):
            if band_fraction[k] > 0:
                rng = np.random.Generator(np.random.PCG64(children[k]))
                selected = rng.random((rows, cols)) < band_fraction[k]
                salt = rng.random((rows, cols)) < 0.5
                plane = noisy[:, :, k]
                plane[selected] = np.where(salt[selected], 1.0, 0.0)
                impulse_mask[:, :, k] = selected

    if spec.deadline_bands is not None and spec.deadline_count > 0:
        children = deadline_seq.spawn(bands)
        lo, hi = spec.deadline_width
        for k in range(*spec.deadline_bands):
            rng = np.random.Generator(np.random.PCG64(children[k]))
            starts = rng.integers(0, cols, size=spec.deadline_count)
            widths = rng.integers(lo, hi + 1, size=spec.deadline_count)
            for start, width in zip(starts, widths):
                noisy[:, start : min(start + width, cols), k] = 0.0

    if spec.stripe_bands is not None and spec.stripe_count > 0:
        children = stripe_seq.spawn(bands)
        count = min(spec.stripe_count, rows)
        for k in range(*spec.stripe_bands):
            rng = np.random.Generator(np.random.PCG64(children[k]))
            stripe_rows = rng.choice(rows, size=count, replace=False)
            offsets = rng.uniform(-spec.stripe_magnitude, spec.stripe_magnitude, size=count)
            noisy[stripe_rows, :, k] += offsets[:, None]

    np.clip(noisy, 0.0, 1.0, out=noisy)
    return DegradeResult(
        noisy=noisy,
        impulse_mask=impulse_mask,
        band_sigma=band_sigma,
        band_impulse_fraction=band_fraction,
    )


def apply_noise(clean, spec: NoiseSpec) -> np.ndarray:
    """Degrade a clean cube and return just the noisy cube."""
    return degrade(clean, spec).noisy

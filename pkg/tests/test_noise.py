"""Seeded degradation: stage behavior, statistics, determinism."""

import numpy as np
import pytest

from conftest import make_synthetic
from nonllrtv import ConfigurationError, NoiseSpec, apply_noise, case_spec, degrade


def test_zero_spec_is_bitwise_identity():
    clean = make_synthetic(8, 8, 4)
    noisy = apply_noise(clean, NoiseSpec(seed=5))
    assert np.array_equal(noisy, clean)


def test_same_seed_reproduces_different_seed_differs():
    clean = make_synthetic(12, 12, 6)
    spec = case_spec(1, seed=42)
    first = apply_noise(clean, spec)
    second = apply_noise(clean, spec)
    assert np.array_equal(first, second)
    other = apply_noise(clean, case_spec(1, seed=43))
    assert not np.array_equal(first, other)


def test_output_stays_in_unit_interval():
    clean = make_synthetic(16, 16, 8)
    noisy = apply_noise(clean, case_spec(1, seed=0))
    assert noisy.min() >= 0.0 and noisy.max() <= 1.0


def test_case1_statistics():
    clean = np.full((64, 64, 16), 0.5)
    result = degrade(clean, case_spec(1, seed=7))
    assert np.all(result.band_sigma == np.sqrt(0.05))
    assert np.all(result.band_impulse_fraction == 0.1)
    fraction = result.impulse_mask.mean()
    assert abs(fraction - 0.1) <= 0.01
    # measured on non-impulse voxels; clipping at [0, 1] trims ~2-3%
    residual = (result.noisy - clean)[~result.impulse_mask]
    assert abs(residual.std() - np.sqrt(0.05)) <= 0.1 * np.sqrt(0.05)


def test_impulse_voxels_are_salt_or_pepper():
    clean = np.full((32, 32, 4), 0.5)
    result = degrade(clean, NoiseSpec(impulse_fraction=0.2, seed=3))
    hit = result.noisy[result.impulse_mask]
    assert set(np.unique(hit)) <= {0.0, 1.0}
    # both salt and pepper occur at roughly equal rates
    assert 0.4 <= (hit == 1.0).mean() <= 0.6
    assert np.array_equal(result.noisy[~result.impulse_mask], clean[~result.impulse_mask])


def test_impulse_leaves_gaussian_stage_untouched():
    # stages draw from independent substreams: adding an impulse stage must
    # not change the Gaussian noise on non-impulse voxels
    clean = make_synthetic(16, 16, 6)
    gauss_only = degrade(clean, NoiseSpec(gaussian_sigma=0.01, seed=11))
    mixed = degrade(clean, NoiseSpec(gaussian_sigma=0.01, impulse_fraction=0.1, seed=11))
    mask = mixed.impulse_mask
    assert np.array_equal(mixed.noisy[~mask], gauss_only.noisy[~mask])


def test_stddev_interpretation_switch():
    spec_var = NoiseSpec(gaussian_sigma=0.04, seed=1)
    spec_std = NoiseSpec(gaussian_sigma=0.04, gaussian_interpretation="stddev", seed=1)
    clean = np.full((8, 8, 2), 0.5)
    assert np.all(degrade(clean, spec_var).band_sigma == 0.2)
    assert np.all(degrade(clean, spec_std).band_sigma == 0.04)


def test_per_band_ranges_draw_within_bounds():
    clean = np.full((8, 8, 32), 0.5)
    result = degrade(clean, case_spec(2, seed=9))
    sigma_sq = result.band_sigma**2
    assert np.all((sigma_sq >= 0.0) & (sigma_sq <= 0.2))
    assert np.all((result.band_impulse_fraction >= 0.0) & (result.band_impulse_fraction <= 0.2))
    # draws vary across bands
    assert len(np.unique(result.band_sigma)) > 16


def test_per_band_impulse_fraction_matches_draw():
    clean = np.full((128, 128, 3), 0.5)
    result = degrade(clean, NoiseSpec(impulse_fraction=(0.05, 0.2), seed=21))
    for k in range(3):
        observed = result.impulse_mask[:, :, k].mean()
        target = result.band_impulse_fraction[k]
        standard_error = np.sqrt(target * (1 - target) / (128 * 128))
        assert abs(observed - target) <= 4 * standard_error + 1e-9


def test_deadlines_zero_full_column_runs_in_band_range():
    clean = np.full((16, 12, 6), 0.9)
    spec = NoiseSpec(deadline_bands=(2, 4), deadline_count=3, seed=2)
    result = degrade(clean, spec)
    changed = result.noisy != clean
    assert not changed[:, :, [0, 1, 4, 5]].any()
    for k in (2, 3):
        band_changed = changed[:, :, k]
        affected_cols = np.flatnonzero(band_changed.any(axis=0))
        assert affected_cols.size > 0
        # dead columns span every row and are exactly zero
        assert band_changed[:, affected_cols].all()
        assert np.all(result.noisy[:, affected_cols, k] == 0.0)


def test_stripes_add_constant_row_offsets():
    clean = np.full((24, 10, 5), 0.5)
    spec = NoiseSpec(stripe_bands=(1, 3), stripe_count=4, seed=6)
    result = degrade(clean, spec)
    changed = result.noisy != clean
    assert not changed[:, :, [0, 3, 4]].any()
    for k in (1, 2):
        rows = np.flatnonzero(changed[:, :, k].any(axis=1))
        assert rows.size == 4
        for row in rows:
            values = result.noisy[row, :, k] - 0.5
            assert np.allclose(values, values[0])
            assert abs(values[0]) <= 0.25


def test_stage_order_impulse_then_deadline():
    # deadlines run after impulse: a dead column is zero even where an
    # impulse set the voxel to 1
    clean = np.full((8, 4, 1), 0.5)
    spec = NoiseSpec(impulse_fraction=1.0, deadline_bands=(0, 1), deadline_count=4, seed=13)
    result = degrade(clean, spec)
    dead = result.noisy == 0.0
    assert dead.any()
    changed_cols = np.flatnonzero((result.noisy[:, :, 0] == 0.0).all(axis=0))
    assert changed_cols.size > 0


def test_case_spec_layouts():
    assert case_spec(1).gaussian_sigma == 0.05
    assert case_spec(1).impulse_fraction == 0.1
    assert case_spec(2).gaussian_sigma == (0.0, 0.2)
    assert case_spec(3).impulse_fraction == 0.0
    assert case_spec(4).deadline_bands == (130, 160)
    assert case_spec(4).stripe_bands is None
    assert case_spec(5).stripe_bands == (110, 140)
    assert case_spec(6).deadline_bands == (130, 160)
    assert case_spec(6).stripe_bands == (110, 140)
    for case_id in range(1, 7):
        assert case_spec(case_id, seed=5).seed == 5
    with pytest.raises(ConfigurationError):
        case_spec(0)
    with pytest.raises(ConfigurationError):
        case_spec(7)


def test_band_interval_must_fit_cube():
    clean = np.full((4, 4, 4), 0.5)
    with pytest.raises(ConfigurationError):
        degrade(clean, NoiseSpec(deadline_bands=(2, 9)))
    with pytest.raises(ConfigurationError):
        degrade(clean, NoiseSpec(stripe_bands=(3, 8)))


def test_spec_validation():
    with pytest.raises(ConfigurationError):
        NoiseSpec(impulse_fraction=1.5)
    with pytest.raises(ConfigurationError):
        NoiseSpec(impulse_fraction=(0.5, 0.2))
    with pytest.raises(ConfigurationError):
        NoiseSpec(gaussian_sigma=-0.1)
    with pytest.raises(ConfigurationError):
        NoiseSpec(gaussian_interpretation="sigma")
    with pytest.raises(ConfigurationError):
        NoiseSpec(deadline_bands=(5, 5))
    with pytest.raises(ConfigurationError):
        NoiseSpec(deadline_width=(0, 2))


def test_clean_cube_must_be_unit_scaled():
    with pytest.raises(ConfigurationError):
        degrade(np.full((2, 2, 2), 1.5), NoiseSpec())
    with pytest.raises(ConfigurationError):
        degrade(np.full((2, 2, 2), -0.1), NoiseSpec())


def test_json_round_trip():
    spec = case_spec(6, seed=77)
    clone = NoiseSpec.from_json(spec.to_json())
    assert clone == spec
    custom = NoiseSpec(gaussian_sigma=(0.0, 0.1), impulse_fraction=0.05, seed=3)
    assert NoiseSpec.from_json(custom.to_json()) == custom


def test_json_rejects_unknown_keys():
    with pytest.raises(ConfigurationError):
        NoiseSpec.from_json({"gaussian_sgima": 0.1})

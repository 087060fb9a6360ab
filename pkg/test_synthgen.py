"""Tests for the synthetic leaf spectra generator."""

import math

import numpy as np
import pytest

from src.calculators.spectral_pipeline import class_mean_profile, relative_mean_difference
from src.calculators.synthgen import (
    BaselineCurve,
    class_means,
    effect_size,
    generate,
    generate_stages,
    junction_mask,
)
from src.models.config import SynthConfig
from src.models.errors import SynthError

QUIET = dict(n_plants_per_class=3, noise_sd=0.0, junction_sd=0.0)


def test_default_stage_shape(early_spectra):
    assert early_spectra.n_samples == 196
    assert early_spectra.class_counts() == (98, 98)
    assert early_spectra.n_bands == 912
    assert early_spectra.sample_ids[:2] == ["I001-L1", "I001-L2"]
    assert early_spectra.plant_ids[-1] == "N049"
    assert early_spectra.stages() == [585.0]
    assert early_spectra.samples.min() >= 1e-4
    assert early_spectra.samples.max() <= 1.0


def test_same_seed_same_bytes():
    cfg = SynthConfig(n_plants_per_class=4, seed=11)
    first, again = generate(cfg), generate(cfg)
    np.testing.assert_array_equal(first.samples, again.samples)
    other = generate(SynthConfig(n_plants_per_class=4, seed=12))
    assert not np.array_equal(first.samples, other.samples)


def test_zero_effect_without_noise_gives_identical_classes():
    ds = generate(SynthConfig(class_effect=0.0, **QUIET))
    inf = ds.labels == 1
    np.testing.assert_array_equal(ds.samples[inf], ds.samples[~inf])


def test_class_means_differ_only_inside_dips(layout):
    cfg = SynthConfig()
    wl = layout.native_grid().wavelengths_nm
    mu_non, mu_inf = class_means(cfg, wl)
    near = np.zeros(wl.size, dtype=bool)
    for center in cfg.dip_centers_nm:
        near |= np.abs(wl - center) <= 4 * cfg.dip_width_nm
    np.testing.assert_array_equal(mu_non[~near], mu_inf[~near])

    centers = np.array(cfg.dip_centers_nm)
    mu_non_c, mu_inf_c = class_means(cfg, centers)
    np.testing.assert_allclose(mu_inf_c - mu_non_c, cfg.class_effect, atol=1e-12)


def test_dip_profile_is_truncated():
    curve = BaselineCurve()
    profile = curve.dip_profile(np.array([1450.0, 1450.0 + 160.0, 1450.0 + 161.0, 1000.0]))
    assert profile[0] == pytest.approx(1.0)
    assert profile[1] == pytest.approx(0.0, abs=1e-15)
    assert profile[2] == 0.0
    assert profile[3] == 0.0


def test_noise_free_leaves_carry_a_flat_brightness_offset():
    ds = generate(SynthConfig(**QUIET))
    wl = ds.wavelengths
    plateau = (wl >= 800.0) & (wl <= 1250.0)
    base = BaselineCurve().base(wl[plateau])
    for row in ds.samples:
        offset = row[plateau] - base
        assert np.ptp(offset) < 1e-12
        assert 0.02 <= offset[0] <= 0.32


def test_paired_leaves_share_brightness():
    ds = generate(SynthConfig(**QUIET))
    wl = ds.wavelengths
    plateau = (wl >= 800.0) & (wl <= 1250.0)
    by_id = dict(zip(ds.sample_ids, ds.samples))
    np.testing.assert_array_equal(by_id["I002-L1"][plateau], by_id["N002-L1"][plateau])
    assert not np.array_equal(by_id["I002-L1"][plateau], by_id["I002-L2"][plateau])


def test_junction_artifacts_touch_only_junction_bands(layout):
    clean = generate(SynthConfig(**QUIET))
    noisy = generate(SynthConfig(n_plants_per_class=3, noise_sd=0.0, junction_sd=0.05))
    touched = np.flatnonzero((noisy.samples != clean.samples).any(axis=0))
    expected = np.flatnonzero(junction_mask(clean.grid, layout, 5))
    assert touched.tolist() == expected.tolist()
    assert expected.size == 20


def test_effect_size():
    assert effect_size(SynthConfig()).value == pytest.approx(5.0)
    assert effect_size(SynthConfig(class_effect=0.0)).value == 0.0
    infinite = effect_size(SynthConfig(noise_sd=0.0))
    assert infinite.infinite
    assert math.isinf(infinite.value)
    assert infinite.to_dict() == {"value": None, "infinite": True}


def test_envelope_violations_are_rejected():
    with pytest.raises(SynthError, match="negative"):
        generate(SynthConfig(class_effect=0.6))
    with pytest.raises(SynthError, match=r"outside \(0, 1\)"):
        generate(SynthConfig(base_dip_depth=0.6))


def test_unbalanced_plant_counts():
    ds = generate(SynthConfig(n_plants_per_class=3, n_non_infected_plants=5))
    assert ds.class_counts() == (10, 6)


def test_all_stages_share_plants():
    ds = generate_stages(SynthConfig(n_plants_per_class=3))
    assert ds.stages() == [585.0, 897.0, 1216.0, 1568.0]
    assert ds.n_samples == 48
    assert len(set(ds.sample_ids)) == 48
    assert ds.sample_ids[0] == "G585-I001-L1"
    assert set(ds.for_stage(1216.0).plant_ids) == set(ds.for_stage(585.0).plant_ids)


def test_generate_stages_needs_a_stage():
    with pytest.raises(SynthError, match="no stages"):
        generate_stages(SynthConfig(n_plants_per_class=3), stages=[])


def test_early_and_late_presets_flip_rmd_sign(early_spectra):
    rmd = relative_mean_difference(class_mean_profile(early_spectra))
    band = int(np.argmin(np.abs(early_spectra.wavelengths - 1450.0)))
    assert rmd[band] < 0

    late = generate(SynthConfig(preset="late", stage_gdd=1216.0, n_plants_per_class=20))
    late_rmd = relative_mean_difference(class_mean_profile(late))
    assert late_rmd[band] > 0

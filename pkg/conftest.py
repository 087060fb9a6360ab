"""Shared fixtures: synthetic spectra and small labeled feature sets."""

import numpy as np
import pytest

from src.calculators.synthgen import generate
from src.models.config import SynthConfig
from src.models.learner_spec import LabeledDataset
from src.models.spectra import DetectorLayout, SpectralDataset, WavelengthGrid


@pytest.fixture(scope="session")
def layout():
    return DetectorLayout()


@pytest.fixture(scope="session")
def early_spectra():
    """Default early-preset stage: 49 plants per class, 2 leaves each."""
    return generate(SynthConfig(seed=42))


@pytest.fixture(scope="session")
def small_spectra():
    """6 plants per class, 24 leaves."""
    return generate(SynthConfig(n_plants_per_class=6, seed=3))


@pytest.fixture
def blobs():
    """Two overlapping Gaussian classes in 3-D, 20 rows each."""
    rng = np.random.default_rng(0)
    X = np.vstack([rng.normal(0.0, 1.0, (20, 3)), rng.normal(1.5, 1.0, (20, 3))])
    y = np.repeat([0, 1], 20)
    return LabeledDataset(X, y)


def tiny_dataset(samples, labels, wavelengths=None, plant_ids=None, stage=585.0):
    """SpectralDataset on a 1 nm grid from 400 nm unless `wavelengths` is given."""
    samples = np.asarray(samples, dtype=float)
    n, d = samples.shape
    if wavelengths is None:
        wavelengths = 400.0 + np.arange(d)
    return SpectralDataset(
        grid=WavelengthGrid(np.asarray(wavelengths, dtype=float)),
        samples=samples,
        labels=np.asarray(labels),
        plant_ids=plant_ids or [f"P{i:03d}" for i in range(n)],
        stage_gdd=np.full(n, stage),
    )

"""Synthetic leaf reflectance generator.

Each leaf is a smooth vegetation baseline with water absorption dips whose depth
depends on the plant's class, plus a flat per-leaf brightness offset, detector
noise and extra noise at the detector junctions.
"""

import dataclasses
import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..models.config import SynthConfig
from ..models.errors import SynthError
from ..models.seeds import derive_seed, rng_for
from ..models.spectra import DetectorLayout, LeafClass, SpectralDataset, WavelengthGrid
from .stage_rules import StageRules

logger = logging.getLogger(__name__)

DIP_CUTOFF_SD = 4.0
REFLECTANCE_FLOOR = 1e-4


def _cosine_step(wl: np.ndarray, x0: float, x1: float, y0: float, y1: float) -> np.ndarray:
    t = np.clip((wl - x0) / (x1 - x0), 0.0, 1.0)
    return y0 + (y1 - y0) * (1.0 - np.cos(np.pi * t)) / 2.0


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


@dataclass(frozen=True)
class BaselineCurve:
    """Healthy green leaf reflectance shape, without the water dips."""

    dip_centers_nm: Tuple[float, ...] = (1450.0, 1940.0)
    dip_width_nm: float = 40.0
    red_edge_nm: float = 715.0
    red_edge_width_nm: float = 10.0

    def base(self, wl: np.ndarray) -> np.ndarray:
        wl = np.asarray(wl, dtype=float)
        out = np.empty_like(wl)

        visible = wl <= 670.0
        rising = _cosine_step(wl, 400.0, 550.0, 0.08, 0.15)
        falling = _cosine_step(wl, 550.0, 670.0, 0.15, 0.05)
        out[visible] = np.where(wl[visible] <= 550.0, rising[visible], falling[visible])

        # red edge, normalised so it meets the trough at 670 and the plateau at 760
        edge = (wl > 670.0) & (wl < 760.0)
        lo = _sigmoid((670.0 - self.red_edge_nm) / self.red_edge_width_nm)
        hi = _sigmoid((760.0 - self.red_edge_nm) / self.red_edge_width_nm)
        s = (_sigmoid((wl[edge] - self.red_edge_nm) / self.red_edge_width_nm) - lo) / (hi - lo)
        out[edge] = 0.05 + 0.45 * s

        plateau = (wl >= 760.0) & (wl <= 1300.0)
        out[plateau] = 0.50

        swir = wl > 1300.0
        out[swir] = 0.50 - 0.35 * (wl[swir] - 1300.0) / 1200.0
        return out

    def dip_profile(self, wl: np.ndarray) -> np.ndarray:
        """Sum of unit-depth Gaussian dips, shifted to reach 0 at 4 SD and cut there."""
        wl = np.asarray(wl, dtype=float)
        floor = math.exp(-0.5 * DIP_CUTOFF_SD**2)
        total = np.zeros_like(wl)
        for center in self.dip_centers_nm:
            z = (wl - center) / self.dip_width_nm
            g = (np.exp(-0.5 * z**2) - floor) / (1.0 - floor)
            total += np.where(np.abs(z) <= DIP_CUTOFF_SD, g, 0.0)
        return np.clip(total, 0.0, 1.0)

    def brightness_envelope(self, wl: np.ndarray) -> np.ndarray:
        """Weight of the flat brightness term: 1 outside the dips, 0 at their centers."""
        return 1.0 - self.dip_profile(wl)

    def evaluate(self, wl: np.ndarray, dip_depth: float, brightness: float = 0.0) -> np.ndarray:
        wl = np.asarray(wl, dtype=float)
        return (
            self.base(wl)
            - dip_depth * self.dip_profile(wl)
            + brightness * self.brightness_envelope(wl)
        )


@dataclass(frozen=True)
class EffectSize:
    value: float
    infinite: bool = False

    def to_dict(self) -> dict:
        return {"value": None if self.infinite else self.value, "infinite": self.infinite}


def effect_size(cfg: SynthConfig) -> EffectSize:
    """Class effect over noise SD, the per-band signal-to-noise at the dip centers."""
    if cfg.class_effect == 0:
        return EffectSize(0.0)
    if cfg.noise_sd == 0:
        return EffectSize(math.inf, infinite=True)
    return EffectSize(cfg.class_effect / cfg.noise_sd)


def curve_for(cfg: SynthConfig) -> BaselineCurve:
    return BaselineCurve(dip_centers_nm=tuple(cfg.dip_centers_nm), dip_width_nm=cfg.dip_width_nm)


def dip_depths(cfg: SynthConfig) -> Tuple[float, float]:
    """(non_infected, infected) dip depths."""
    half = cfg.signed_effect / 2.0
    return cfg.base_dip_depth - half, cfg.base_dip_depth + half


def class_means(cfg: SynthConfig, wl: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Noise-free (non_infected, infected) mean spectra at mid-range brightness."""
    curve = curve_for(cfg)
    brightness = sum(cfg.brightness_range) / 2.0
    non, inf = dip_depths(cfg)
    return curve.evaluate(wl, non, brightness), curve.evaluate(wl, inf, brightness)


def check_envelope(cfg: SynthConfig, grid: WavelengthGrid) -> None:
    """Reject settings whose noise-free spectra leave (0, 1)."""
    curve = curve_for(cfg)
    wl = grid.wavelengths_nm
    depths = dip_depths(cfg)
    for depth in depths:
        if depth < 0:
            raise SynthError(f"dip depth {depth:g} is negative; reduce class_effect")
    for depth in depths:
        for brightness in cfg.brightness_range:
            values = curve.evaluate(wl, depth, brightness)
            if values.min() <= 0.0 or values.max() >= 1.0:
                raise SynthError(
                    f"dip depth {depth:g} with brightness {brightness:g} drives reflectance "
                    f"outside (0, 1) (range {values.min():.4f}..{values.max():.4f})"
                )


def junction_mask(grid: WavelengthGrid, layout: DetectorLayout, n_bands: int) -> np.ndarray:
    """Bands within `n_bands` native bands of a detector junction."""
    wl = grid.wavelengths_nm
    mask = np.zeros(len(grid), dtype=bool)
    if n_bands == 0:
        return mask
    for junction in layout.junctions:
        before = np.flatnonzero(wl <= junction)
        after = np.flatnonzero(wl > junction)
        mask[before[-n_bands:]] = True
        mask[after[:n_bands]] = True
    return mask


def plant_ids(cfg: SynthConfig) -> Tuple[List[str], List[str]]:
    """(infected, non_infected) plant identifiers."""
    infected = [f"I{k + 1:03d}" for k in range(cfg.n_plants_per_class)]
    healthy = [f"N{k + 1:03d}" for k in range(cfg.non_infected_plants)]
    return infected, healthy


def generate(
    cfg: SynthConfig,
    layout: Optional[DetectorLayout] = None,
    id_prefix: str = "",
) -> SpectralDataset:
    """
    Generate one stage of leaf spectra on the native detector grid.

    Leaf l of infected plant k and leaf l of non-infected plant k share their
    brightness draw, so class means differ only through the dip depth.

    Args:
        cfg: Generator settings
        layout: Detector segments, defaults to the three-detector instrument
        id_prefix: Prepended to every sample_id

    Returns:
        SpectralDataset ordered by (plant_id, leaf)
    """
    layout = layout or DetectorLayout()
    grid = layout.native_grid()
    check_envelope(cfg, grid)

    wl = grid.wavelengths_nm
    curve = curve_for(cfg)
    base = curve.base(wl)
    dips = curve.dip_profile(wl)
    envelope = curve.brightness_envelope(wl)
    artifacts = junction_mask(grid, layout, cfg.junction_bands)
    depth_non, depth_inf = dip_depths(cfg)
    low, high = cfg.brightness_range

    infected, healthy = plant_ids(cfg)
    plants = [(p, LeafClass.INFECTED, k, depth_inf) for k, p in enumerate(infected)]
    plants += [(p, LeafClass.NON_INFECTED, k, depth_non) for k, p in enumerate(healthy)]

    rows, labels, plant_col, sample_ids = [], [], [], []
    for plant, leaf_class, k, depth in plants:
        for leaf in range(1, cfg.leaves_per_plant + 1):
            brightness = rng_for(cfg.seed, "brightness", k, leaf).uniform(low, high)
            rng = rng_for(cfg.seed, "noise", plant, leaf)
            noise = rng.normal(0.0, cfg.noise_sd, size=wl.size) if cfg.noise_sd > 0 else 0.0
            values = base - depth * dips + brightness * envelope + noise
            if cfg.junction_sd > 0 and artifacts.any():
                values[artifacts] += rng.normal(0.0, cfg.junction_sd, size=int(artifacts.sum()))
            rows.append(np.clip(values, REFLECTANCE_FLOOR, 1.0))
            labels.append(leaf_class.value)
            plant_col.append(plant)
            sample_ids.append(f"{id_prefix}{plant}-L{leaf}")

    logger.info(
        "generated %d spectra (%s preset, stage %g GDD)", len(rows), cfg.preset, cfg.stage_gdd
    )
    return SpectralDataset(
        grid=grid,
        samples=np.vstack(rows),
        labels=np.array(labels),
        plant_ids=plant_col,
        stage_gdd=np.full(len(rows), float(cfg.stage_gdd)),
        sample_ids=sample_ids,
    )


def generate_stages(
    cfg: SynthConfig,
    layout: Optional[DetectorLayout] = None,
    stages: Optional[Sequence[float]] = None,
) -> SpectralDataset:
    """All sampled growth stages for the same plants, each with its stage preset."""
    stages = list(stages) if stages is not None else StageRules.TABLE.values
    if not stages:
        raise SynthError("no stages to generate")
    parts = []
    for stage in stages:
        stage_cfg = dataclasses.replace(
            cfg,
            stage_gdd=float(stage),
            preset=StageRules.synth_preset(stage),
            seed=derive_seed(cfg.seed, "stage", f"{float(stage):g}"),
        )
        parts.append(generate(stage_cfg, layout, id_prefix=f"G{float(stage):g}-"))
    first = parts[0]
    return SpectralDataset(
        grid=first.grid,
        samples=np.vstack([p.samples for p in parts]),
        labels=np.concatenate([p.labels for p in parts]),
        plant_ids=[pid for p in parts for pid in p.plant_ids],
        stage_gdd=np.concatenate([p.stage_gdd for p in parts]),
        sample_ids=[sid for p in parts for sid in p.sample_ids],
    )

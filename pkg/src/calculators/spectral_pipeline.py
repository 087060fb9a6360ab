"""Leaf spectra preprocessing and class-contrast diagnostics.

The chain is trim -> resample -> smooth -> merge -> scale. Band merging and
scaling are fitted on training rows only and replayed on other data through the
stored BandGroupMap and StandardScaler.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.signal import savgol_filter

from ..models.config import PreprocessConfig
from ..models.errors import PreprocessError
from ..models.results import BandGroup, BandGroupMap, ClassMeanProfile, StandardScaler
from ..models.seeds import rng_for
from ..models.spectra import DetectorLayout, LeafClass, SpectralDataset, Spectrum, WavelengthGrid

logger = logging.getLogger(__name__)

BALANCE_MODES = ("closest", "random")


# ---------------------------------------------------------------------------
# Trimming
# ---------------------------------------------------------------------------


def trim_mask(
    grid: WavelengthGrid,
    layout: DetectorLayout,
    cfg: PreprocessConfig,
    warnings: Optional[List[str]] = None,
) -> np.ndarray:
    """Boolean mask of the bands kept by range and junction trimming."""
    wl = grid.wavelengths_nm
    low, high = cfg.analysis_range_nm
    keep = (wl >= low) & (wl <= high)
    n = cfg.trim_bands
    if layout.junction_trim is not None and layout.junction_trim != n:
        raise PreprocessError(
            f"detector layout trims {layout.junction_trim} bands per junction "
            f"but preprocess.trim_bands is {n}"
        )
    if n == 0:
        return keep
    for junction in layout.junctions:
        before = np.flatnonzero(wl <= junction)
        after = np.flatnonzero(wl > junction)
        if before.size == 0 or after.size == 0:
            message = f"junction {junction:g} nm not inside grid; not trimmed"
            logger.warning(message)
            if warnings is not None:
                warnings.append(message)
            continue
        keep[before[-n:]] = False
        keep[after[:n]] = False
    return keep


def trim_detector_edges(
    s: Spectrum,
    layout: DetectorLayout,
    cfg: PreprocessConfig,
    warnings: Optional[List[str]] = None,
) -> Spectrum:
    """Drop bands outside the analysis range and the noisy bands around detector junctions."""
    keep = trim_mask(s.grid, layout, cfg, warnings)
    if not keep.any():
        raise PreprocessError("over-trimmed: no bands left")
    return Spectrum(WavelengthGrid(s.grid.wavelengths_nm[keep]), s.reflectance[keep])


def trim_dataset(
    ds: SpectralDataset,
    layout: DetectorLayout,
    cfg: PreprocessConfig,
    warnings: Optional[List[str]] = None,
) -> SpectralDataset:
    keep = trim_mask(ds.grid, layout, cfg, warnings)
    if not keep.any():
        raise PreprocessError("over-trimmed: no bands left")
    return ds.with_samples(WavelengthGrid(ds.wavelengths[keep]), ds.samples[:, keep])


# ---------------------------------------------------------------------------
# Resampling and smoothing
# ---------------------------------------------------------------------------


def target_grid(grid: WavelengthGrid, cfg: PreprocessConfig) -> WavelengthGrid:
    """Uniform grid inside the native range and the analysis range."""
    step = float(cfg.target_resolution_nm)
    low = max(grid.wavelengths_nm[0], cfg.analysis_range_nm[0])
    high = min(grid.wavelengths_nm[-1], cfg.analysis_range_nm[1])
    start = np.ceil(low / step - 1e-9) * step
    stop = np.floor(high / step + 1e-9) * step
    if stop < start:
        raise PreprocessError("native range holds no target wavelength")
    count = int(round((stop - start) / step)) + 1
    return WavelengthGrid(start + step * np.arange(count))


def _resample_rows(grid: WavelengthGrid, rows: np.ndarray, cfg: PreprocessConfig):
    if len(grid) < 2:
        raise PreprocessError("resampling needs at least 2 native bands")
    target = target_grid(grid, cfg)
    wl = grid.wavelengths_nm
    out = np.empty((rows.shape[0], len(target)))
    for i, row in enumerate(rows):
        out[i] = np.interp(target.wavelengths_nm, wl, row)
    return target, out


def resample_uniform(s: Spectrum, cfg: PreprocessConfig) -> Spectrum:
    """Linear interpolation onto the uniform target grid; never extrapolates."""
    target, values = _resample_rows(s.grid, s.reflectance[np.newaxis, :], cfg)
    return Spectrum(target, values[0])


def resample_dataset(ds: SpectralDataset, cfg: PreprocessConfig) -> SpectralDataset:
    target, values = _resample_rows(ds.grid, ds.samples, cfg)
    return ds.with_samples(target, values)


def _smooth_rows(grid: WavelengthGrid, rows: np.ndarray, cfg: PreprocessConfig) -> np.ndarray:
    if not grid.is_uniform:
        raise PreprocessError("Savitzky-Golay smoothing needs a uniform grid")
    if cfg.sg_window > len(grid):
        raise PreprocessError(
            f"smoothing window {cfg.sg_window} exceeds band count {len(grid)}"
        )
    # mode="interp" fits the edge window polynomial and evaluates it off-center
    return savgol_filter(rows, cfg.sg_window, cfg.sg_order, mode="interp", axis=-1)


def savgol_smooth(s: Spectrum, cfg: PreprocessConfig) -> Spectrum:
    """Least-squares polynomial smoothing; values may leave the measured range."""
    return Spectrum(s.grid, _smooth_rows(s.grid, s.reflectance, cfg), derived=True)


def smooth_dataset(ds: SpectralDataset, cfg: PreprocessConfig) -> SpectralDataset:
    return ds.with_samples(ds.grid, _smooth_rows(ds.grid, ds.samples, cfg), derived=True)


# ---------------------------------------------------------------------------
# Correlation and band merging
# ---------------------------------------------------------------------------


def pearson_r_flagged(x: Sequence[float], y: Sequence[float]) -> Tuple[float, bool]:
    """Pearson r and a flag set when either input is constant (r is then 0)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1 or x.size < 2:
        raise PreprocessError("pearson_r needs two equal-length lists of at least 2 values")
    if np.ptp(x) == 0.0 or np.ptp(y) == 0.0:
        return 0.0, True
    dx = x - x.mean()
    dy = y - y.mean()
    denom = np.sqrt(np.dot(dx, dx) * np.dot(dy, dy))
    if denom == 0.0:
        return 0.0, True
    r = float(np.dot(dx, dy) / denom)
    return min(1.0, max(-1.0, r)), False


def pearson_r(x: Sequence[float], y: Sequence[float]) -> float:
    return pearson_r_flagged(x, y)[0]


def band_correlation_matrix(
    ds: SpectralDataset, step: int = 1
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Pairwise Pearson correlation among bands.

    Args:
        ds: Dataset with at least 2 samples
        step: Keep every `step`-th band

    Returns:
        (wavelengths, correlation matrix); constant bands correlate 0 with the rest
    """
    if ds.n_samples < 2:
        raise PreprocessError("correlation undefined for fewer than 2 samples")
    if step < 1:
        raise PreprocessError("correlation step must be >= 1")
    cols = ds.samples[:, ::step]
    constant = np.ptp(cols, axis=0) == 0.0
    with np.errstate(invalid="ignore", divide="ignore"):
        corr = np.corrcoef(cols, rowvar=False)
    corr = np.atleast_2d(corr)
    corr[constant, :] = 0.0
    corr[:, constant] = 0.0
    np.fill_diagonal(corr, 1.0)
    return ds.wavelengths[::step].copy(), np.clip(corr, -1.0, 1.0)


def fit_band_map(ds: SpectralDataset, cfg: PreprocessConfig) -> BandGroupMap:
    """Seed-anchored left-to-right grouping of adjacent correlated bands."""
    if ds.n_samples < 2:
        raise PreprocessError("correlation undefined: need at least 2 samples")
    X = ds.samples
    wl = ds.wavelengths
    groups = []
    start = 0
    degenerate = 0
    for j in range(1, ds.n_bands):
        seed_col = X[:, start]
        cand = X[:, j]
        if np.array_equal(seed_col, cand):
            continue
        r, flagged = pearson_r_flagged(seed_col, cand)
        degenerate += int(flagged)
        if r > cfg.corr_threshold:
            continue
        groups.append(BandGroup(start, j, tuple(wl[start:j].tolist())))
        start = j
    groups.append(BandGroup(start, ds.n_bands, tuple(wl[start:].tolist())))
    if degenerate:
        logger.debug("%d band comparisons involved a constant column", degenerate)
    band_map = BandGroupMap(tuple(groups), ds.n_bands)
    logger.info(
        "merged %d bands into %d groups", band_map.original_band_count, band_map.reduced_band_count
    )
    return band_map


def apply_band_map(ds: SpectralDataset, band_map: BandGroupMap) -> SpectralDataset:
    """Average each group's columns; the dataset must be on the map's source grid."""
    if not np.array_equal(ds.wavelengths, band_map.member_wavelengths):
        raise PreprocessError("dataset grid does not match the band map")
    starts = np.array([g.start for g in band_map.groups])
    sizes = np.array([g.size for g in band_map.groups], dtype=float)
    merged = np.add.reduceat(ds.samples, starts, axis=1) / sizes
    return ds.with_samples(WavelengthGrid(band_map.representative_wavelengths), merged)


def merge_correlated_bands(
    ds: SpectralDataset, cfg: PreprocessConfig
) -> Tuple[SpectralDataset, BandGroupMap]:
    band_map = fit_band_map(ds, cfg)
    return apply_band_map(ds, band_map), band_map


# ---------------------------------------------------------------------------
# Scaling
# ---------------------------------------------------------------------------


def fit_scaler(train: SpectralDataset) -> StandardScaler:
    """Column means and population SDs of the training rows."""
    X = train.samples
    if X.shape[0] < 1:
        raise PreprocessError("cannot fit a scaler on an empty dataset")
    constant = np.ptp(X, axis=0) == 0.0
    sd = np.where(constant, 0.0, X.std(axis=0))
    if constant.any():
        logger.warning("%d constant feature(s) will scale to 0", int(constant.sum()))
    return StandardScaler(X.mean(axis=0), sd)


def apply_scaler(scaler: StandardScaler, ds: SpectralDataset) -> SpectralDataset:
    if ds.n_bands != scaler.n_features:
        raise PreprocessError(
            f"scaler expects {scaler.n_features} features, dataset has {ds.n_bands}"
        )
    return ds.with_samples(ds.grid, scaler.transform(ds.samples), scaled=True)


# ---------------------------------------------------------------------------
# Class contrast
# ---------------------------------------------------------------------------


def class_mean_profile(ds: SpectralDataset) -> ClassMeanProfile:
    inf = ds.labels == LeafClass.INFECTED.value
    if inf.all() or not inf.any():
        raise PreprocessError("class means need both classes")
    return ClassMeanProfile(
        wavelengths_nm=ds.wavelengths.copy(),
        mu_non=ds.samples[~inf].mean(axis=0),
        mu_inf=ds.samples[inf].mean(axis=0),
    )


def relative_mean_difference(profile: ClassMeanProfile) -> np.ndarray:
    """(mu_non - mu_inf) / mu_non per band."""
    zero = np.flatnonzero(profile.mu_non == 0.0)
    if zero.size:
        raise PreprocessError(
            f"undefined RMD at band {profile.wavelengths_nm[zero[0]]:g} nm (zero non-infected mean)"
        )
    return (profile.mu_non - profile.mu_inf) / profile.mu_non


# ---------------------------------------------------------------------------
# Class balancing
# ---------------------------------------------------------------------------


def _plant_rows(ds: SpectralDataset):
    rows = {}
    labels = {}
    for i, (plant, label) in enumerate(zip(ds.plant_ids, ds.labels)):
        rows.setdefault(plant, []).append(i)
        if labels.setdefault(plant, int(label)) != int(label):
            raise PreprocessError(f"plant {plant} has leaves of both classes")
    return rows, labels


def balance_dataset(ds: SpectralDataset, seed: int = 0, mode: str = "closest") -> SpectralDataset:
    """
    Subsample non-infected plants to the infected plant count.

    Candidates are non-infected plants whose mean reflectance lies within one
    population SD of the non-infected grand mean. "closest" keeps the candidates
    nearest the grand mean (ties by plant_id); "random" draws uniformly with `seed`.

    Args:
        ds: Raw or preprocessed reflectance dataset
        seed: Seed for "random" mode
        mode: "closest" or "random"

    Returns:
        Dataset with all infected plants and the selected non-infected plants, row order kept
    """
    if mode not in BALANCE_MODES:
        raise PreprocessError(f"balance mode must be one of {', '.join(BALANCE_MODES)}")
    rows, labels = _plant_rows(ds)
    infected = sorted(p for p, lab in labels.items() if lab == LeafClass.INFECTED.value)
    healthy = sorted(p for p, lab in labels.items() if lab == LeafClass.NON_INFECTED.value)
    if not infected or not healthy:
        raise PreprocessError("balancing needs both classes")
    if len(healthy) < len(infected):
        raise PreprocessError(
            f"{len(healthy)} non-infected plants is fewer than {len(infected)} infected"
        )

    means = np.array([ds.samples[rows[p]].mean() for p in healthy])
    grand = means.mean()
    spread = means.std()
    distance = np.abs(means - grand)
    candidates = [i for i in range(len(healthy)) if distance[i] <= spread]
    if len(candidates) < len(infected):
        raise PreprocessError(
            f"only {len(candidates)} non-infected plants within 1 SD of the mean; "
            f"{len(infected)} needed (short by {len(infected) - len(candidates)})"
        )

    if mode == "closest":
        ranked = sorted(candidates, key=lambda i: (distance[i], healthy[i]))
        chosen = ranked[: len(infected)]
    else:
        rng = rng_for(seed, "balance")
        chosen = rng.choice(np.array(candidates), size=len(infected), replace=False).tolist()
    keep_plants = set(infected) | {healthy[i] for i in chosen}
    keep = [i for i, plant in enumerate(ds.plant_ids) if plant in keep_plants]
    logger.info(
        "balanced %d infected plants against %d of %d non-infected plants",
        len(infected),
        len(chosen),
        len(healthy),
    )
    return ds.subset(keep)


# ---------------------------------------------------------------------------
# Fitted recipe
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FittedPreprocessing:
    """Everything needed to turn raw native-grid spectra into model features."""

    config: PreprocessConfig
    layout: DetectorLayout
    native_grid: WavelengthGrid
    band_map: BandGroupMap
    scaler: StandardScaler

    def prepare(self, raw: SpectralDataset) -> SpectralDataset:
        if raw.grid != self.native_grid:
            raise PreprocessError("spectra are not on the grid this model was trained on")
        return prepare_spectra(raw, self.layout, self.config)

    def merged(self, raw: SpectralDataset) -> SpectralDataset:
        return apply_band_map(self.prepare(raw), self.band_map)

    def features(self, raw: SpectralDataset) -> SpectralDataset:
        """Scaled merged-band features for raw spectra."""
        return apply_scaler(self.scaler, self.merged(raw))

    def to_dict(self) -> dict:
        return {
            "preprocess": self.config.to_dict(),
            "detector_layout": self.layout.to_dict(),
            "native_grid_nm": self.native_grid.wavelengths_nm.tolist(),
            "band_group_map": self.band_map.to_dict(),
            "scaler": self.scaler.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "FittedPreprocessing":
        return cls(
            config=PreprocessConfig.from_dict(data["preprocess"]),
            layout=DetectorLayout.from_dict(data["detector_layout"]),
            native_grid=WavelengthGrid(np.array(data["native_grid_nm"], dtype=float)),
            band_map=BandGroupMap.from_dict(data["band_group_map"]),
            scaler=StandardScaler.from_dict(data["scaler"]),
        )


def prepare_spectra(
    raw: SpectralDataset,
    layout: DetectorLayout,
    cfg: PreprocessConfig,
    warnings: Optional[List[str]] = None,
) -> SpectralDataset:
    """Trim, resample and smooth every row."""
    trimmed = trim_dataset(raw, layout, cfg, warnings)
    return smooth_dataset(resample_dataset(trimmed, cfg), cfg)


def fit_preprocessing(
    raw_train: SpectralDataset,
    layout: DetectorLayout,
    cfg: PreprocessConfig,
    warnings: Optional[List[str]] = None,
) -> FittedPreprocessing:
    """Fit the band map and scaler on training rows."""
    prepared = prepare_spectra(raw_train, layout, cfg, warnings)
    merged, band_map = merge_correlated_bands(prepared, cfg)
    return FittedPreprocessing(
        config=cfg,
        layout=layout,
        native_grid=raw_train.grid,
        band_map=band_map,
        scaler=fit_scaler(merged),
    )

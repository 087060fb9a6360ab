"""Spectral data models."""

from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import DataFormatError

WAVELENGTH_MIN_NM = 300.0
WAVELENGTH_MAX_NM = 2600.0
REFLECTANCE_MAX = 1.5  # white-reference ratios may slightly exceed 1


class LeafClass(Enum):
    """Binary class of a leaf sample; the value is the CSV label."""

    NON_INFECTED = 0
    INFECTED = 1


@dataclass(frozen=True, eq=False)
class WavelengthGrid:
    """Ordered band centers in nm."""

    wavelengths_nm: np.ndarray

    def __post_init__(self):
        wl = np.asarray(self.wavelengths_nm, dtype=float)
        object.__setattr__(self, "wavelengths_nm", wl)
        if wl.ndim != 1 or wl.size == 0:
            raise DataFormatError("wavelength grid must be a non-empty 1-D list")
        if not np.all(np.isfinite(wl)):
            raise DataFormatError("wavelength grid contains non-finite values")
        if wl.size > 1 and not np.all(np.diff(wl) > 0):
            raise DataFormatError("wavelength grid must be strictly increasing")
        if wl[0] < WAVELENGTH_MIN_NM or wl[-1] > WAVELENGTH_MAX_NM:
            raise DataFormatError(
                f"wavelengths must lie within [{WAVELENGTH_MIN_NM:g}, {WAVELENGTH_MAX_NM:g}] nm"
            )

    def __len__(self) -> int:
        return int(self.wavelengths_nm.size)

    def __eq__(self, other) -> bool:
        if not isinstance(other, WavelengthGrid):
            return NotImplemented
        return np.array_equal(self.wavelengths_nm, other.wavelengths_nm)

    @property
    def step(self) -> Optional[float]:
        """Common spacing when the grid is uniform, else None."""
        if len(self) < 2:
            return None
        diffs = np.diff(self.wavelengths_nm)
        if np.allclose(diffs, diffs[0], rtol=0.0, atol=1e-9):
            return float(diffs[0])
        return None

    @property
    def is_uniform(self) -> bool:
        return self.step is not None


@dataclass(frozen=True, eq=False)
class Spectrum:
    """One reflectance measurement on a wavelength grid.

    `derived=True` marks filtered values (smoothing may overshoot the measured
    range); only finiteness is checked then.
    """

    grid: WavelengthGrid
    reflectance: np.ndarray
    derived: bool = False

    def __post_init__(self):
        values = np.asarray(self.reflectance, dtype=float)
        object.__setattr__(self, "reflectance", values)
        if values.shape != (len(self.grid),):
            raise DataFormatError(
                f"spectrum has {values.size} values for {len(self.grid)} bands"
            )
        if self.derived:
            _check_finite(values[np.newaxis, :])
        else:
            _check_reflectance(values[np.newaxis, :])


@dataclass(eq=False)
class SpectralDataset:
    """Wavelength-indexed samples with class labels and growth stage.

    `samples` holds one row per leaf. Datasets produced by `apply_scaler` carry
    z-scores rather than reflectance and set `scaled=True`. Smoothed datasets,
    and anything built from them, set `derived=True`. Either flag skips
    the reflectance range check.
    """

    grid: WavelengthGrid
    samples: np.ndarray
    labels: np.ndarray
    plant_ids: List[str]
    stage_gdd: np.ndarray
    sample_ids: List[str] = field(default_factory=list)
    scaled: bool = False
    derived: bool = False

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=float)
        self.labels = np.asarray(self.labels, dtype=int)
        self.stage_gdd = np.asarray(self.stage_gdd, dtype=float)
        self.plant_ids = [str(p) for p in self.plant_ids]
        n = self.samples.shape[0] if self.samples.ndim == 2 else -1
        if self.samples.ndim != 2 or self.samples.shape[1] != len(self.grid):
            raise DataFormatError(
                f"sample matrix shape {self.samples.shape} does not match {len(self.grid)} bands"
            )
        if not self.sample_ids:
            self.sample_ids = [f"S{i:04d}" for i in range(n)]
        self.sample_ids = [str(s) for s in self.sample_ids]
        for name, size in (
            ("labels", self.labels.shape[0]),
            ("plant_ids", len(self.plant_ids)),
            ("stage_gdd", self.stage_gdd.shape[0]),
            ("sample_ids", len(self.sample_ids)),
        ):
            if size != n:
                raise DataFormatError(f"{name} has {size} entries for {n} samples")
        if n and not np.all(np.isin(self.labels, (0, 1))):
            raise DataFormatError("labels must be 0 (non_infected) or 1 (infected)")
        if self.scaled or self.derived:
            _check_finite(self.samples)
        else:
            _check_reflectance(self.samples)

    @property
    def n_samples(self) -> int:
        return int(self.samples.shape[0])

    @property
    def n_bands(self) -> int:
        return int(self.samples.shape[1])

    @property
    def wavelengths(self) -> np.ndarray:
        return self.grid.wavelengths_nm

    def class_counts(self) -> Tuple[int, int]:
        """(non_infected, infected) sample counts."""
        n_inf = int(np.sum(self.labels == LeafClass.INFECTED.value))
        return self.n_samples - n_inf, n_inf

    def spectrum(self, index: int) -> Spectrum:
        """Row `index` as a Spectrum; z-scored rows cannot be viewed this way."""
        if self.scaled:
            raise DataFormatError("scaled features are not reflectance spectra")
        return Spectrum(self.grid, self.samples[index], derived=self.derived)

    def subset(self, indices: Sequence[int]) -> "SpectralDataset":
        """Rows at `indices`, in that order."""
        idx = np.asarray(indices, dtype=int)
        return SpectralDataset(
            grid=self.grid,
            samples=self.samples[idx],
            labels=self.labels[idx],
            plant_ids=[self.plant_ids[i] for i in idx],
            stage_gdd=self.stage_gdd[idx],
            sample_ids=[self.sample_ids[i] for i in idx],
            scaled=self.scaled,
            derived=self.derived,
        )

    def with_samples(
        self,
        grid: WavelengthGrid,
        samples: np.ndarray,
        scaled: Optional[bool] = None,
        derived: Optional[bool] = None,
    ) -> "SpectralDataset":
        """Same rows and metadata, new band values."""
        return SpectralDataset(
            grid=grid,
            samples=samples,
            labels=self.labels.copy(),
            plant_ids=list(self.plant_ids),
            stage_gdd=self.stage_gdd.copy(),
            sample_ids=list(self.sample_ids),
            scaled=self.scaled if scaled is None else scaled,
            derived=self.derived if derived is None else derived,
        )

    def stages(self) -> List[float]:
        return sorted(set(float(s) for s in self.stage_gdd))

    def for_stage(self, stage_gdd: float) -> "SpectralDataset":
        idx = np.flatnonzero(self.stage_gdd == float(stage_gdd))
        if idx.size == 0:
            raise DataFormatError(f"no samples at stage {stage_gdd:g} GDD")
        return self.subset(idx)


def _check_finite(values: np.ndarray) -> None:
    if not np.all(np.isfinite(values)):
        rows = np.flatnonzero(~np.all(np.isfinite(values), axis=1))
        raise DataFormatError(f"non-finite value in sample {int(rows[0])}")


def _check_reflectance(values: np.ndarray) -> None:
    _check_finite(values)
    if values.size and (values.min() < 0.0 or values.max() > REFLECTANCE_MAX):
        raise DataFormatError(f"reflectance outside [0, {REFLECTANCE_MAX:g}]")


@dataclass(frozen=True)
class DetectorLayout:
    """Spectroradiometer detector segments as (start_nm, end_nm, nominal_bandwidth_nm).

    Band centers of the first segment are laid out downward from its upper edge,
    so the first junction is itself a band center; every later segment starts one
    bandwidth above its lower edge. `junction_trim` is the instrument's recommended
    junction trim; when set, preprocessing refuses a different `trim_bands`.
    """

    segments: Tuple[Tuple[float, float, float], ...] = (
        (350.0, 1000.0, 1.5),
        (1000.0, 1890.0, 3.8),
        (1890.0, 2500.0, 2.5),
    )
    junction_trim: Optional[int] = None

    def __post_init__(self):
        segs = tuple(tuple(float(v) for v in s) for s in self.segments)
        object.__setattr__(self, "segments", segs)
        if not segs:
            raise DataFormatError("detector layout needs at least one segment")
        for start, end, bandwidth in segs:
            if not start < end or bandwidth <= 0:
                raise DataFormatError(f"invalid detector segment ({start}, {end}, {bandwidth})")
        for (_, prev_end, _), (start, _, _) in zip(segs, segs[1:]):
            if prev_end != start:
                raise DataFormatError("detector segments must be contiguous and ordered")
        if self.junction_trim is not None and self.junction_trim < 0:
            raise DataFormatError("junction trim count must be >= 0")

    @property
    def junctions(self) -> List[float]:
        return [end for _, end, _ in self.segments[:-1]]

    def native_grid(self) -> WavelengthGrid:
        """Band centers the instrument reports."""
        points: List[float] = []
        for i, (start, end, bandwidth) in enumerate(self.segments):
            if i == 0:
                count = int(np.floor((end - start) / bandwidth + 1e-9))
                seg = end - bandwidth * np.arange(count, -1, -1)
            else:
                count = int(np.floor((end - start) / bandwidth + 1e-9))
                seg = start + bandwidth * np.arange(1, count + 1)
            points.extend(np.round(seg, 4).tolist())
        return WavelengthGrid(np.asarray(points))

    def to_dict(self) -> dict:
        return {
            "segments": [list(s) for s in self.segments],
            "junction_trim": self.junction_trim,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DetectorLayout":
        return cls(
            segments=tuple(tuple(s) for s in data["segments"]),
            junction_trim=data.get("junction_trim"),
        )

"""Result models produced by the preprocessing, ensemble and evaluation stages."""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import DataFormatError, PreprocessError


@dataclass(frozen=True)
class BandGroup:
    """A contiguous run of bands averaged into one feature.

    `start`/`stop` index the source grid (half-open).
    """

    start: int
    stop: int
    members_nm: Tuple[float, ...]

    @property
    def representative_nm(self) -> float:
        return float(np.mean(self.members_nm))

    @property
    def size(self) -> int:
        return self.stop - self.start

    def to_dict(self) -> dict:
        return {"members_nm": list(self.members_nm), "representative_nm": self.representative_nm}


@dataclass(frozen=True)
class BandGroupMap:
    """Audit trail of the correlation band merge."""

    groups: Tuple[BandGroup, ...]
    original_band_count: int

    def __post_init__(self):
        expected = 0
        for group in self.groups:
            if group.start != expected or group.stop <= group.start:
                raise PreprocessError("band groups must be contiguous and non-empty")
            if len(group.members_nm) != group.size:
                raise PreprocessError("band group member count does not match its index span")
            expected = group.stop
        if expected != self.original_band_count:
            raise PreprocessError(
                f"band groups cover {expected} of {self.original_band_count} bands"
            )

    @property
    def reduced_band_count(self) -> int:
        return len(self.groups)

    @property
    def member_wavelengths(self) -> np.ndarray:
        return np.array([wl for g in self.groups for wl in g.members_nm])

    @property
    def representative_wavelengths(self) -> np.ndarray:
        return np.array([g.representative_nm for g in self.groups])

    def group_of(self, wavelength_nm: float) -> int:
        """Index of the group holding `wavelength_nm` exactly."""
        for i, group in enumerate(self.groups):
            if wavelength_nm in group.members_nm:
                return i
        raise KeyError(wavelength_nm)

    def to_dict(self) -> dict:
        return {
            "original_band_count": self.original_band_count,
            "reduced_band_count": self.reduced_band_count,
            "groups": [g.to_dict() for g in self.groups],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "BandGroupMap":
        groups = []
        start = 0
        for item in data["groups"]:
            members = tuple(float(v) for v in item["members_nm"])
            groups.append(BandGroup(start, start + len(members), members))
            start += len(members)
        return cls(tuple(groups), int(data["original_band_count"]))


@dataclass(frozen=True, eq=False)
class StandardScaler:
    """Per-feature z-score parameters (population SD).

    Columns whose training values are all equal are degenerate: their SD is stored
    as 0 and they scale to 0.
    """

    mean: np.ndarray
    sd: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "mean", np.asarray(self.mean, dtype=float))
        object.__setattr__(self, "sd", np.asarray(self.sd, dtype=float))
        if self.mean.shape != self.sd.shape or self.mean.ndim != 1:
            raise PreprocessError("scaler mean and sd must be 1-D and of equal length")
        if np.any(self.sd < 0):
            raise PreprocessError("scaler SDs must be >= 0")

    @property
    def n_features(self) -> int:
        return int(self.mean.size)

    @property
    def degenerate(self) -> np.ndarray:
        return self.sd == 0.0

    def transform(self, features: np.ndarray) -> np.ndarray:
        features = np.asarray(features, dtype=float)
        if features.ndim != 2 or features.shape[1] != self.n_features:
            raise PreprocessError(
                f"scaler fitted on {self.n_features} features, got {features.shape[-1]}"
            )
        safe_sd = np.where(self.degenerate, 1.0, self.sd)
        scaled = (features - self.mean) / safe_sd
        scaled[:, self.degenerate] = 0.0
        return scaled

    def to_dict(self) -> dict:
        return {
            "mean": self.mean.tolist(),
            "sd": self.sd.tolist(),
            "degenerate": np.flatnonzero(self.degenerate).tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "StandardScaler":
        return cls(np.array(data["mean"], dtype=float), np.array(data["sd"], dtype=float))


@dataclass(frozen=True, eq=False)
class ClassMeanProfile:
    """Per-band class mean reflectance."""

    wavelengths_nm: np.ndarray
    mu_non: np.ndarray
    mu_inf: np.ndarray

    def __post_init__(self):
        for name in ("wavelengths_nm", "mu_non", "mu_inf"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        n = self.wavelengths_nm.size
        if self.mu_non.shape != (n,) or self.mu_inf.shape != (n,):
            raise PreprocessError("class mean profile lengths differ")
        if not (np.all(np.isfinite(self.mu_non)) and np.all(np.isfinite(self.mu_inf))):
            raise PreprocessError("class mean profile contains non-finite values")


@dataclass(frozen=True)
class DataSplit:
    """Row indices of the train/validation/test partition."""

    train: Tuple[int, ...]
    validation: Tuple[int, ...]
    test: Tuple[int, ...]
    seed: int
    stratified: bool = True

    def __post_init__(self):
        parts = [tuple(int(i) for i in p) for p in (self.train, self.validation, self.test)]
        for name, part in zip(("train", "validation", "test"), parts):
            object.__setattr__(self, name, part)
        all_idx = [i for part in parts for i in part]
        if len(all_idx) != len(set(all_idx)):
            raise DataFormatError("split index lists overlap")
        if sorted(all_idx) != list(range(len(all_idx))):
            raise DataFormatError("split indices must cover 0..n-1")

    @property
    def n_samples(self) -> int:
        return len(self.train) + len(self.validation) + len(self.test)

    def part(self, name: str) -> Tuple[int, ...]:
        if name not in ("train", "validation", "test"):
            raise KeyError(name)
        return getattr(self, name)

    def to_dict(self) -> dict:
        return {
            "train": list(self.train),
            "validation": list(self.validation),
            "test": list(self.test),
            "seed": self.seed,
            "stratified": self.stratified,
        }


@dataclass(frozen=True, eq=False)
class OofMatrix:
    """Out-of-fold probabilities, one column per pool model."""

    values: np.ndarray
    folds: np.ndarray
    model_ids: Tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        object.__setattr__(self, "folds", np.asarray(self.folds, dtype=int))
        object.__setattr__(self, "model_ids", tuple(self.model_ids))
        if self.values.shape != (self.folds.size, len(self.model_ids)):
            raise DataFormatError("OOF matrix shape does not match folds and model ids")

    @property
    def n_models(self) -> int:
        return len(self.model_ids)

    def column(self, model_id: str) -> np.ndarray:
        return self.values[:, self.model_ids.index(model_id)]

    def restrict(self, model_ids: Sequence[str]) -> "OofMatrix":
        cols = [self.model_ids.index(m) for m in model_ids]
        return OofMatrix(self.values[:, cols], self.folds, tuple(model_ids))


@dataclass(frozen=True)
class SelectionDecision:
    model_id: str
    auc: float
    accepted: bool
    reason: str

    def to_dict(self) -> dict:
        return {
            "model": self.model_id,
            "auc": self.auc,
            "accepted": self.accepted,
            "reason": self.reason,
        }


@dataclass(frozen=True, eq=False)
class SelectionReport:
    model_ids: Tuple[str, ...]
    auc: Dict[str, float]
    correlation: np.ndarray
    selected: Tuple[str, ...]
    trace: Tuple[SelectionDecision, ...]
    degenerate: Tuple[str, ...] = ()

    def mean_abs_correlation(self, model_id: str) -> float:
        """Average |r| of one model against the rest of the pool."""
        i = self.model_ids.index(model_id)
        others = np.delete(np.abs(self.correlation[i]), i)
        return float(others.mean()) if others.size else 0.0

    def to_dict(self) -> dict:
        return {
            "models": list(self.model_ids),
            "auc": {m: self.auc[m] for m in self.model_ids},
            "mean_abs_correlation": {m: self.mean_abs_correlation(m) for m in self.model_ids},
            "correlation": self.correlation.tolist(),
            "degenerate_columns": list(self.degenerate),
            "selected": list(self.selected),
            "trace": [d.to_dict() for d in self.trace],
        }


@dataclass(frozen=True)
class ConfusionMatrix:
    """Counts with infected as the positive class."""

    tp: int
    fp: int
    tn: int
    fn: int

    def __post_init__(self):
        if min(self.tp, self.fp, self.tn, self.fn) < 0:
            raise DataFormatError("confusion counts must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def to_dict(self) -> dict:
        return {"tp": self.tp, "fp": self.fp, "tn": self.tn, "fn": self.fn}


@dataclass(frozen=True)
class MetricsReport:
    """Threshold metrics derived from one ConfusionMatrix.

    Ratios with a zero denominator are None and named in `undefined`.
    """

    confusion: ConfusionMatrix
    accuracy: Optional[float]
    recall_infected: Optional[float]
    specificity: Optional[float]
    precision: Optional[float]
    f1: Optional[float]
    auc: Optional[float]
    threshold: float
    undefined: Tuple[str, ...] = ()
    split: Optional[str] = None
    stage_gdd: Optional[float] = None

    @property
    def recall_non_infected(self) -> Optional[float]:
        return self.specificity

    def to_dict(self) -> dict:
        return {
            "stage_gdd": self.stage_gdd,
            "split": self.split,
            "confusion": self.confusion.to_dict(),
            "accuracy": self.accuracy,
            "recall_infected": self.recall_infected,
            "specificity": self.specificity,
            "precision": self.precision,
            "f1": self.f1,
            "auc": self.auc,
            "threshold": self.threshold,
            "undefined": list(self.undefined),
        }


@dataclass(frozen=True, eq=False)
class ImportanceProfile:
    """Permutation importance per merged band."""

    representative_nm: np.ndarray
    importance_mean: np.ndarray
    importance_sd: np.ndarray
    aggregation: str = "ensemble"
    baseline_auc: float = float("nan")
    n_repeats: int = 0
    drops: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        for name in ("representative_nm", "importance_mean", "importance_sd"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        n = self.representative_nm.size
        if self.importance_mean.shape != (n,) or self.importance_sd.shape != (n,):
            raise DataFormatError("importance profile lengths differ")
        if np.any(self.importance_sd < 0):
            raise DataFormatError("importance SDs must be >= 0")

    def top(self, count: int) -> List[int]:
        """Indices of the `count` most important bands, ties by wavelength order."""
        order = np.argsort(-self.importance_mean, kind="stable")
        return order[:count].tolist()

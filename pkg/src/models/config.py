"""Configuration models and the JSON run configuration."""

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

from .errors import ConfigError

PRESETS = ("early", "late")


def _from_mapping(cls, data: Any, section: str):
    """Build dataclass `cls` from a dict, rejecting keys it does not declare."""
    if data is None:
        return cls()
    if not isinstance(data, dict):
        raise ConfigError(f"config section '{section}' must be an object")
    known = {f.name: f for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, value in data.items():
        if key not in known:
            raise ConfigError(f"unknown config key: {section}.{key}")
        if isinstance(value, list):
            value = tuple(value)
        kwargs[key] = value
    try:
        return cls(**kwargs)
    except TypeError as e:
        raise ConfigError(f"invalid config section '{section}': {e}") from e


@dataclass(frozen=True)
class PreprocessConfig:
    """Deterministic preprocessing recipe."""

    analysis_range_nm: Tuple[float, float] = (400.0, 2500.0)
    trim_bands: int = 5
    target_resolution_nm: float = 1.0
    sg_order: int = 2
    sg_window: int = 7
    corr_threshold: float = 0.99

    def __post_init__(self):
        low, high = (float(v) for v in self.analysis_range_nm)
        object.__setattr__(self, "analysis_range_nm", (low, high))
        if not low < high:
            raise ConfigError("preprocess.analysis_range_nm must satisfy low < high")
        if self.trim_bands < 0:
            raise ConfigError("preprocess.trim_bands must be >= 0")
        if self.target_resolution_nm <= 0:
            raise ConfigError("preprocess.target_resolution_nm must be > 0")
        if self.sg_window % 2 != 1 or self.sg_window <= self.sg_order or self.sg_order < 0:
            raise ConfigError("preprocess.sg_window must be odd and greater than sg_order")
        if not 0.0 < self.corr_threshold <= 1.0:
            raise ConfigError("preprocess.corr_threshold must lie in (0, 1]")

    def to_dict(self) -> dict:
        data = dataclasses.asdict(self)
        data["analysis_range_nm"] = list(self.analysis_range_nm)
        return data

    @classmethod
    def from_dict(cls, data: dict, section: str = "preprocess") -> "PreprocessConfig":
        return _from_mapping(cls, data, section)


@dataclass(frozen=True)
class GddConfig:
    """Growing degree day settings."""

    t_base: float = 10.0
    clamp_negative: bool = True

    def __post_init__(self):
        try:
            t_base = float(self.t_base)
        except (TypeError, ValueError) as e:
            raise ConfigError("gdd.t_base must be a number") from e
        if t_base != t_base or t_base in (float("inf"), float("-inf")):
            raise ConfigError("gdd.t_base must be finite")

    @classmethod
    def from_dict(cls, data: dict, section: str = "gdd") -> "GddConfig":
        return _from_mapping(cls, data, section)


@dataclass(frozen=True)
class SynthConfig:
    """Synthetic leaf spectra generator settings.

    `class_effect` is the magnitude of the dip-depth difference between classes;
    its sign comes from the preset (early: infected dips shallower).
    """

    n_plants_per_class: int = 49
    n_non_infected_plants: Optional[int] = None
    leaves_per_plant: int = 2
    preset: str = "early"
    dip_centers_nm: Tuple[float, ...] = (1450.0, 1940.0)
    dip_width_nm: float = 40.0
    base_dip_depth: float = 0.25
    class_effect: float = 0.05
    noise_sd: float = 0.01
    junction_sd: float = 0.05
    junction_bands: int = 5
    brightness_range: Tuple[float, float] = (0.02, 0.32)
    stage_gdd: float = 585.0
    seed: int = 42

    def __post_init__(self):
        if self.preset not in PRESETS:
            raise ConfigError(f"synth.preset must be one of {', '.join(PRESETS)}")
        if self.n_plants_per_class < 2 or self.non_infected_plants < 2:
            raise ConfigError("synth needs at least 2 plants per class")
        if self.non_infected_plants < self.n_plants_per_class:
            raise ConfigError("synth.n_non_infected_plants must be >= n_plants_per_class")
        if self.leaves_per_plant < 1:
            raise ConfigError("synth.leaves_per_plant must be >= 1")
        if self.dip_width_nm <= 0:
            raise ConfigError("synth.dip_width_nm must be > 0")
        if self.noise_sd < 0 or self.junction_sd < 0 or self.class_effect < 0:
            raise ConfigError("synth noise levels and class_effect must be >= 0")
        low, high = self.brightness_range
        if not 0 <= low <= high:
            raise ConfigError("synth.brightness_range must satisfy 0 <= low <= high")

    @property
    def non_infected_plants(self) -> int:
        if self.n_non_infected_plants is None:
            return self.n_plants_per_class
        return self.n_non_infected_plants

    @property
    def signed_effect(self) -> float:
        """Dip-depth shift applied to infected plants (negative = shallower)."""
        return -self.class_effect if self.preset == "early" else self.class_effect

    def to_dict(self) -> dict:
        data = dataclasses.asdict(self)
        data["dip_centers_nm"] = list(self.dip_centers_nm)
        data["brightness_range"] = list(self.brightness_range)
        return data

    @classmethod
    def from_dict(cls, data: dict, section: str = "synth") -> "SynthConfig":
        return _from_mapping(cls, data, section)


@dataclass(frozen=True)
class EnsembleConfig:
    """Split, out-of-fold and model selection settings."""

    k_folds: int = 5
    ratios: Tuple[float, float, float] = (0.65, 0.15, 0.20)
    max_models: int = 4
    corr_ceiling: float = 0.95
    auc_floor: float = 0.5
    pool: Tuple[str, ...] = (
        "decision_tree",
        "random_forest",
        "boosted_trees",
        "svm_rbf",
        "gaussian_nb",
        "knn",
        "logreg",
    )

    def __post_init__(self):
        if self.k_folds < 2:
            raise ConfigError("ensemble.k_folds must be >= 2")
        if len(self.ratios) != 3 or any(r < 0 for r in self.ratios):
            raise ConfigError("ensemble.ratios must be three non-negative numbers")
        if abs(sum(self.ratios) - 1.0) > 1e-9:
            raise ConfigError("ensemble.ratios must sum to 1")
        if self.max_models < 1:
            raise ConfigError("ensemble.max_models must be >= 1")
        if not 0.0 <= self.corr_ceiling <= 1.0:
            raise ConfigError("ensemble.corr_ceiling must lie in [0, 1]")
        if not self.pool:
            raise ConfigError("ensemble.pool must not be empty")

    def to_dict(self) -> dict:
        data = dataclasses.asdict(self)
        data["ratios"] = list(self.ratios)
        data["pool"] = list(self.pool)
        return data

    @classmethod
    def from_dict(cls, data: dict, section: str = "ensemble") -> "EnsembleConfig":
        return _from_mapping(cls, data, section)


@dataclass(frozen=True)
class EvaluationConfig:
    threshold: float = 0.5
    n_repeats: int = 10

    def __post_init__(self):
        if not 0.0 < self.threshold < 1.0:
            raise ConfigError("evaluation.threshold must lie in (0, 1)")
        if self.n_repeats < 1:
            raise ConfigError("evaluation.n_repeats must be >= 1")

    @classmethod
    def from_dict(cls, data: dict, section: str = "evaluation") -> "EvaluationConfig":
        return _from_mapping(cls, data, section)


@dataclass(frozen=True)
class RunConfig:
    """Merged view of every configurable part of a batch run."""

    preprocess: PreprocessConfig = field(default_factory=PreprocessConfig)
    gdd: GddConfig = field(default_factory=GddConfig)
    learners: Dict[str, Dict[str, Any]] = field(default_factory=dict)
    ensemble: EnsembleConfig = field(default_factory=EnsembleConfig)
    evaluation: EvaluationConfig = field(default_factory=EvaluationConfig)
    synth: SynthConfig = field(default_factory=SynthConfig)
    seed: int = 42
    threads: Optional[int] = None
    stage_gdd: Optional[float] = None
    input_path: Optional[str] = None
    output_path: Optional[str] = None

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        from .learner_spec import LearnerFamily, LearnerSpec

        if not isinstance(data, dict):
            raise ConfigError("run config must be a JSON object")
        sections = {
            "preprocess": PreprocessConfig.from_dict,
            "gdd": GddConfig.from_dict,
            "ensemble": EnsembleConfig.from_dict,
            "evaluation": EvaluationConfig.from_dict,
            "synth": SynthConfig.from_dict,
        }
        scalars = ("seed", "threads", "stage_gdd", "input_path", "output_path")
        kwargs: Dict[str, Any] = {}
        for key, value in data.items():
            if key in sections:
                kwargs[key] = sections[key](value)
            elif key == "learners":
                if not isinstance(value, dict):
                    raise ConfigError("config section 'learners' must be an object")
                for family, params in value.items():
                    try:
                        LearnerFamily(family)
                    except ValueError as e:
                        raise ConfigError(f"unknown config key: learners.{family}") from e
                    # validates parameter names and ranges
                    LearnerSpec.create(family, params=params, section=f"learners.{family}")
                kwargs[key] = {k: dict(v) for k, v in value.items()}
            elif key in scalars:
                kwargs[key] = value
            else:
                raise ConfigError(f"unknown config key: {key}")
        config = cls(**kwargs)
        if config.threads is not None and int(config.threads) < 1:
            raise ConfigError("threads must be >= 1")
        return config

    def learner_spec(self, family: str, seed: Optional[int] = None):
        """LearnerSpec for `family` with this config's overrides applied."""
        from .learner_spec import LearnerSpec

        return LearnerSpec.create(
            family,
            params=self.learners.get(family),
            seed=self.seed if seed is None else seed,
        )


def load_run_config(path: Optional[Path]) -> RunConfig:
    """Read a RunConfig from JSON; defaults when `path` is None."""
    if path is None:
        return RunConfig()
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ConfigError(f"config file is not valid JSON: {e}") from e
    return RunConfig.from_dict(data)

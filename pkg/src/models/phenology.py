"""Phenology data models."""

from dataclasses import dataclass
from datetime import date
from typing import List, Optional, Tuple

from .errors import PhenologyError

PRE_VEGETATIVE = "pre-vegetative"


@dataclass
class TemperatureRecord:
    """One day of air temperature observations in °C."""

    date: date
    t_mean: Optional[float] = None
    t_min: Optional[float] = None
    t_max: Optional[float] = None

    def __post_init__(self):
        if self.t_mean is None:
            if self.t_min is None or self.t_max is None:
                raise PhenologyError(f"{self.date}: needs t_mean or both t_min and t_max")
            if self.t_min > self.t_max:
                raise PhenologyError(f"{self.date}: t_min exceeds t_max")

    @property
    def daily_mean(self) -> float:
        """Mean temperature, derived from the min/max pair when not observed."""
        if self.t_mean is not None:
            return float(self.t_mean)
        return (float(self.t_min) + float(self.t_max)) / 2.0


@dataclass(frozen=True)
class StageTable:
    """Growth stages as (name, accumulated GDD threshold), ascending."""

    stages: Tuple[Tuple[str, float], ...]

    def __post_init__(self):
        values = [gdd for _, gdd in self.stages]
        if any(b <= a for a, b in zip(values, values[1:])):
            raise PhenologyError("stage GDD values must be strictly increasing")

    @staticmethod
    def tomato() -> "StageTable":
        """Processing tomato stages used for leaf sampling."""
        return StageTable(
            stages=(
                ("vegetative", 585.0),
                ("flowering", 897.0),
                ("fruit development", 1216.0),
                ("ripening", 1568.0),
            )
        )

    @property
    def names(self) -> List[str]:
        return [name for name, _ in self.stages]

    @property
    def values(self) -> List[float]:
        return [gdd for _, gdd in self.stages]

    def value_of(self, name: str) -> float:
        for stage, gdd in self.stages:
            if stage == name:
                return gdd
        raise PhenologyError(f"unknown stage: {name}")

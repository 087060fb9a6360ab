"""Uniform contract for fitted base learners."""

import logging
from abc import ABC, abstractmethod
from typing import ClassVar, Dict, Sequence, Tuple, Type

import numpy as np

from ..models.errors import LearnerError
from ..models.learner_spec import LearnerFamily, LearnerSpec

logger = logging.getLogger(__name__)

MODEL_REGISTRY: Dict[LearnerFamily, Type["BaseModel"]] = {}


def register(cls: Type["BaseModel"]) -> Type["BaseModel"]:
    MODEL_REGISTRY[cls.family] = cls
    return cls


class BaseModel(ABC):
    """A fitted learner that predicts the probability of the infected class.

    Fitted models are never mutated after construction.
    """

    family: ClassVar[LearnerFamily]

    def __init__(
        self,
        spec: LearnerSpec,
        n_features: int,
        train_fingerprint: str,
        warnings: Sequence[str] = (),
    ):
        self.spec = spec
        self.n_features = int(n_features)
        self.train_fingerprint = train_fingerprint
        self.warnings: Tuple[str, ...] = tuple(warnings)

    @property
    def name(self) -> str:
        return self.family.value

    @property
    def converged(self) -> bool:
        return not self.warnings

    def predict_proba(self, features) -> np.ndarray:
        """P(infected) for each row of `features`."""
        X = np.asarray(features, dtype=float)
        if X.ndim == 1:
            X = X[np.newaxis, :]
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise LearnerError(
                f"{self.name} expects {self.n_features} features, got {X.shape[-1]}"
            )
        if not np.all(np.isfinite(X)):
            raise LearnerError("features contain non-finite values")
        return np.clip(self._predict(X), 0.0, 1.0)

    @abstractmethod
    def _predict(self, X: np.ndarray) -> np.ndarray:
        """Probabilities for a validated matrix."""

    @abstractmethod
    def params_dict(self) -> dict:
        """Fitted parameters as JSON-ready values."""

    @classmethod
    @abstractmethod
    def from_params(cls, spec: LearnerSpec, n_features: int, fingerprint: str, params: dict):
        """Rebuild a fitted model from `params_dict` output."""

    def to_dict(self) -> dict:
        return {
            "family": self.name,
            "spec": self.spec.to_dict(),
            "n_features": self.n_features,
            "params": self.params_dict(),
            "train_fingerprint": self.train_fingerprint,
            "warnings": list(self.warnings),
        }

    def __repr__(self) -> str:
        return f"{type(self).__name__}(n_features={self.n_features}, seed={self.spec.seed})"


def model_from_dict(data: dict) -> BaseModel:
    """Inverse of `BaseModel.to_dict`."""
    try:
        family = LearnerFamily(data["family"])
    except (KeyError, ValueError) as e:
        raise LearnerError(f"unknown model family in document: {data.get('family')}") from e
    spec = LearnerSpec.from_dict(data["spec"])
    model = MODEL_REGISTRY[family].from_params(
        spec, int(data["n_features"]), data["train_fingerprint"], data["params"]
    )
    model.warnings = tuple(data.get("warnings", ()))
    return model


def warn(model_name: str, message: str, warnings: list) -> None:
    """Record a non-fatal fitting condition and log it."""
    logger.warning("%s: %s", model_name, message)
    warnings.append(message)

"""Stacked ensemble: selected base learners under a logistic-regression meta model."""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from ..calculators.spectral_pipeline import FittedPreprocessing
from ..learners import fit_model, model_from_dict
from ..learners.base import BaseModel
from ..learners.logistic import LogisticRegression, fit_logreg
from ..models.errors import EnsembleError
from ..models.learner_spec import LabeledDataset, LearnerSpec
from ..models.results import OofMatrix
from ..models.spectra import SpectralDataset
from .oof import compute_oof, model_ids

logger = logging.getLogger(__name__)


@dataclass
class StackedEnsemble:
    """Base models refit on the full training split plus the meta classifier.

    `preprocessing` turns raw native-grid spectra into the scaled merged-band
    features the base models expect. `split` keeps the sample ids of each
    partition so later stages can recover validation and test rows.
    """

    base_models: List[BaseModel]
    model_ids: List[str]
    meta: LogisticRegression
    preprocessing: Optional[FittedPreprocessing] = None
    stage_gdd: Optional[float] = None
    seeds: Dict[str, int] = field(default_factory=dict)
    config: dict = field(default_factory=dict)
    split: Dict[str, List[str]] = field(default_factory=dict)

    def __post_init__(self):
        if not self.base_models:
            raise EnsembleError("a stacked ensemble needs at least one base model")
        if self.meta.n_features != len(self.base_models):
            raise EnsembleError("meta model input size differs from the base model count")

    @property
    def n_features(self) -> int:
        return self.base_models[0].n_features

    def base_probabilities(self, features: np.ndarray) -> np.ndarray:
        """(n x m) matrix of base model probabilities."""
        return np.column_stack([m.predict_proba(features) for m in self.base_models])

    def predict_features(self, features: np.ndarray) -> np.ndarray:
        """P(infected) from already-scaled merged-band features."""
        return self.meta.predict_proba(self.base_probabilities(features))

    def predict(self, raw: SpectralDataset) -> np.ndarray:
        """P(infected) for raw spectra on the training native grid."""
        if self.preprocessing is None:
            raise EnsembleError("ensemble carries no preprocessing recipe")
        return self.predict_features(self.preprocessing.features(raw).samples)

    def to_dict(self) -> dict:
        data = {"stage_gdd": self.stage_gdd}
        if self.preprocessing is not None:
            data.update(self.preprocessing.to_dict())
        data.update(
            {
                "selected": list(self.model_ids),
                "base_models": [m.to_dict() for m in self.base_models],
                "meta": {
                    "weights": self.meta.weights.tolist(),
                    "intercept": self.meta.intercept,
                    "model": self.meta.to_dict(),
                },
                "seeds": dict(self.seeds),
                "split": {k: list(v) for k, v in self.split.items()},
                "config": self.config,
            }
        )
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "StackedEnsemble":
        preprocessing = None
        if "band_group_map" in data:
            preprocessing = FittedPreprocessing.from_dict(data)
        return cls(
            base_models=[model_from_dict(m) for m in data["base_models"]],
            model_ids=list(data["selected"]),
            meta=model_from_dict(data["meta"]["model"]),
            preprocessing=preprocessing,
            stage_gdd=data.get("stage_gdd"),
            seeds=dict(data.get("seeds", {})),
            config=data.get("config", {}),
            split={k: list(v) for k, v in data.get("split", {}).items()},
        )


def fit_stacked(
    selected: Sequence[LearnerSpec],
    train: LabeledDataset,
    k_folds: int,
    seed: int,
    oof: Optional[OofMatrix] = None,
    meta_spec: Optional[LearnerSpec] = None,
    threads: int = 1,
    **bundle,
) -> StackedEnsemble:
    """
    Fit the meta model on OOF probabilities and refit the bases on all training rows.

    Args:
        selected: Specs of the selected base models, in selection order
        train: Scaled training features and labels
        k_folds: Folds for the OOF matrix when `oof` is not given
        seed: Master seed for fold assignment
        oof: Precomputed OOF matrix holding (at least) the selected models' columns
        meta_spec: Logistic regression spec for the meta model
        threads: Worker threads
        **bundle: preprocessing, stage_gdd, seeds, config, split for the bundle

    Returns:
        StackedEnsemble
    """
    if not selected:
        raise EnsembleError("no models selected")
    ids = model_ids(selected)
    if oof is None:
        oof = compute_oof(selected, train, k_folds, seed, threads=threads)
    else:
        missing = [m for m in ids if m not in oof.model_ids]
        if missing:
            raise EnsembleError(f"OOF matrix lacks columns for {', '.join(missing)}")
        oof = oof.restrict(ids)

    meta_spec = meta_spec or LearnerSpec.create("logreg")
    meta = fit_logreg(meta_spec, LabeledDataset(oof.values, train.labels))

    with ThreadPoolExecutor(max_workers=max(1, int(threads))) as executor:
        bases = list(executor.map(lambda spec: fit_model(spec, train), selected))
    logger.info(
        "stacked %s with meta weights %s",
        ", ".join(ids),
        np.array2string(meta.weights, precision=3),
    )
    return StackedEnsemble(base_models=bases, model_ids=ids, meta=meta, **bundle)


def predict(ensemble: StackedEnsemble, raw: SpectralDataset) -> np.ndarray:
    return ensemble.predict(raw)

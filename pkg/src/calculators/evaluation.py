"""Confusion matrix, threshold metrics and permutation feature importance."""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Sequence

import numpy as np

from ..ensemble.selection import auc_score
from ..ensemble.stacking import StackedEnsemble
from ..models.errors import EvaluationError
from ..models.learner_spec import LabeledDataset
from ..models.results import ConfusionMatrix, ImportanceProfile, MetricsReport
from ..models.seeds import rng_for

logger = logging.getLogger(__name__)


def confusion(
    preds: Sequence[float], labels: Sequence[int], threshold: float = 0.5
) -> ConfusionMatrix:
    """Tally predictions; p >= threshold counts as infected."""
    preds = np.asarray(preds, dtype=float)
    labels = np.asarray(labels, dtype=int)
    if preds.size == 0:
        raise EvaluationError("no predictions to evaluate")
    if preds.shape != labels.shape:
        raise EvaluationError("predictions and labels differ in length")
    if not 0.0 < threshold < 1.0:
        raise EvaluationError("threshold must lie in (0, 1)")
    predicted = preds >= threshold
    actual = labels == 1
    return ConfusionMatrix(
        tp=int(np.sum(predicted & actual)),
        fp=int(np.sum(predicted & ~actual)),
        tn=int(np.sum(~predicted & ~actual)),
        fn=int(np.sum(~predicted & actual)),
    )


def _ratio(num: int, den: int, name: str, undefined: List[str]) -> Optional[float]:
    if den == 0:
        undefined.append(name)
        return None
    return num / den


def metrics(
    cm: ConfusionMatrix,
    scores: Optional[Sequence[float]] = None,
    labels: Optional[Sequence[int]] = None,
    threshold: float = 0.5,
    split: Optional[str] = None,
    stage_gdd: Optional[float] = None,
) -> MetricsReport:
    """
    Derive accuracy, recall, specificity, precision, F1 and AUC.

    Args:
        cm: Confusion counts
        scores: Probabilities for the AUC (optional)
        labels: Labels matching `scores`
        threshold: Threshold `cm` was tallied at
        split: Name of the evaluated split
        stage_gdd: Growth stage tag

    Returns:
        MetricsReport; undefined ratios are None and listed in `undefined`
    """
    undefined: List[str] = []
    accuracy = _ratio(cm.tp + cm.tn, cm.total, "accuracy", undefined)
    recall = _ratio(cm.tp, cm.tp + cm.fn, "recall_infected", undefined)
    specificity = _ratio(cm.tn, cm.tn + cm.fp, "specificity", undefined)
    precision = _ratio(cm.tp, cm.tp + cm.fp, "precision", undefined)
    if precision is None or recall is None or precision + recall == 0:
        f1 = None
        undefined.append("f1")
    else:
        f1 = 2.0 * precision * recall / (precision + recall)

    auc = None
    if scores is None or labels is None:
        undefined.append("auc")
    else:
        labels = np.asarray(labels, dtype=int)
        if labels.min() == labels.max():
            undefined.append("auc")
        else:
            auc = auc_score(scores, labels)

    return MetricsReport(
        confusion=cm,
        accuracy=accuracy,
        recall_infected=recall,
        specificity=specificity,
        precision=precision,
        f1=f1,
        auc=auc,
        threshold=threshold,
        undefined=tuple(undefined),
        split=split,
        stage_gdd=stage_gdd,
    )


def evaluate_predictions(
    preds: Sequence[float],
    labels: Sequence[int],
    threshold: float = 0.5,
    split: Optional[str] = None,
    stage_gdd: Optional[float] = None,
) -> MetricsReport:
    cm = confusion(preds, labels, threshold)
    return metrics(cm, preds, labels, threshold, split, stage_gdd)


def permutation_importance(
    ensemble: StackedEnsemble,
    eval_set: LabeledDataset,
    n_repeats: int = 10,
    seed: int = 0,
    model_id: Optional[str] = None,
    wavelengths: Optional[Sequence[float]] = None,
    threads: int = 1,
) -> ImportanceProfile:
    """
    AUC drop when one merged band is shuffled, averaged over repeats.

    Args:
        ensemble: Fitted stacked ensemble
        eval_set: Held-out scaled features and labels (the validation split)
        n_repeats: Shuffles per band
        seed: Master seed; each (band, repeat) shuffle derives its own
        model_id: Score one selected base model instead of the whole ensemble
        wavelengths: Representative wavelength per feature; the ensemble's band map by default
        threads: Worker threads over bands

    Returns:
        ImportanceProfile with mean and SD of the AUC drop per band
    """
    if n_repeats < 1:
        raise EvaluationError("n_repeats must be >= 1")
    if not eval_set.has_both_classes:
        raise EvaluationError("importance needs both classes in the evaluation set")

    if model_id is None:
        predict: Callable[[np.ndarray], np.ndarray] = ensemble.predict_features
        aggregation = "ensemble"
    else:
        if model_id not in ensemble.model_ids:
            raise EvaluationError(f"model '{model_id}' is not part of the ensemble")
        predict = ensemble.base_models[ensemble.model_ids.index(model_id)].predict_proba
        aggregation = model_id

    if wavelengths is None:
        if ensemble.preprocessing is None:
            wavelengths = np.arange(eval_set.n_features, dtype=float)
        else:
            wavelengths = ensemble.preprocessing.band_map.representative_wavelengths
    wavelengths = np.asarray(wavelengths, dtype=float)
    if wavelengths.size != eval_set.n_features:
        raise EvaluationError("one wavelength per feature is required")

    X, y = eval_set.features, eval_set.labels
    n = eval_set.n_samples
    baseline = auc_score(predict(X), y)

    def band_drops(j: int) -> np.ndarray:
        stacked = np.tile(X, (n_repeats, 1))
        for r in range(n_repeats):
            stacked[r * n : (r + 1) * n, j] = rng_for(seed, "permute", j, r).permutation(X[:, j])
        probs = predict(stacked).reshape(n_repeats, n)
        return np.array([baseline - auc_score(p, y) for p in probs])

    with ThreadPoolExecutor(max_workers=max(1, int(threads))) as executor:
        drops = np.vstack(list(executor.map(band_drops, range(eval_set.n_features))))

    ddof = 1 if n_repeats > 1 else 0
    logger.info(
        "permutation importance over %d bands (baseline AUC %.4f)", drops.shape[0], baseline
    )
    return ImportanceProfile(
        representative_nm=wavelengths,
        importance_mean=drops.mean(axis=1),
        importance_sd=drops.std(axis=1, ddof=ddof),
        aggregation=aggregation,
        baseline_auc=baseline,
        n_repeats=n_repeats,
        drops=drops,
    )

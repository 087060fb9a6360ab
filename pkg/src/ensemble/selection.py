"""AUC scoring and diversity-aware model selection."""

import logging
from typing import Dict, List, Mapping, Sequence, Tuple

import numpy as np
from scipy.stats import rankdata

from ..calculators.spectral_pipeline import pearson_r_flagged
from ..models.config import EnsembleConfig
from ..models.errors import EnsembleError
from ..models.results import OofMatrix, SelectionDecision, SelectionReport

logger = logging.getLogger(__name__)

ACCEPTED = "accepted"
BELOW_FLOOR = "below auc floor"
CORRELATION_CEILING = "correlation ceiling"
MAX_MODELS = "max models reached"


def auc_score(scores: Sequence[float], labels: Sequence[int]) -> float:
    """Mann-Whitney AUC: P(positive outranks negative), ties counted half."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels, dtype=int)
    if scores.shape != labels.shape:
        raise EnsembleError("scores and labels differ in length")
    pos = labels == 1
    n_pos = int(pos.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise EnsembleError("AUC needs both classes")
    ranks = rankdata(scores, method="average")
    u = ranks[pos].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def model_aucs(oof: OofMatrix, labels: Sequence[int]) -> Dict[str, float]:
    return {m: auc_score(oof.column(m), labels) for m in oof.model_ids}


def prediction_correlation(oof: OofMatrix) -> Tuple[np.ndarray, List[str]]:
    """Pearson matrix between model columns and the ids of constant columns."""
    m = oof.n_models
    corr = np.eye(m)
    degenerate = set()
    for i in range(m):
        for j in range(i + 1, m):
            r, flagged = pearson_r_flagged(oof.values[:, i], oof.values[:, j])
            corr[i, j] = corr[j, i] = r
            if flagged:
                for k in (i, j):
                    if np.ptp(oof.values[:, k]) == 0.0:
                        degenerate.add(oof.model_ids[k])
    return corr, sorted(degenerate)


def select_models(
    model_ids: Sequence[str],
    auc: Mapping[str, float],
    correlation: np.ndarray,
    cfg: EnsembleConfig = EnsembleConfig(),
    degenerate: Sequence[str] = (),
) -> SelectionReport:
    """
    Greedy pick of high-AUC, mutually uncorrelated models.

    Models are visited by descending AUC (ties by name). A model is accepted when
    its AUC exceeds the floor and its |r| with every accepted model is at most the
    ceiling, until `max_models` are accepted.
    """
    ids = list(model_ids)
    if not ids:
        raise EnsembleError("model pool is empty")
    correlation = np.asarray(correlation, dtype=float)
    index = {m: i for i, m in enumerate(ids)}
    order = sorted(ids, key=lambda m: (-auc[m], m))

    selected: List[str] = []
    trace: List[SelectionDecision] = []
    for m in order:
        if len(selected) >= cfg.max_models:
            reason = MAX_MODELS
        elif not auc[m] > cfg.auc_floor:
            reason = BELOW_FLOOR
        elif any(
            abs(correlation[index[m], index[s]]) > cfg.corr_ceiling for s in selected
        ):
            reason = CORRELATION_CEILING
        else:
            reason = ACCEPTED
            selected.append(m)
        trace.append(SelectionDecision(m, float(auc[m]), reason == ACCEPTED, reason))
        logger.debug("%s (AUC %.4f): %s", m, auc[m], reason)

    if not selected:
        raise EnsembleError(f"no model above floor (auc_floor = {cfg.auc_floor:g})")
    logger.info("selected models: %s", ", ".join(selected))
    return SelectionReport(
        model_ids=tuple(ids),
        auc={m: float(auc[m]) for m in ids},
        correlation=correlation,
        selected=tuple(selected),
        trace=tuple(trace),
        degenerate=tuple(degenerate),
    )


def select_from_oof(
    oof: OofMatrix, labels: Sequence[int], cfg: EnsembleConfig = EnsembleConfig()
) -> SelectionReport:
    """AUC and correlation from the OOF matrix, then `select_models`."""
    corr, degenerate = prediction_correlation(oof)
    return select_models(oof.model_ids, model_aucs(oof, labels), corr, cfg, degenerate)

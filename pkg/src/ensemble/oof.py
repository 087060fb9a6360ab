"""Out-of-fold prediction matrices."""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..learners import fit_model
from ..models.errors import EnsembleError
from ..models.learner_spec import LabeledDataset, LearnerSpec
from ..models.results import OofMatrix
from ..models.seeds import derive_seed, rng_for

logger = logging.getLogger(__name__)


def model_ids(pool: Sequence[LearnerSpec]) -> List[str]:
    """Family names, suffixed when a family appears more than once."""
    seen = {}
    ids = []
    for spec in pool:
        seen[spec.name] = seen.get(spec.name, 0) + 1
        ids.append(spec.name if seen[spec.name] == 1 else f"{spec.name}#{seen[spec.name]}")
    return ids


def assign_folds(labels: Sequence[int], k_folds: int, seed: int) -> np.ndarray:
    """Stratified folds: each class is shuffled and dealt round-robin.

    The deal counter runs on across classes so fold sizes differ by at most one.
    """
    labels = np.asarray(labels, dtype=int)
    if k_folds < 2:
        raise EnsembleError("k_folds must be >= 2")
    if k_folds > labels.size:
        raise EnsembleError(f"k_folds = {k_folds} exceeds {labels.size} samples")
    folds = np.empty(labels.size, dtype=int)
    counter = 0
    for c in (0, 1):
        members = rng_for(seed, "folds", c).permutation(np.flatnonzero(labels == c))
        folds[members] = (counter + np.arange(members.size)) % k_folds
        counter += members.size
    return folds


def check_folds(labels: np.ndarray, folds: np.ndarray, k_folds: int) -> None:
    if folds.shape != labels.shape:
        raise EnsembleError("fold assignment length does not match the training rows")
    for f in range(k_folds):
        held = folds == f
        if not held.any():
            raise EnsembleError(f"fold {f} is empty; reduce k")
        rest = labels[~held]
        if rest.size == 0 or rest.min() == rest.max():
            raise EnsembleError(f"fold degenerate; reduce k (fold {f} leaves a single class)")


def compute_oof(
    pool: Sequence[LearnerSpec],
    train: LabeledDataset,
    k_folds: int,
    seed: int,
    folds: Optional[Sequence[int]] = None,
    threads: int = 1,
) -> OofMatrix:
    """
    Out-of-fold P(infected) for every pool model.

    Entry (i, m) comes from model m fitted on the folds other than i's. Jobs are
    seeded per (model, fold) and assembled in that order, so the thread count
    never changes the result.

    Args:
        pool: Learner specs
        train: Training features and labels
        k_folds: Number of folds
        seed: Master seed for the fold assignment
        folds: Explicit fold per row (overrides the stratified assignment)
        threads: Worker threads

    Returns:
        OofMatrix with one column per pool model
    """
    if not pool:
        raise EnsembleError("model pool is empty")
    if folds is None:
        folds = assign_folds(train.labels, k_folds, seed)
    else:
        folds = np.asarray(folds, dtype=int)
        k_folds = int(folds.max()) + 1
    check_folds(train.labels, folds, k_folds)

    jobs: List[Tuple[int, int]] = [(m, f) for m in range(len(pool)) for f in range(k_folds)]

    def run(job: Tuple[int, int]) -> np.ndarray:
        m, f = job
        spec = pool[m].with_seed(derive_seed(pool[m].seed, "fold", f))
        held = folds == f
        model = fit_model(spec, train.subset(np.flatnonzero(~held)))
        return model.predict_proba(train.features[held])

    with ThreadPoolExecutor(max_workers=max(1, int(threads))) as executor:
        results = list(executor.map(run, jobs))

    values = np.empty((train.n_samples, len(pool)))
    for (m, f), probs in zip(jobs, results):
        values[folds == f, m] = probs
    ids = model_ids(pool)
    logger.info("computed %d-fold OOF predictions for %s", k_folds, ", ".join(ids))
    return OofMatrix(values, folds, tuple(ids))

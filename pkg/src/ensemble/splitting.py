"""Stratified train / validation / test partition."""

import math
from typing import Dict, List, Sequence

import numpy as np

from ..models.errors import EnsembleError
from ..models.results import DataSplit
from ..models.seeds import rng_for

SPLIT_NAMES = ("train", "validation", "test")


def apportion(total: int, class_sizes: Dict[int, int]) -> Dict[int, int]:
    """Largest-remainder share of `total` across classes; ties go to the lower label."""
    n = sum(class_sizes.values())
    quotas = {c: total * size / n for c, size in class_sizes.items()}
    counts = {c: int(math.floor(q)) for c, q in quotas.items()}
    left = total - sum(counts.values())
    order = sorted(class_sizes, key=lambda c: (-(quotas[c] - counts[c]), c))
    for c in order[:left]:
        counts[c] += 1
    return counts


def stratified_split(
    n: int, labels: Sequence[int], ratios: Sequence[float], seed: int
) -> DataSplit:
    """
    Split row indices 0..n-1 per class.

    Validation and test receive floor(n * ratio) rows each, shared between classes
    by largest remainder; training keeps the rest. Each class is shuffled with a
    seed derived from `seed` and its label.

    Args:
        n: Number of rows
        labels: Class label per row
        ratios: (train, validation, test), summing to 1
        seed: Master seed

    Returns:
        DataSplit with sorted index lists
    """
    labels = np.asarray(labels, dtype=int)
    if labels.shape != (n,):
        raise EnsembleError(f"expected {n} labels, got {labels.size}")
    ratios = [float(r) for r in ratios]
    if len(ratios) != 3 or any(r < 0 for r in ratios) or abs(sum(ratios) - 1.0) > 1e-9:
        raise EnsembleError("split ratios must be three non-negative numbers summing to 1")
    classes = sorted(set(labels.tolist()))
    if classes != [0, 1]:
        raise EnsembleError("stratified split needs both classes")

    sizes = {c: int(np.sum(labels == c)) for c in classes}
    n_val = int(math.floor(n * ratios[1] + 1e-9))
    n_test = int(math.floor(n * ratios[2] + 1e-9))
    val_counts = apportion(n_val, sizes)
    test_counts = apportion(n_test, sizes)

    parts: Dict[str, List[int]] = {name: [] for name in SPLIT_NAMES}
    for c in classes:
        members = np.flatnonzero(labels == c)
        shuffled = rng_for(seed, "split", c).permutation(members)
        v, t = val_counts[c], test_counts[c]
        if v + t > members.size:
            raise EnsembleError(f"class {c} has too few rows for the requested split")
        parts["validation"].extend(shuffled[:v].tolist())
        parts["test"].extend(shuffled[v : v + t].tolist())
        parts["train"].extend(shuffled[v + t :].tolist())

    for name, ratio in zip(SPLIT_NAMES, ratios):
        if ratio > 0 and not parts[name]:
            raise EnsembleError(f"{name} split is empty; use more samples or a larger ratio")
    return DataSplit(
        train=tuple(sorted(parts["train"])),
        validation=tuple(sorted(parts["validation"])),
        test=tuple(sorted(parts["test"])),
        seed=seed,
        stratified=True,
    )

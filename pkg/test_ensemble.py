"""Tests for splitting, out-of-fold predictions, selection and stacking."""

import itertools
import json

import numpy as np
import pytest

from src.calculators.spectral_pipeline import fit_preprocessing
from src.ensemble import (
    StackedEnsemble,
    assign_folds,
    auc_score,
    compute_oof,
    fit_stacked,
    prediction_correlation,
    select_from_oof,
    select_models,
    stratified_split,
)
from src.ensemble.selection import ACCEPTED, BELOW_FLOOR, CORRELATION_CEILING, MAX_MODELS
from src.learners import fit_model
from src.models.config import EnsembleConfig, PreprocessConfig
from src.models.errors import EnsembleError
from src.models.learner_spec import LabeledDataset, LearnerSpec
from src.models.results import OofMatrix


def spec(family, **params):
    return LearnerSpec.create(family, params, seed=3)


def test_split_sizes_for_a_default_stage():
    labels = np.repeat([1, 0], 98)
    split = stratified_split(196, labels, (0.65, 0.15, 0.20), seed=42)
    assert (len(split.train), len(split.validation), len(split.test)) == (128, 29, 39)
    # the odd validation and test rows go to the lower label
    assert int(np.sum(labels[list(split.validation)] == 0)) == 15
    assert int(np.sum(labels[list(split.test)] == 0)) == 20
    assert split == stratified_split(196, labels, (0.65, 0.15, 0.20), seed=42)
    assert split != stratified_split(196, labels, (0.65, 0.15, 0.20), seed=43)


def test_split_all_train():
    labels = [0, 1] * 5
    split = stratified_split(10, labels, (1.0, 0.0, 0.0), seed=0)
    assert split.train == tuple(range(10))
    assert split.validation == ()
    assert split.test == ()


def test_split_errors():
    with pytest.raises(EnsembleError, match="both classes"):
        stratified_split(4, [1, 1, 1, 1], (0.5, 0.25, 0.25), seed=0)
    with pytest.raises(EnsembleError, match="summing to 1"):
        stratified_split(4, [0, 1, 0, 1], (0.5, 0.5, 0.5), seed=0)
    with pytest.raises(EnsembleError, match="validation split is empty"):
        stratified_split(4, [0, 1, 0, 1], (0.9, 0.1, 0.0), seed=0)


def test_folds_are_balanced():
    labels = np.array([0] * 7 + [1] * 5)
    folds = assign_folds(labels, 3, seed=1)
    sizes = np.bincount(folds, minlength=3)
    assert sizes.max() - sizes.min() <= 1
    for c in (0, 1):
        per_class = np.bincount(folds[labels == c], minlength=3)
        assert per_class.max() - per_class.min() <= 1
    with pytest.raises(EnsembleError):
        assign_folds(labels, 13, seed=1)
    with pytest.raises(EnsembleError):
        assign_folds(labels, 1, seed=1)


def test_degenerate_fold_is_rejected():
    data = LabeledDataset(np.arange(12.0).reshape(6, 2), [0, 0, 0, 1, 1, 1])
    with pytest.raises(EnsembleError, match="fold degenerate; reduce k"):
        compute_oof([spec("logreg")], data, 2, seed=0, folds=[0, 0, 0, 1, 1, 1])


def test_oof_rows_ignore_their_own_labels(blobs):
    folds = np.arange(blobs.n_samples) % 4
    pool = [spec("logreg"), spec("gaussian_nb")]
    before = compute_oof(pool, blobs, 4, seed=0, folds=folds)
    flipped = blobs.labels.copy()
    flipped[0] = 1 - flipped[0]
    after = compute_oof(pool, LabeledDataset(blobs.features, flipped), 4, seed=0, folds=folds)
    held = folds == 0
    np.testing.assert_array_equal(before.values[held], after.values[held])
    assert not np.array_equal(before.values[~held], after.values[~held])


def test_leave_one_out_nearest_neighbour():
    X = np.array([[0.0], [1.0], [2.0], [10.0], [11.0], [12.0]])
    data = LabeledDataset(X, [0, 0, 0, 1, 1, 1])
    oof = compute_oof([spec("knn", k=1)], data, 6, seed=0, folds=np.arange(6))
    assert oof.column("knn").tolist() == [0.0, 0.0, 0.0, 1.0, 1.0, 1.0]


def test_zero_round_boosting_oof_is_the_fold_prior(blobs):
    oof = compute_oof([spec("boosted_trees", n_rounds=0)], blobs, 3, seed=7)
    expected = np.array([blobs.labels[oof.folds != f].mean() for f in oof.folds])
    np.testing.assert_allclose(oof.column("boosted_trees"), expected)


def test_oof_independent_of_thread_count(blobs):
    pool = [spec("random_forest", n_trees=5), spec("knn"), spec("logreg")]
    serial = compute_oof(pool, blobs, 4, seed=9, threads=1)
    parallel = compute_oof(pool, blobs, 4, seed=9, threads=3)
    np.testing.assert_array_equal(serial.values, parallel.values)
    assert serial.model_ids == ("random_forest", "knn", "logreg")


def test_repeated_family_gets_suffixed_ids(blobs):
    oof = compute_oof([spec("knn", k=3), spec("knn", k=7)], blobs, 2, seed=0)
    assert oof.model_ids == ("knn", "knn#2")


def test_auc_matches_pair_counting():
    rng = np.random.default_rng(0)
    scores = rng.integers(0, 5, size=30).astype(float)
    labels = np.array([0, 1] * 15)
    pos, neg = scores[labels == 1], scores[labels == 0]
    wins = sum(1.0 if p > n else 0.5 if p == n else 0.0 for p, n in itertools.product(pos, neg))
    assert auc_score(scores, labels) == pytest.approx(wins / (pos.size * neg.size), abs=1e-12)
    assert auc_score([0.1, 0.4, 0.35, 0.8], [0, 0, 1, 1]) == pytest.approx(0.75)
    with pytest.raises(EnsembleError, match="both classes"):
        auc_score([0.1, 0.2], [1, 1])


@pytest.mark.parametrize("trial", range(20))
def test_oof_fold_is_blind_to_its_labels(blobs, trial):
    rng = np.random.default_rng(300 + trial)
    folds = rng.permutation(np.arange(blobs.n_samples) % 4)
    pool = [spec("logreg"), spec("gaussian_nb"), spec("knn")]
    before = compute_oof(pool, blobs, 4, seed=trial, folds=folds)
    held = folds == 0
    flipped = np.where(held, 1 - blobs.labels, blobs.labels)
    after = compute_oof(pool, LabeledDataset(blobs.features, flipped), 4, seed=trial, folds=folds)
    np.testing.assert_array_equal(before.values[held], after.values[held])


def test_auc_equals_pair_counting_on_random_sets():
    rng = np.random.default_rng(11)
    for _ in range(200):
        n = int(rng.integers(2, 40))
        labels = rng.integers(0, 2, size=n)
        labels[:2] = (0, 1)
        scores = rng.integers(0, 6, size=n) / 5.0
        pos, neg = scores[labels == 1], scores[labels == 0]
        wins = sum(
            1.0 if p > q else 0.5 if p == q else 0.0 for p, q in itertools.product(pos, neg)
        )
        assert auc_score(scores, labels) == wins / (pos.size * neg.size)


def test_prediction_correlation_flags_constant_columns():
    a = np.array([0.1, 0.4, 0.3, 0.9])
    oof = OofMatrix(
        np.column_stack([a, a, 1.0 - a, np.full(4, 0.5)]),
        np.array([0, 1, 0, 1]),
        ("a", "copy", "complement", "flat"),
    )
    corr, degenerate = prediction_correlation(oof)
    assert corr[0, 1] == pytest.approx(1.0)
    assert corr[0, 2] == pytest.approx(-1.0)
    assert corr[0, 3] == 0.0
    assert degenerate == ["flat"]


def selection_inputs():
    ids = ["a", "b", "c", "d", "e", "f"]
    auc = {"a": 0.9, "b": 0.85, "c": 0.8, "d": 0.45, "e": 0.88, "f": 0.7}
    corr = np.eye(6)
    corr[0, 4] = corr[4, 0] = -0.97
    corr[1, 2] = corr[2, 1] = 0.5
    return ids, auc, corr


def test_selection_trace_reasons():
    ids, auc, corr = selection_inputs()
    report = select_models(ids, auc, corr, EnsembleConfig(max_models=3))
    assert report.selected == ("a", "b", "c")
    reasons = {d.model_id: d.reason for d in report.trace}
    assert reasons == {
        "a": ACCEPTED,
        "e": CORRELATION_CEILING,
        "b": ACCEPTED,
        "c": ACCEPTED,
        "f": MAX_MODELS,
        "d": MAX_MODELS,
    }
    wide = select_models(ids, auc, corr, EnsembleConfig(max_models=6))
    assert {d.model_id: d.reason for d in wide.trace}["d"] == BELOW_FLOOR
    assert wide.selected == ("a", "b", "c", "f")


def test_selection_ignores_pool_order():
    ids, auc, corr = selection_inputs()
    perm = [5, 3, 1, 0, 4, 2]
    shuffled = [ids[i] for i in perm]
    report = select_models(shuffled, auc, corr[np.ix_(perm, perm)], EnsembleConfig(max_models=3))
    assert report.selected == ("a", "b", "c")


def test_selection_ties_break_by_name():
    report = select_models(["z", "y"], {"z": 0.8, "y": 0.8}, np.eye(2), EnsembleConfig())
    assert report.selected == ("y", "z")


def test_selection_needs_a_model_above_floor():
    with pytest.raises(EnsembleError, match="no model above floor"):
        select_models(["a", "b"], {"a": 0.5, "b": 0.3}, np.eye(2), EnsembleConfig())


def test_stacked_prediction_recomposes_meta_over_bases(blobs):
    pool = [spec("gaussian_nb"), spec("knn"), spec("logreg")]
    oof = compute_oof(pool, blobs, 4, seed=1)
    report = select_from_oof(oof, blobs.labels, EnsembleConfig(corr_ceiling=1.0))
    selected = [pool[oof.model_ids.index(m)] for m in report.selected]
    ensemble = fit_stacked(selected, blobs, 4, seed=1, oof=oof)

    assert ensemble.model_ids == list(report.selected)
    base = np.column_stack([m.predict_proba(blobs.features) for m in ensemble.base_models])
    np.testing.assert_array_equal(
        ensemble.predict_features(blobs.features), ensemble.meta.predict_proba(base)
    )
    for model, s in zip(ensemble.base_models, selected):
        refit = fit_model(s, blobs)
        np.testing.assert_array_equal(
            model.predict_proba(blobs.features), refit.predict_proba(blobs.features)
        )


def test_single_model_ensemble_is_monotone_in_base_probability(blobs):
    ensemble = fit_stacked([spec("logreg")], blobs, 4, seed=2)
    assert ensemble.meta.weights[0] > 0
    base = ensemble.base_probabilities(blobs.features)[:, 0]
    order = np.argsort(base, kind="stable")
    assert np.all(np.diff(ensemble.predict_features(blobs.features)[order]) >= 0)


def test_stacking_needs_oof_columns(blobs):
    oof = compute_oof([spec("logreg")], blobs, 2, seed=0)
    with pytest.raises(EnsembleError, match="lacks columns for knn"):
        fit_stacked([spec("knn")], blobs, 2, seed=0, oof=oof)


def test_saved_ensemble_predicts_identically(small_spectra, layout):
    fitted = fit_preprocessing(small_spectra, layout, PreprocessConfig())
    features = fitted.features(small_spectra)
    train = LabeledDataset(features.samples, features.labels)
    ensemble = fit_stacked(
        [spec("gaussian_nb"), spec("knn", k=3)],
        train,
        3,
        seed=4,
        preprocessing=fitted,
        stage_gdd=585.0,
        seeds={"master": 4},
        split={"train": small_spectra.sample_ids},
    )
    document = json.loads(json.dumps(ensemble.to_dict()))
    assert document["selected"] == ["gaussian_nb", "knn"]
    assert document["band_group_map"]["reduced_band_count"] == features.n_bands
    restored = StackedEnsemble.from_dict(document)
    np.testing.assert_array_equal(restored.predict(small_spectra), ensemble.predict(small_spectra))
    assert restored.split["train"] == small_spectra.sample_ids
    assert restored.stage_gdd == 585.0

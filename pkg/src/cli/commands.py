"""Subcommand implementations: each reads its inputs, calls one pipeline stage, writes artifacts."""

import dataclasses
import logging
import os
from argparse import Namespace
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np
import pandas as pd
from dateutil.parser import isoparse

from ..calculators.evaluation import evaluate_predictions, permutation_importance
from ..calculators.gdd_calculator import compute_gdd, records_from, stage_dates
from ..calculators.spectral_pipeline import (
    balance_dataset,
    band_correlation_matrix,
    class_mean_profile,
    fit_preprocessing,
    merge_correlated_bands,
    prepare_spectra,
    relative_mean_difference,
)
from ..calculators.stage_rules import StageRules
from ..calculators.synthgen import effect_size, generate, generate_stages
from ..ensemble import compute_oof, fit_stacked, select_from_oof, stratified_split
from ..ensemble.oof import model_ids
from ..ensemble.stacking import StackedEnsemble
from ..models.config import RunConfig
from ..models.errors import ConfigError, DataFormatError, EvaluationError
from ..models.learner_spec import LabeledDataset
from ..models.results import ImportanceProfile
from ..models.seeds import derive_seed
from ..models.spectra import DetectorLayout, SpectralDataset
from ..parsers.spectra_parser import format_wavelength, parse_spectra_csv, spectra_to_frame
from ..parsers.temperature_parser import get_temperature_summary, parse_temperature_csv
from .output import read_json, write_csv, write_json

logger = logging.getLogger(__name__)

THREADS_ENV = "SPECTRA_THREADS"


# ---------------------------------------------------------------------------
# Shared argument resolution
# ---------------------------------------------------------------------------


def resolve_threads(args: Namespace, cfg: RunConfig) -> int:
    """--threads, then the config, then $SPECTRA_THREADS, then 1."""
    if args.threads is not None:
        threads = args.threads
    elif cfg.threads is not None:
        threads = cfg.threads
    elif os.environ.get(THREADS_ENV):
        try:
            threads = int(os.environ[THREADS_ENV])
        except ValueError:
            raise ConfigError(f"{THREADS_ENV} must be an integer") from None
    else:
        threads = 1
    if threads < 1:
        raise ConfigError("threads must be >= 1")
    return threads


def resolve_seed(args: Namespace, cfg: RunConfig) -> int:
    return int(args.seed) if args.seed is not None else int(cfg.seed)


def resolve_stage(args: Namespace, cfg: RunConfig) -> Optional[float]:
    return args.stage if args.stage is not None else cfg.stage_gdd


def input_path(args: Namespace, cfg: RunConfig) -> Path:
    path = args.input or cfg.input_path
    if not path:
        raise ConfigError("an input file is required (--in)")
    return Path(path)


def output_path(args: Namespace, cfg: RunConfig) -> Path:
    path = args.out or cfg.output_path
    if not path:
        raise ConfigError("an output path is required (--out)")
    return Path(path)


def load_stage(args: Namespace, cfg: RunConfig) -> Tuple[SpectralDataset, Optional[float]]:
    """Spectra from --in, restricted to one growth stage."""
    ds = parse_spectra_csv(input_path(args, cfg))
    stage = resolve_stage(args, cfg)
    if stage is not None:
        return ds.for_stage(stage), float(stage)
    stages = ds.stages()
    if len(stages) > 1:
        listed = ", ".join(f"{s:g}" for s in stages)
        raise ConfigError(f"input holds several stages ({listed}); choose one with --stage")
    return ds, stages[0] if stages else None


def load_model(path: Optional[str]) -> StackedEnsemble:
    if not path:
        raise ConfigError("a trained model is required (--model)")
    path = Path(path)
    if not path.exists():
        raise DataFormatError(f"model file not found: {path}")
    try:
        return StackedEnsemble.from_dict(read_json(path))
    except ValueError as e:
        if isinstance(e, DataFormatError):
            raise
        raise DataFormatError(f"cannot read model file {path}: {e}") from e
    except (KeyError, TypeError) as e:
        raise DataFormatError(f"model file {path} is missing {e}") from e


def split_rows(ds: SpectralDataset, ensemble: StackedEnsemble, part: str) -> List[int]:
    """Row indices of `ds` holding the sample ids stored for one split."""
    ids = ensemble.split.get(part, [])
    index = {sid: i for i, sid in enumerate(ds.sample_ids)}
    missing = [sid for sid in ids if sid not in index]
    if missing:
        raise EvaluationError(
            f"{len(missing)} {part} sample(s) are absent from the input, e.g. {missing[0]}"
        )
    return [index[sid] for sid in ids]


def model_stage(ds: SpectralDataset, ensemble: StackedEnsemble) -> SpectralDataset:
    if ensemble.stage_gdd is not None and len(ds.stages()) > 1:
        return ds.for_stage(ensemble.stage_gdd)
    return ds


def importance_frame(profile: ImportanceProfile) -> pd.DataFrame:
    return pd.DataFrame(
        {
            "representative_nm": profile.representative_nm,
            "importance_mean": profile.importance_mean,
            "importance_sd": profile.importance_sd,
        }
    )


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def run_synth(args: Namespace, cfg: RunConfig) -> str:
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = int(args.seed)
    if args.stage is not None:
        overrides["stage_gdd"] = float(args.stage)
        overrides["preset"] = StageRules.synth_preset(args.stage)
    if args.preset is not None:
        overrides["preset"] = args.preset
    if args.class_effect is not None:
        overrides["class_effect"] = args.class_effect
    if args.noise_sd is not None:
        overrides["noise_sd"] = args.noise_sd
    if args.plants is not None:
        overrides["n_plants_per_class"] = args.plants
    if args.non_infected_plants is not None:
        overrides["n_non_infected_plants"] = args.non_infected_plants
    try:
        synth = dataclasses.replace(cfg.synth, **overrides)
    except TypeError as e:
        raise ConfigError(str(e)) from e

    layout = DetectorLayout()
    ds = generate_stages(synth, layout) if args.all_stages else generate(synth, layout)
    out = write_csv(output_path(args, cfg), spectra_to_frame(ds))
    snr = effect_size(synth)
    snr_text = "inf" if snr.infinite else f"{snr.value:g}"
    return f"wrote {ds.n_samples} spectra x {ds.n_bands} bands to {out} (effect size {snr_text})"


def run_preprocess(args: Namespace, cfg: RunConfig) -> str:
    ds, _ = load_stage(args, cfg)
    if args.balance:
        ds = balance_dataset(ds, seed=resolve_seed(args, cfg))
    warnings: List[str] = []
    fitted = fit_preprocessing(ds, DetectorLayout(), cfg.preprocess, warnings)
    out = output_path(args, cfg)
    write_json(out / "band_map.json", fitted.band_map.to_dict())
    write_json(out / "scaler.json", fitted.scaler.to_dict())
    write_csv(out / "features.csv", spectra_to_frame(fitted.features(ds)))

    if args.corr_out:
        wavelengths, corr = band_correlation_matrix(fitted.prepare(ds), step=args.corr_step)
        labels = [format_wavelength(wl) for wl in wavelengths]
        frame = pd.DataFrame(corr, columns=labels)
        frame.insert(0, "wavelength_nm", wavelengths)
        write_csv(Path(args.corr_out), frame)

    band_map = fitted.band_map
    return (
        f"merged {band_map.original_band_count} bands into {band_map.reduced_band_count} "
        f"groups; artifacts in {out}"
    )


def run_gdd(args: Namespace, cfg: RunConfig) -> str:
    records = parse_temperature_csv(input_path(args, cfg))
    start = None
    if args.start:
        try:
            start = isoparse(args.start).date()
        except ValueError:
            raise ConfigError(f"--start is not an ISO-8601 date: '{args.start}'") from None
        records = records_from(records, start)

    overrides = {}
    if args.t_base is not None:
        overrides["t_base"] = args.t_base
    if args.no_clamp:
        overrides["clamp_negative"] = False
    gdd_cfg = dataclasses.replace(cfg.gdd, **overrides)

    total = compute_gdd(records, gdd_cfg)
    stage = StageRules.stage_of(total)
    reached = stage_dates(records, StageRules.TABLE, gdd_cfg)
    report = {
        "gdd": total,
        "stage": stage,
        "t_base": gdd_cfg.t_base,
        "clamp_negative": gdd_cfg.clamp_negative,
        "start": start.isoformat() if start else None,
        "summary": get_temperature_summary(records),
        "stage_dates": {name: day.isoformat() for name, day in reached.items()},
    }
    out = write_json(output_path(args, cfg), report)
    return f"{total:.1f} GDD over {len(records)} days ({stage}); written to {out}"


def run_rmd(args: Namespace, cfg: RunConfig) -> str:
    ds, _ = load_stage(args, cfg)
    prepared = prepare_spectra(ds, DetectorLayout(), cfg.preprocess)
    if not args.no_merge:
        prepared, _ = merge_correlated_bands(prepared, cfg.preprocess)
    profile = class_mean_profile(prepared)
    rmd = relative_mean_difference(profile)
    frame = pd.DataFrame(
        {
            "wavelength_nm": profile.wavelengths_nm,
            "mu_non": profile.mu_non,
            "mu_inf": profile.mu_inf,
            "rmd": rmd,
        }
    )
    out = write_csv(output_path(args, cfg), frame)
    peak = int(np.argmax(np.abs(rmd)))
    return (
        f"RMD over {rmd.size} bands, largest {rmd[peak]:+.4f} at "
        f"{profile.wavelengths_nm[peak]:g} nm; written to {out}"
    )


def run_train(args: Namespace, cfg: RunConfig) -> str:
    seed = resolve_seed(args, cfg)
    threads = resolve_threads(args, cfg)
    ds, stage = load_stage(args, cfg)
    if args.balance:
        ds = balance_dataset(ds, seed=seed)

    split = stratified_split(ds.n_samples, ds.labels, cfg.ensemble.ratios, seed)
    raw_train = ds.subset(split.train)
    warnings: List[str] = []
    preprocessing = fit_preprocessing(raw_train, DetectorLayout(), cfg.preprocess, warnings)
    features = preprocessing.features(raw_train)
    train = LabeledDataset(features.samples, features.labels)

    pool = [
        cfg.learner_spec(family, seed=derive_seed(seed, "learner", family))
        for family in cfg.ensemble.pool
    ]
    ids = model_ids(pool)
    oof = compute_oof(pool, train, cfg.ensemble.k_folds, seed, threads=threads)
    report = select_from_oof(oof, train.labels, cfg.ensemble)
    selected = [pool[ids.index(m)] for m in report.selected]

    ensemble = fit_stacked(
        selected,
        train,
        cfg.ensemble.k_folds,
        seed,
        oof=oof,
        meta_spec=cfg.learner_spec("logreg", seed=derive_seed(seed, "meta")),
        threads=threads,
        preprocessing=preprocessing,
        stage_gdd=stage,
        seeds={"master": seed, **{m: spec.seed for m, spec in zip(ids, pool)}},
        config={
            "ensemble": cfg.ensemble.to_dict(),
            "learners": {m: spec.to_dict() for m, spec in zip(ids, pool)},
            "balance": bool(args.balance),
        },
        split={
            part: [ds.sample_ids[i] for i in split.part(part)]
            for part in ("train", "validation", "test")
        },
    )

    out = output_path(args, cfg)
    write_json(out / "model.json", ensemble.to_dict())
    write_json(out / "selection.json", report.to_dict())
    oof_frame = pd.DataFrame(oof.values, columns=list(oof.model_ids))
    oof_frame.insert(0, "fold", oof.folds)
    oof_frame.insert(0, "label", train.labels)
    oof_frame.insert(0, "sample_id", features.sample_ids)
    write_csv(out / "oof.csv", oof_frame)
    return f"selected {', '.join(report.selected)}; model written to {out / 'model.json'}"


def run_evaluate(args: Namespace, cfg: RunConfig) -> str:
    ensemble = load_model(args.model)
    ds = model_stage(parse_spectra_csv(input_path(args, cfg)), ensemble)
    threshold = cfg.evaluation.threshold
    out = output_path(args, cfg)

    reports = {}
    for part, filename in (("test", "metrics.json"), ("validation", "metrics_validation.json")):
        rows = split_rows(ds, ensemble, part)
        if not rows:
            logger.warning("%s split is empty; %s not written", part, filename)
            continue
        subset = ds.subset(rows)
        probs = ensemble.predict(subset)
        reports[part] = evaluate_predictions(
            probs, subset.labels, threshold, split=part, stage_gdd=ensemble.stage_gdd
        )
        write_json(out / filename, reports[part].to_dict())

    if "test" not in reports:
        raise EvaluationError("the model has no test split to evaluate")
    test = reports["test"]
    parts = [f"accuracy {test.accuracy:.3f}" if test.accuracy is not None else "accuracy n/a"]
    if test.auc is not None:
        parts.append(f"AUC {test.auc:.3f}")
    return f"test {', '.join(parts)}; metrics written to {out}"


def run_importance(args: Namespace, cfg: RunConfig) -> str:
    ensemble = load_model(args.model)
    if ensemble.preprocessing is None:
        raise EvaluationError("model carries no preprocessing recipe")
    ds = model_stage(parse_spectra_csv(input_path(args, cfg)), ensemble)
    rows = split_rows(ds, ensemble, "validation")
    if not rows:
        raise EvaluationError("the model has no validation split for importance")
    validation = ensemble.preprocessing.features(ds.subset(rows))
    eval_set = LabeledDataset(validation.samples, validation.labels)

    n_repeats = args.repeats if args.repeats is not None else cfg.evaluation.n_repeats
    seed = resolve_seed(args, cfg)
    threads = resolve_threads(args, cfg)
    out = output_path(args, cfg)

    profile = permutation_importance(ensemble, eval_set, n_repeats, seed, threads=threads)
    write_csv(out / "importance.csv", importance_frame(profile))
    if args.per_model:
        for model_id in ensemble.model_ids:
            per_model = permutation_importance(
                ensemble, eval_set, n_repeats, seed, model_id=model_id, threads=threads
            )
            name = model_id.replace("#", "_")
            write_csv(out / f"importance_{name}.csv", importance_frame(per_model))

    top = ", ".join(f"{profile.representative_nm[i]:g}" for i in profile.top(5))
    return f"top bands (nm): {top}; importance written to {out}"


COMMANDS = {
    "synth": run_synth,
    "preprocess": run_preprocess,
    "gdd": run_gdd,
    "rmd": run_rmd,
    "train": run_train,
    "evaluate": run_evaluate,
    "importance": run_importance,
}

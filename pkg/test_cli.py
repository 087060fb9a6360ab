"""End-to-end tests of the broomrape-spectra command line."""

import json
from datetime import date, timedelta

import pandas as pd
import pytest

from src.cli import build_parser, main


def synth(tmp_path, name="spectra.csv", *extra):
    path = tmp_path / name
    assert main(["synth", "--out", str(path), "--seed", "7", "--plants", "5", *extra]) == 0
    return path


def test_synth_is_byte_identical_for_a_seed(tmp_path, capsys):
    first = synth(tmp_path, "a.csv")
    again = synth(tmp_path, "b.csv")
    assert first.read_bytes() == again.read_bytes()
    assert "wrote 20 spectra x 912 bands" in capsys.readouterr().out

    frame = pd.read_csv(first)
    assert list(frame.columns[:5]) == ["sample_id", "plant_id", "label", "stage_gdd", "wl_350.5"]
    assert frame["label"].sum() == 10


def test_synth_stage_picks_preset(tmp_path, capsys):
    path = tmp_path / "late.csv"
    assert main(["synth", "--out", str(path), "--stage", "1216", "--plants", "3"]) == 0
    frame = pd.read_csv(path)
    assert set(frame["stage_gdd"]) == {1216.0}
    assert "effect size 5" in capsys.readouterr().out


def test_synth_all_stages(tmp_path):
    path = synth(tmp_path, "all.csv", "--all-stages")
    frame = pd.read_csv(path)
    assert sorted(set(frame["stage_gdd"])) == [585.0, 897.0, 1216.0, 1568.0]


def test_preprocess_writes_artifacts(tmp_path):
    spectra = synth(tmp_path)
    out = tmp_path / "prep"
    corr = tmp_path / "corr.csv"
    argv = ["preprocess", "--in", str(spectra), "--out", str(out), "--corr-out", str(corr)]
    assert main(argv) == 0

    band_map = json.loads((out / "band_map.json").read_text())
    assert band_map["original_band_count"] == 2101
    assert band_map["reduced_band_count"] < 2101
    scaler = json.loads((out / "scaler.json").read_text())
    assert len(scaler["mean"]) == band_map["reduced_band_count"]
    features = pd.read_csv(out / "features.csv")
    assert len(features) == 20
    assert features.shape[1] == 4 + band_map["reduced_band_count"]

    matrix = pd.read_csv(corr)
    assert matrix.columns[0] == "wavelength_nm"
    assert matrix["wavelength_nm"].iloc[1] - matrix["wavelength_nm"].iloc[0] == 10


def test_gdd_report(tmp_path):
    start = date(2024, 4, 15)
    temps = tmp_path / "temps.csv"
    rows = [f"{start + timedelta(days=i)},15,25" for i in range(100)]
    temps.write_text("date,t_min,t_max\n" + "\n".join(rows) + "\n")

    out = tmp_path / "gdd.json"
    assert main(["gdd", "--in", str(temps), "--out", str(out)]) == 0
    report = json.loads(out.read_text())
    assert report["gdd"] == pytest.approx(1000.0)
    assert report["stage"] == "flowering"
    assert report["stage_dates"]["vegetative"] == "2024-06-12"
    assert report["start"] is None

    later = tmp_path / "later.json"
    argv = ["gdd", "--in", str(temps), "--out", str(later), "--start", "2024-04-20"]
    assert main(argv) == 0
    assert json.loads(later.read_text())["gdd"] == pytest.approx(950.0)


def test_rmd_table(tmp_path):
    spectra = synth(tmp_path)
    out = tmp_path / "rmd.csv"
    assert main(["rmd", "--in", str(spectra), "--out", str(out), "--no-merge"]) == 0
    frame = pd.read_csv(out)
    assert list(frame.columns) == ["wavelength_nm", "mu_non", "mu_inf", "rmd"]
    assert len(frame) == 2101
    row = frame.iloc[(frame["wavelength_nm"] - 1450).abs().argmin()]
    assert row["rmd"] < 0


def test_errors_print_one_line_and_exit_1(tmp_path, capsys):
    assert main(["preprocess", "--in", str(tmp_path / "absent.csv"), "--out", str(tmp_path)]) == 1
    err = capsys.readouterr().err.strip().splitlines()
    assert err[-1].startswith("error: data: ")

    assert main(["preprocess", "--out", str(tmp_path)]) == 1
    assert capsys.readouterr().err.strip() == "error: config: an input file is required (--in)"


def test_config_keys_are_checked(tmp_path, capsys):
    config = tmp_path / "run.json"
    config.write_text(json.dumps({"preprocess": {"sg_windw": 9}}))
    assert main(["synth", "--config", str(config), "--out", str(tmp_path / "x.csv")]) == 1
    assert "error: config: unknown config key: preprocess.sg_windw" in capsys.readouterr().err


def test_several_stages_need_a_choice(tmp_path, capsys):
    spectra = synth(tmp_path, "all.csv", "--all-stages")
    assert main(["rmd", "--in", str(spectra), "--out", str(tmp_path / "r.csv")]) == 1
    assert "choose one with --stage" in capsys.readouterr().err
    argv = ["rmd", "--in", str(spectra), "--out", str(tmp_path / "r.csv"), "--stage", "897"]
    assert main(argv) == 0


def test_bad_thread_environment(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("SPECTRA_THREADS", "many")
    assert main(["train", "--in", str(tmp_path / "x.csv"), "--out", str(tmp_path)]) == 1
    assert "SPECTRA_THREADS must be an integer" in capsys.readouterr().err


def test_unknown_flag_is_a_usage_error():
    with pytest.raises(SystemExit) as exc:
        build_parser().parse_args(["synth", "--colour", "green"])
    assert exc.value.code == 2


@pytest.mark.slow
def test_pipeline_results_do_not_depend_on_threads(tmp_path):
    spectra = tmp_path / "spectra.csv"
    assert main(["synth", "--out", str(spectra), "--seed", "3", "--plants", "10"]) == 0

    outputs = []
    for threads in ("1", "2"):
        out = tmp_path / f"run{threads}"
        argv = ["train", "--in", str(spectra), "--out", str(out), "--threads", threads]
        assert main(argv) == 0
        outputs.append(out)
    for name in ("model.json", "selection.json", "oof.csv"):
        assert (outputs[0] / name).read_bytes() == (outputs[1] / name).read_bytes()

    for out in outputs:
        argv = ["evaluate", "--in", str(spectra), "--model", str(out / "model.json")]
        assert main(argv + ["--out", str(out)]) == 0
    for name in ("metrics.json", "metrics_validation.json"):
        assert (outputs[0] / name).read_bytes() == (outputs[1] / name).read_bytes()

    model = str(outputs[0] / "model.json")
    run = outputs[0]
    metrics = json.loads((run / "metrics.json").read_text())
    assert metrics["split"] == "test"
    assert metrics["confusion"]["tp"] + metrics["confusion"]["fn"] == 4
    assert (run / "metrics_validation.json").exists()

    argv = ["importance", "--in", str(spectra), "--model", model, "--out", str(run)]
    assert main(argv + ["--repeats", "2", "--per-model"]) == 0
    importance = pd.read_csv(run / "importance.csv")
    assert list(importance.columns) == ["representative_nm", "importance_mean", "importance_sd"]
    selected = json.loads((run / "model.json").read_text())["selected"]
    for model_id in selected:
        assert (run / f"importance_{model_id.replace('#', '_')}.csv").exists()

"""Tests for the spectra and temperature CSV parsers."""

from datetime import date

import numpy as np
import pytest

from src.models.errors import DataFormatError
from src.parsers.spectra_parser import (
    band_column,
    format_wavelength,
    get_spectra_summary,
    parse_spectra_csv,
    spectra_to_frame,
)
from src.parsers.temperature_parser import get_temperature_summary, parse_temperature_csv

HEADER = "sample_id,plant_id,label,stage_gdd,wl_400,wl_401,wl_402\n"


def write(tmp_path, text, name="spectra.csv"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def test_band_column_names():
    assert format_wavelength(1000.0) == "1000"
    assert format_wavelength(350.5) == "350.5"
    assert format_wavelength(1003.8) == "1003.8"
    assert band_column(1892.5) == "wl_1892.5"


def test_parse_minimal_file(tmp_path):
    path = write(
        tmp_path,
        HEADER + "a,P1,1,585,0.1,0.2,0.3\n" "b,P2,0,585,0.4,0.5,0.6\n",
    )
    ds = parse_spectra_csv(path)
    assert ds.n_samples == 2
    assert ds.wavelengths.tolist() == [400.0, 401.0, 402.0]
    assert ds.labels.tolist() == [1, 0]
    assert ds.sample_ids == ["a", "b"]
    assert ds.plant_ids == ["P1", "P2"]
    np.testing.assert_array_equal(ds.samples[1], [0.4, 0.5, 0.6])


def test_written_spectra_reread_bit_identical(tmp_path, small_spectra):
    path = tmp_path / "synth.csv"
    spectra_to_frame(small_spectra).to_csv(path, index=False)
    ds = parse_spectra_csv(path)
    np.testing.assert_array_equal(ds.samples, small_spectra.samples)
    np.testing.assert_array_equal(ds.wavelengths, small_spectra.wavelengths)
    assert ds.sample_ids == small_spectra.sample_ids


def test_bad_label_names_csv_row(tmp_path):
    path = write(
        tmp_path,
        HEADER + "a,P1,1,585,0.1,0.2,0.3\n" "b,P2,2,585,0.4,0.5,0.6\n",
    )
    with pytest.raises(DataFormatError) as exc:
        parse_spectra_csv(path)
    assert exc.value.row == 3
    assert exc.value.one_line().startswith("error: data: row 3:")


def test_non_numeric_reflectance_names_row_and_column(tmp_path):
    path = write(tmp_path, HEADER + "a,P1,1,585,0.1,abc,0.3\n")
    with pytest.raises(DataFormatError, match="row 2: .*wl_401"):
        parse_spectra_csv(path)


def test_reflectance_out_of_range(tmp_path):
    path = write(tmp_path, HEADER + "a,P1,1,585,0.1,-0.2,0.3\n")
    with pytest.raises(DataFormatError, match="outside"):
        parse_spectra_csv(path)


def test_duplicate_sample_id(tmp_path):
    path = write(
        tmp_path,
        HEADER + "a,P1,1,585,0.1,0.2,0.3\n" "a,P2,0,585,0.4,0.5,0.6\n",
    )
    with pytest.raises(DataFormatError, match="row 3: duplicate sample_id"):
        parse_spectra_csv(path)


def test_header_must_start_with_metadata(tmp_path):
    path = write(tmp_path, "plant_id,sample_id,label,stage_gdd,wl_400\nP1,a,1,585,0.1\n")
    with pytest.raises(DataFormatError, match="header"):
        parse_spectra_csv(path)


def test_band_columns_must_increase(tmp_path):
    path = write(tmp_path, "sample_id,plant_id,label,stage_gdd,wl_401,wl_400\na,P1,1,585,0.1,0.2\n")
    with pytest.raises(DataFormatError, match="increasing"):
        parse_spectra_csv(path)


def test_missing_file(tmp_path):
    with pytest.raises(DataFormatError, match="not found"):
        parse_spectra_csv(tmp_path / "absent.csv")


def test_spectra_summary(small_spectra):
    summary = get_spectra_summary(small_spectra)
    assert summary["num_samples"] == 24
    assert summary["num_infected"] == 12
    assert summary["num_plants"] == 12
    assert summary["uniform_grid"] is False
    assert summary["stages_gdd"] == [585.0]


def test_parse_temperatures(tmp_path):
    path = write(
        tmp_path,
        "date,t_min,t_max,t_mean\n" "2024-04-15,10,20,\n" "2024-04-16,12,20,18\n",
        name="temps.csv",
    )
    records = parse_temperature_csv(path)
    assert [r.date for r in records] == [date(2024, 4, 15), date(2024, 4, 16)]
    assert records[0].daily_mean == 15.0
    assert records[1].daily_mean == 18.0
    summary = get_temperature_summary(records)
    assert summary["num_days"] == 2
    assert summary["mean_temperature"] == pytest.approx(16.5)


def test_temperature_errors_carry_row(tmp_path):
    path = write(tmp_path, "date,t_min,t_max\n2024-04-15,10,20\nnot-a-date,1,2\n", "t.csv")
    with pytest.raises(DataFormatError, match="row 3"):
        parse_temperature_csv(path)

    path = write(tmp_path, "date,t_min,t_max\n2024-04-15,25,20\n", "t2.csv")
    with pytest.raises(DataFormatError, match="row 2: .*t_min exceeds t_max"):
        parse_temperature_csv(path)


def test_temperature_columns_checked(tmp_path):
    path = write(tmp_path, "date,t_max\n2024-04-15,20\n", "t.csv")
    with pytest.raises(DataFormatError, match="missing columns: t_min"):
        parse_temperature_csv(path)

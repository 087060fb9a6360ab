"""Parser for the leaf spectra CSV file."""

from pathlib import Path
from typing import List

import numpy as np
import pandas as pd

from ..models.errors import DataFormatError
from ..models.spectra import LeafClass, SpectralDataset, WavelengthGrid

META_COLUMNS = ["sample_id", "plant_id", "label", "stage_gdd"]
BAND_PREFIX = "wl_"


def format_wavelength(wavelength_nm: float) -> str:
    """Column suffix for a band: up to 4 decimals, trailing zeros stripped."""
    text = f"{float(wavelength_nm):.4f}".rstrip("0").rstrip(".")
    return text


def band_column(wavelength_nm: float) -> str:
    return f"{BAND_PREFIX}{format_wavelength(wavelength_nm)}"


def parse_band_columns(columns: List[str]) -> np.ndarray:
    """Wavelengths from `wl_<nm>` headers, in file order."""
    wavelengths = []
    for col in columns:
        if not col.startswith(BAND_PREFIX):
            raise DataFormatError(f"unexpected column '{col}'; band columns must be wl_<nm>")
        try:
            wavelengths.append(float(col[len(BAND_PREFIX):]))
        except ValueError:
            raise DataFormatError(f"cannot read wavelength from column '{col}'") from None
    return np.array(wavelengths, dtype=float)


def _csv_row(index: int) -> int:
    """Line number of data row `index` (the header is line 1)."""
    return index + 2


def parse_spectra_csv(file_path: Path) -> SpectralDataset:
    """
    Parse a spectra CSV into a SpectralDataset.

    Args:
        file_path: Path to a CSV with header sample_id,plant_id,label,stage_gdd,wl_<nm>,...

    Returns:
        SpectralDataset with reflectance rows in file order
    """
    file_path = Path(file_path)
    if not file_path.exists():
        raise DataFormatError(f"spectra file not found: {file_path}")
    try:
        df = pd.read_csv(
            file_path,
            dtype={"sample_id": str, "plant_id": str},
            float_precision="round_trip",
            encoding="utf-8",
        )
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise DataFormatError(f"cannot read spectra CSV: {e}") from e

    columns = list(df.columns)
    if columns[: len(META_COLUMNS)] != META_COLUMNS:
        raise DataFormatError(f"header must start with {','.join(META_COLUMNS)}")
    band_cols = columns[len(META_COLUMNS):]
    if not band_cols:
        raise DataFormatError("spectra CSV has no band columns")
    grid = WavelengthGrid(parse_band_columns(band_cols))

    for col in ("sample_id", "plant_id"):
        missing = df[col].isna().to_numpy()
        if missing.any():
            raise DataFormatError(f"missing {col}", row=_csv_row(int(np.argmax(missing))))

    labels = pd.to_numeric(df["label"], errors="coerce").to_numpy(dtype=float)
    bad = ~np.isin(labels, [c.value for c in LeafClass])
    if bad.any():
        i = int(np.argmax(bad))
        raise DataFormatError(
            f"label must be 0 or 1, got '{df['label'].iloc[i]}'", row=_csv_row(i)
        )

    stage = pd.to_numeric(df["stage_gdd"], errors="coerce").to_numpy(dtype=float)
    bad = ~np.isfinite(stage) | (stage < 0)
    if bad.any():
        row = _csv_row(int(np.argmax(bad)))
        raise DataFormatError("stage_gdd must be a non-negative number", row=row)

    samples = df[band_cols].apply(pd.to_numeric, errors="coerce").to_numpy(dtype=float)
    bad_rows = ~np.all(np.isfinite(samples), axis=1)
    if bad_rows.any():
        i = int(np.argmax(bad_rows))
        j = int(np.argmax(~np.isfinite(samples[i])))
        raise DataFormatError(f"non-numeric or non-finite value in {band_cols[j]}", row=_csv_row(i))
    out_of_range = (samples < 0.0) | (samples > 1.5)
    if out_of_range.any():
        i = int(np.argmax(out_of_range.any(axis=1)))
        raise DataFormatError("reflectance outside [0, 1.5]", row=_csv_row(i))

    duplicated = df["sample_id"].duplicated().to_numpy()
    if duplicated.any():
        raise DataFormatError("duplicate sample_id", row=_csv_row(int(np.argmax(duplicated))))

    return SpectralDataset(
        grid=grid,
        samples=samples,
        labels=labels.astype(int),
        plant_ids=df["plant_id"].tolist(),
        stage_gdd=stage,
        sample_ids=df["sample_id"].tolist(),
    )


def spectra_to_frame(ds: SpectralDataset) -> pd.DataFrame:
    """Tabular form of a dataset, ready for `to_csv(index=False)`."""
    meta = pd.DataFrame(
        {
            "sample_id": ds.sample_ids,
            "plant_id": ds.plant_ids,
            "label": ds.labels.astype(int),
            "stage_gdd": ds.stage_gdd.astype(float),
        }
    )
    bands = pd.DataFrame(ds.samples, columns=[band_column(wl) for wl in ds.wavelengths])
    return pd.concat([meta, bands], axis=1)


def get_spectra_summary(ds: SpectralDataset) -> dict:
    """
    Generate summary statistics for a spectra dataset.

    Args:
        ds: Parsed dataset

    Returns:
        Dictionary with summary statistics
    """
    n_non, n_inf = ds.class_counts()
    return {
        "num_samples": ds.n_samples,
        "num_bands": ds.n_bands,
        "num_plants": len(set(ds.plant_ids)),
        "num_infected": n_inf,
        "num_non_infected": n_non,
        "wavelength_min_nm": float(ds.wavelengths[0]),
        "wavelength_max_nm": float(ds.wavelengths[-1]),
        "uniform_grid": ds.grid.is_uniform,
        "stages_gdd": ds.stages(),
    }

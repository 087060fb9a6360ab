"""Parser for daily temperature CSV files."""

from datetime import date
from pathlib import Path
from typing import List, Optional

import pandas as pd
from dateutil.parser import isoparse

from ..models.errors import DataFormatError, PhenologyError
from ..models.phenology import TemperatureRecord

REQUIRED_COLUMNS = ["date", "t_min", "t_max"]


def parse_date(value, row: int) -> date:
    """Parse an ISO-8601 calendar date."""
    if pd.isna(value) or not str(value).strip():
        raise DataFormatError("missing date", row=row)
    try:
        return isoparse(str(value).strip()).date()
    except ValueError:
        raise DataFormatError(f"invalid ISO-8601 date '{value}'", row=row) from None


def parse_temperature(value, column: str, row: int) -> Optional[float]:
    """Parse a °C value; blank cells become None."""
    if pd.isna(value) or (isinstance(value, str) and not value.strip()):
        return None
    try:
        return float(value)
    except (TypeError, ValueError):
        raise DataFormatError(f"{column} is not a number: '{value}'", row=row) from None


def parse_temperature_csv(file_path: Path) -> List[TemperatureRecord]:
    """
    Parse a daily temperature CSV.

    Args:
        file_path: Path to a CSV with columns date,t_min,t_max[,t_mean]

    Returns:
        List of TemperatureRecord objects in file order
    """
    file_path = Path(file_path)
    if not file_path.exists():
        raise DataFormatError(f"temperature file not found: {file_path}")
    df = pd.read_csv(file_path, dtype=str, keep_default_na=True)

    missing = [c for c in REQUIRED_COLUMNS if c not in df.columns]
    if missing:
        raise DataFormatError(f"temperature CSV is missing columns: {', '.join(missing)}")
    extra = [c for c in df.columns if c not in REQUIRED_COLUMNS + ["t_mean"]]
    if extra:
        raise DataFormatError(f"unexpected temperature columns: {', '.join(extra)}")

    records = []
    for i, row in df.iterrows():
        line = int(i) + 2
        try:
            record = TemperatureRecord(
                date=parse_date(row.get("date"), line),
                t_mean=parse_temperature(row.get("t_mean"), "t_mean", line),
                t_min=parse_temperature(row.get("t_min"), "t_min", line),
                t_max=parse_temperature(row.get("t_max"), "t_max", line),
            )
        except PhenologyError as e:
            raise DataFormatError(e.message, row=line) from e
        records.append(record)

    return records


def get_temperature_summary(records: List[TemperatureRecord]) -> dict:
    """Summary of a temperature series."""
    if not records:
        return {"num_days": 0}
    means = [r.daily_mean for r in records]
    return {
        "num_days": len(records),
        "first_date": records[0].date.isoformat(),
        "last_date": records[-1].date.isoformat(),
        "mean_temperature": sum(means) / len(means),
    }

"""Growing degree day accumulation."""

import logging
from datetime import date
from typing import Dict, List, Optional, Sequence, Tuple

from ..models.config import GddConfig
from ..models.errors import PhenologyError
from ..models.phenology import StageTable, TemperatureRecord
from .stage_rules import StageRules

logger = logging.getLogger(__name__)


def _check_order(records: Sequence[TemperatureRecord]) -> None:
    for prev, cur in zip(records, records[1:]):
        if cur.date == prev.date:
            raise PhenologyError(f"duplicate date {cur.date.isoformat()}")
        if cur.date < prev.date:
            raise PhenologyError(
                f"dates out of order: {cur.date.isoformat()} after {prev.date.isoformat()}"
            )


def daily_increment(record: TemperatureRecord, cfg: GddConfig) -> float:
    """One day's contribution, T_mean - T_base, floored at 0 when clamping."""
    value = record.daily_mean - float(cfg.t_base)
    if cfg.clamp_negative:
        return max(0.0, value)
    return value


def cumulative_gdd(
    records: Sequence[TemperatureRecord], cfg: Optional[GddConfig] = None
) -> List[Tuple[date, float]]:
    """Running GDD total after each day."""
    cfg = cfg or GddConfig()
    records = list(records)
    _check_order(records)
    total = 0.0
    series = []
    for record in records:
        total += daily_increment(record, cfg)
        series.append((record.date, total))
    return series


def compute_gdd(records: Sequence[TemperatureRecord], cfg: Optional[GddConfig] = None) -> float:
    """
    Accumulated growing degree days over a daily series.

    Args:
        records: Daily records ordered by date, no duplicates
        cfg: Base temperature and clamping mode

    Returns:
        GDD in °C·day
    """
    series = cumulative_gdd(records, cfg)
    total = series[-1][1] if series else 0.0
    logger.debug("GDD over %d days: %.2f", len(series), total)
    return total


def records_from(records: Sequence[TemperatureRecord], start: date) -> List[TemperatureRecord]:
    """Records on or after `start` (e.g. the transplant date)."""
    return [r for r in records if r.date >= start]


def stage_dates(
    records: Sequence[TemperatureRecord],
    table: Optional[StageTable] = None,
    cfg: Optional[GddConfig] = None,
) -> Dict[str, date]:
    """First date each stage's GDD threshold is reached; unreached stages are absent."""
    table = table or StageRules.TABLE
    reached: Dict[str, date] = {}
    pending = list(table.stages)
    for day, total in cumulative_gdd(records, cfg):
        while pending and total >= pending[0][1]:
            reached[pending.pop(0)[0]] = day
        if not pending:
            break
    return reached

"""Tests for growing degree days and stage lookup."""

from datetime import date, timedelta

import pytest

from src.calculators.gdd_calculator import (
    compute_gdd,
    cumulative_gdd,
    daily_increment,
    records_from,
    stage_dates,
)
from src.calculators.stage_rules import StageRules
from src.models.config import GddConfig
from src.models.errors import PhenologyError
from src.models.phenology import StageTable, TemperatureRecord

START = date(2024, 4, 15)


def daily(means, start=START):
    return [TemperatureRecord(start + timedelta(days=i), t_mean=m) for i, m in enumerate(means)]


def test_hand_computed_series():
    records = daily([20.0, 15.0, 8.0])
    assert compute_gdd(records) == pytest.approx(15.0)
    assert compute_gdd(records, GddConfig(clamp_negative=False)) == pytest.approx(13.0)
    assert compute_gdd(records, GddConfig(t_base=5.0)) == pytest.approx(28.0)


def test_min_max_mean_is_used_when_mean_missing():
    record = TemperatureRecord(START, t_min=12.0, t_max=30.0)
    assert daily_increment(record, GddConfig()) == pytest.approx(11.0)


def test_empty_series_is_zero():
    assert compute_gdd([]) == 0.0


def test_duplicate_and_unordered_dates_rejected():
    with pytest.raises(PhenologyError, match="duplicate date"):
        compute_gdd(daily([20.0]) + daily([21.0]))
    records = daily([20.0, 20.0])
    with pytest.raises(PhenologyError, match="out of order"):
        compute_gdd(records[::-1])


def test_record_needs_temperatures():
    with pytest.raises(PhenologyError):
        TemperatureRecord(START, t_min=10.0)


def test_cumulative_series_ends_at_total():
    records = daily([14.0, 22.0, 9.0, 30.0])
    series = cumulative_gdd(records)
    assert [total for _, total in series] == pytest.approx([4.0, 16.0, 16.0, 36.0])
    assert series[-1][1] == compute_gdd(records)


def test_stage_of_table_values():
    assert StageRules.stage_of(585) == "vegetative"
    assert StageRules.stage_of(897) == "flowering"
    assert StageRules.stage_of(1216) == "fruit development"
    assert StageRules.stage_of(1568) == "ripening"
    assert StageRules.stage_of(584.9) == "pre-vegetative"
    assert StageRules.stage_of(2000) == "ripening"
    with pytest.raises(PhenologyError):
        StageRules.stage_of(-1.0)


def test_synth_presets_follow_stage():
    assert StageRules.synth_preset(585) == "early"
    assert StageRules.synth_preset(897) == "early"
    assert StageRules.synth_preset(1216) == "late"
    assert StageRules.synth_preset(1568) == "late"


def test_stage_table_must_increase():
    with pytest.raises(PhenologyError):
        StageTable(stages=(("a", 10.0), ("b", 10.0)))
    assert StageTable.tomato().value_of("flowering") == 897.0


def test_stage_dates_from_transplant():
    records = daily([20.0] * 100)
    reached = stage_dates(records)
    # 59 days x 10 = 590 >= 585, 58 days give 580
    assert reached["vegetative"] == START + timedelta(days=58)
    assert reached["flowering"] == START + timedelta(days=89)
    assert "fruit development" not in reached


def test_records_from_start_date():
    records = daily([20.0] * 10)
    later = records_from(records, START + timedelta(days=4))
    assert len(later) == 6
    assert compute_gdd(later) == pytest.approx(60.0)


def test_gdd_adds_over_consecutive_ranges():
    means = [3.0, 12.5, 18.0, 25.5, 9.0, 31.0, 14.0, 7.5]
    records = daily(means)
    for cut in range(len(means) + 1):
        head, tail = records[:cut], records[cut:]
        for cfg in (GddConfig(), GddConfig(clamp_negative=False)):
            assert compute_gdd(records, cfg) == pytest.approx(
                compute_gdd(head, cfg) + compute_gdd(tail, cfg), abs=1e-12
            )


def test_gdd_grows_with_temperature_and_days():
    means = [8.0, 12.5, 18.0, 25.5, 9.0]
    base = compute_gdd(daily(means))
    for i in range(len(means)):
        warmer = list(means)
        warmer[i] += 4.0
        assert compute_gdd(daily(warmer)) >= base
    for n in range(len(means)):
        assert compute_gdd(daily(means[:n])) <= compute_gdd(daily(means[: n + 1]))


def test_stage_index_never_decreases():
    grid = [0.0, 100.0, 584.9, 585.0, 800.0, 897.0, 1216.0, 1500.0, 1568.0, 3000.0]
    indices = [StageRules.stage_index(g) for g in grid]
    assert indices == sorted(indices)
    assert indices[0] == 0
    assert StageRules.stage_index(585.0) == 1
    assert indices[-1] == StageRules.stage_index(1568.0)

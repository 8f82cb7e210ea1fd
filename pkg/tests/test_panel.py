"""
Tests for panel ingestion, inflation adjustment, equity filtering, snapshots
and summary statistics
"""

import math
import random

import numpy as np
import pytest
from pydantic import ValidationError

from base.errors import (
    DataError,
    DuplicateRecordError,
    EmptySampleError,
    EmptySnapshotError,
    MalformedRowError,
    MissingCpiMonthError,
    SchemaMismatchError,
)
from engine.panel import (
    FundRecordReader,
    adjust_inflation,
    filter_equity,
    load_cpi_table,
    load_fund_records,
    month_snapshot,
    read_sample,
    summary_stats,
    write_fund_records,
    write_sample,
    year_end_snapshot,
)
from models.panel import CpiTable, FundRecord, SizeSample
from models.types import LogBase

HEADER = "fund_id,month,tasm_millions,nav,equity_fraction\n"


def record(fund_id, month, tasm, equity_fraction=0.9, nav=None):
    return FundRecord(fund_id=fund_id, month=month, tasm=tasm, nav=nav, equity_fraction=equity_fraction)


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text, encoding='utf-8')
    return path


# ==================== Loading ====================

@pytest.mark.smoke
def test_three_row_fixture_parses(three_row_fund_file):
    """Test: shipped 3-row file gives the stated field values"""
    records = load_fund_records(three_row_fund_file)

    assert [r.fund_id for r in records] == ['F001', 'F002', 'F003']
    assert records[0] == record('F001', '1995-12', 120.5, 0.95, nav=10.25)
    assert records[1].nav is None
    assert records[1].tasm == 3400.0
    assert records[1].equity_fraction == 0.80
    assert records[2].month == '1996-01'
    assert records[2].tasm == 0.75


@pytest.mark.smoke
def test_empty_file_with_header(tmp_path):
    reader = FundRecordReader(write(tmp_path, "empty.csv", HEADER))

    assert reader.read_records() == []
    assert reader.dropped_missing_tasm == 0


@pytest.mark.smoke
def test_blank_tasm_rows_are_dropped_and_counted(tmp_path):
    path = write(tmp_path, "blank.csv", HEADER + "A,2000-12,10,1,0.9\nB,2000-12,,1,0.9\n")
    reader = FundRecordReader(path)

    records = reader.read_records()

    assert [r.fund_id for r in records] == ['A']
    assert reader.dropped_missing_tasm == 1


@pytest.mark.smoke
def test_schema_mismatch_lists_missing_columns(tmp_path):
    path = write(tmp_path, "schema.csv", "fund_id,month,tasm_millions,nav\nA,2000-12,10,1\n")

    with pytest.raises(SchemaMismatchError) as info:
        load_fund_records(path)

    assert info.value.missing_columns == ['equity_fraction']
    assert 'equity_fraction' in str(info.value)


@pytest.mark.smoke
@pytest.mark.parametrize("bad_row", [
    "B,2000-12,12a,1,0.9",      # not a number
    "B,2000-12,\"1,5\",1,0.9",  # comma decimal
    "B,2000-13,12,1,0.9",       # no such month
    "B,1960-12,12,1,0.9",       # before the panel start
    "B,2000-12,-3,1,0.9",       # negative size
    "B,2000-12,12,1,1.5",       # equity fraction above 1
    "B,2000-12,nan,1,0.9",
])
def test_malformed_row_reports_line_number(tmp_path, bad_row):
    path = write(tmp_path, "bad.csv", HEADER + "A,2000-12,10,1,0.9\n" + bad_row + "\n")

    with pytest.raises(MalformedRowError) as info:
        load_fund_records(path)

    assert info.value.line_number == 3
    assert info.value.exit_code == 2


@pytest.mark.smoke
def test_row_with_extra_fields_is_malformed(tmp_path):
    path = write(tmp_path, "wide.csv", HEADER + "A,2000-12,10,1,0.9\nB,2000-12,10,1,0.9,7\n")

    with pytest.raises(MalformedRowError):
        load_fund_records(path)


@pytest.mark.smoke
@pytest.mark.parametrize("gap", ["\n", "\n\n", "  \n"])
def test_line_numbers_count_blank_lines(tmp_path, gap):
    """Test: a bad row after blank lines is reported at its physical line"""
    path = write(tmp_path, "gaps.csv", HEADER + "A,2000-12,10,1,0.9\n" + gap + "B,2000-12,abc,1,0.9\n")
    expected_line = 3 + gap.count("\n")

    with pytest.raises(MalformedRowError) as info:
        load_fund_records(path)

    assert info.value.line_number == expected_line
    assert f":{expected_line}:" in str(info.value)


@pytest.mark.smoke
def test_blank_lines_are_skipped(tmp_path):
    path = write(tmp_path, "gaps.csv", HEADER + "\nA,2000-12,10,1,0.9\n\nB,2000-12,12,1,0.9\n\n")
    reader = FundRecordReader(path)

    assert [r.fund_id for r in reader.read_records()] == ['A', 'B']
    assert reader.dropped_missing_tasm == 0


@pytest.mark.smoke
def test_cpi_and_sample_line_numbers_count_blank_lines(tmp_path):
    cpi = write(tmp_path, "cpi.csv", "month,index\n2007-07,200\n\n2007-07,201\n")
    sizes = write(tmp_path, "sample.csv", "size_millions\n1.5\n\n\n2.5\nabc\n")

    with pytest.raises(MalformedRowError) as cpi_info:
        load_cpi_table(cpi)
    with pytest.raises(MalformedRowError) as sample_info:
        read_sample(sizes)

    assert cpi_info.value.line_number == 4
    assert sample_info.value.line_number == 6


@pytest.mark.smoke
def test_missing_file_is_a_data_error(tmp_path):
    with pytest.raises(DataError):
        load_fund_records(tmp_path / "absent.csv")


@pytest.mark.smoke
def test_normalized_records_reload_identically(tmp_path, three_row_fund_file):
    records = load_fund_records(three_row_fund_file)

    path = write_fund_records(records, tmp_path / "normalized.csv")

    assert load_fund_records(path) == records


# ==================== CPI ====================

@pytest.mark.smoke
def test_cpi_table_loads(three_month_cpi_file):
    cpi = load_cpi_table(three_month_cpi_file)

    assert cpi.base_month == '2007-07'
    assert cpi.index == {'1995-12': 150.0, '1996-01': 160.0, '2007-07': 200.0}


@pytest.mark.smoke
def test_cpi_table_requires_base_month(three_month_cpi_file):
    with pytest.raises(DataError):
        load_cpi_table(three_month_cpi_file, base_month='2008-01')


@pytest.mark.smoke
def test_cpi_duplicate_month_is_malformed(tmp_path):
    path = write(tmp_path, "cpi.csv", "month,index\n2007-07,200\n2007-07,201\n")

    with pytest.raises(MalformedRowError) as info:
        load_cpi_table(path)

    assert info.value.line_number == 3


@pytest.mark.smoke
def test_cpi_index_must_be_positive():
    with pytest.raises(ValidationError):
        CpiTable(index={'2007-07': 200.0, '2000-01': 0.0})


# ==================== Inflation Adjustment ====================

@pytest.mark.smoke
def test_adjustment_fixture_matches_hand_values(three_row_fund_file, three_month_cpi_file):
    """Test: tasm × 200/150 for 1995-12 and × 200/160 for 1996-01"""
    adjusted = adjust_inflation(load_fund_records(three_row_fund_file), load_cpi_table(three_month_cpi_file))

    assert adjusted[0].tasm == pytest.approx(160.66666666666666, rel=1e-14)
    assert adjusted[1].tasm == pytest.approx(4533.333333333333, rel=1e-14)
    assert adjusted[2].tasm == pytest.approx(0.9375, rel=1e-14)
    assert adjusted[1].nav is None
    assert adjusted[0].equity_fraction == 0.95


@pytest.mark.smoke
def test_adjustment_ratio_and_identity():
    cpi = CpiTable(index={'2000-12': 100.0, '2001-12': 200.0, '2007-07': 200.0})
    records = [record('A', '2000-12', 50.0), record('B', '2001-12', 70.0)]

    adjusted = adjust_inflation(records, cpi)

    assert adjusted[0].tasm == 100.0
    assert adjusted[1].tasm == 70.0


@pytest.mark.smoke
def test_adjustment_missing_month():
    cpi = CpiTable(index={'2007-07': 200.0})

    with pytest.raises(MissingCpiMonthError) as info:
        adjust_inflation([record('A', '2000-12', 50.0)], cpi)

    assert info.value.month == '2000-12'
    assert '2000-12' in str(info.value)


@pytest.mark.numerics
def test_adjusting_twice_equals_squared_ratios():
    cpi = CpiTable(index={'1999-12': 160.0, '2003-06': 185.5, '2007-07': 207.3})
    squared = CpiTable(index={m: v * v / 207.3 for m, v in cpi.index.items()
                              if m != '2007-07'} | {'2007-07': 207.3})
    records = [record('A', '1999-12', 123.4), record('B', '2003-06', 9.87)]

    twice = adjust_inflation(adjust_inflation(records, cpi), cpi)
    once = adjust_inflation(records, squared)

    for a, b in zip(twice, once):
        assert a.tasm == pytest.approx(b.tasm, rel=1e-12)


@pytest.mark.numerics
def test_constant_table_is_identity():
    cpi = CpiTable(index={'1999-12': 150.0, '2007-07': 150.0})
    records = [record('A', '1999-12', 123.4)]

    assert adjust_inflation(records, cpi) == records


@pytest.mark.numerics
def test_filter_and_adjust_commute():
    """Test: filtering before or after adjustment gives the same records"""
    rng = random.Random(5)
    months = ['2001-12', '2002-12', '2003-12']
    cpi = CpiTable(index={'2001-12': 177.0, '2002-12': 180.9, '2003-12': 185.0, '2007-07': 208.0})
    records = [record(f"F{i}", rng.choice(months), rng.uniform(0, 5000), round(rng.random(), 2))
               for i in range(200)]

    first = adjust_inflation(filter_equity(records, 0.8), cpi)
    second = filter_equity(adjust_inflation(records, cpi), 0.8)

    assert first == second


# ==================== Equity Filter ====================

@pytest.mark.smoke
def test_equity_threshold_is_inclusive():
    records = [record('A', '2000-12', 1.0, 0.79), record('B', '2000-12', 1.0, 0.80),
               record('C', '2000-12', 1.0, 0.81)]

    assert [r.fund_id for r in filter_equity(records)] == ['B', 'C']
    assert filter_equity(records, 0.0) == records
    assert filter_equity(records + [record('D', '2000-12', 1.0, 1.0)], 1.0)[0].fund_id == 'D'


# ==================== Snapshots ====================

@pytest.mark.smoke
def test_year_end_snapshot_uses_december_records():
    records = [record('A', '2000-12', 100.0), record('B', '2000-12', 200.0), record('C', '2000-11', 50.0)]

    snapshot = year_end_snapshot(records, 2000)

    assert snapshot.sizes == [100.0, 200.0]
    assert snapshot.as_of == '2000-12'
    assert snapshot.source_count == 2


@pytest.mark.smoke
def test_snapshot_errors():
    with pytest.raises(EmptySnapshotError):
        year_end_snapshot([record('A', '2000-11', 1.0)], 2000)
    with pytest.raises(DuplicateRecordError):
        year_end_snapshot([record('A', '2000-12', 1.0), record('A', '2000-12', 2.0)], 2000)


@pytest.mark.smoke
def test_snapshot_excludes_and_counts_zero_sizes():
    snapshot = month_snapshot([record('A', '2000-06', 0.0), record('B', '2000-06', 4.0)], '2000-06')

    assert snapshot.sizes == [4.0]
    assert snapshot.excluded_zero == 1
    assert snapshot.source_count == 2


@pytest.mark.numerics
def test_snapshot_ignores_record_order():
    rng = random.Random(9)
    records = [record(f"F{i}", '2001-12', rng.uniform(0.1, 900.0)) for i in range(50)]
    shuffled = list(records)
    rng.shuffle(shuffled)

    assert year_end_snapshot(records, 2001) == year_end_snapshot(shuffled, 2001)


@pytest.mark.smoke
@pytest.mark.parametrize("threshold, expected", [
    (0.80, {1993: (2, 3, 1), 1994: (4, 4, 0), 1995: (2, 2, 0)}),
    (0.0, {1993: (3, 4, 1), 1994: (4, 4, 0), 1995: (2, 2, 0)}),
])
def test_fixture_panel_year_counts(small_panel_files, threshold, expected):
    """Test: 1993-1995 fixture gives the hand-enumerated (N, source_count, zeros) per year"""
    panel_file, _ = small_panel_files
    records = filter_equity(load_fund_records(panel_file), threshold)

    for year, (n, source, zeros) in expected.items():
        snapshot = year_end_snapshot(records, year)
        assert (len(snapshot), snapshot.source_count, snapshot.excluded_zero) == (n, source, zeros), \
            f"year {year} counts differ"


# ==================== Summary Statistics ====================

@pytest.mark.smoke
def test_summary_of_equal_sizes():
    stats = summary_stats(SizeSample.from_values([math.e, math.e]))

    assert stats.mean_log_size == 1.0
    assert stats.std_log_size == 0.0
    assert stats.n_funds == 2


@pytest.mark.smoke
def test_summary_units():
    """Test: mean in millions, standard deviation in billions"""
    single = summary_stats(SizeSample.from_values([1000.0]))
    pair = summary_stats(SizeSample.from_values([1000.0, 3000.0]))

    assert single.mean_size == 1000.0
    assert single.std_size == 0.0
    assert pair.mean_size == 2000.0
    assert pair.std_size == 1.0  # population convention: 1000 millions


@pytest.mark.numerics
def test_summary_mean_log_reproducible_from_sample():
    sample = SizeSample.from_values(np.random.default_rng(3).lognormal(4.0, 1.5, 777))

    stats = summary_stats(sample)

    assert stats.mean_log_size == float(np.mean(np.log(sample.values)))
    assert summary_stats(sample, LogBase.BASE10).mean_log_size == pytest.approx(
        stats.mean_log_size / math.log(10), rel=1e-12)


@pytest.mark.smoke
def test_summary_of_empty_sample():
    with pytest.raises(EmptySampleError):
        summary_stats(SizeSample(sizes=[]))


# ==================== Samples ====================

@pytest.mark.smoke
def test_size_sample_validation():
    assert SizeSample.from_values([3.0, 1.0, 2.0]).sizes == [1.0, 2.0, 3.0]
    with pytest.raises(ValidationError):
        SizeSample.from_values([1.0, -2.0])
    with pytest.raises(ValidationError):
        SizeSample.from_values([1.0, 0.0])


@pytest.mark.smoke
def test_sample_file_keeps_values_exactly(tmp_path, sample_100_file):
    original = read_sample(sample_100_file)

    path = write_sample(original, tmp_path / "copy.csv")

    assert len(original) == 100
    assert read_sample(path).sizes == original.sizes


@pytest.mark.smoke
def test_empty_sample_file_has_header(tmp_path):
    path = write_sample(SizeSample(sizes=[]), tmp_path / "empty.csv")

    assert path.read_text(encoding='utf-8') == "size_millions\n"
    assert len(read_sample(path)) == 0

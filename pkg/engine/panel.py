"""
Panel Preparation
Reads fund-month records and CPI tables, applies inflation and equity rules,
and forms dated cross-sections with their summary statistics
"""

import math
import re
from pathlib import Path
from typing import Dict, Iterable, List, Optional

import numpy as np
import pandas as pd
from pydantic import ValidationError

from base.config import AnalysisConfig
from base.errors import (
    DataError,
    DuplicateRecordError,
    EmptySampleError,
    EmptySnapshotError,
    MalformedRowError,
    MissingCpiMonthError,
    SchemaMismatchError,
)
from base.logger import Logger
from models.panel import CpiTable, FundRecord, SizeSample, SummaryStats, parse_month
from models.types import LogBase

# '.' decimal separator only; no thousands separators, no locale forms
_DECIMAL = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?$")
_PARSER_LINE = re.compile(r"line (\d+)")


def _cell(value) -> str:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return ''
    return str(value).strip()


def _parse_decimal(text: str, column: str, path: Path, line_number: int) -> float:
    if not _DECIMAL.match(text):
        raise MalformedRowError(str(path), line_number, f"{column} is not a decimal number: '{text}'")
    return float(text)


def format_number(value) -> str:
    """Text form of a cell: '' for None, shortest round-trip repr for floats"""
    if value is None:
        return ''
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, float):
        return repr(value)
    return str(value)


def read_delimited(path: Path, required_columns: List[str]) -> pd.DataFrame:
    """
    Read a comma-separated UTF-8 file as text cells and check its header

    Args:
        path: File to read
        required_columns: Columns that must be present

    Returns:
        DataFrame of strings indexed by 1-based file line number (header is
        line 1); blank lines are dropped after numbering

    Raises:
        DataError: File missing or unparsable
        SchemaMismatchError: Required columns absent
        MalformedRowError: A row has the wrong number of fields
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"File not found: {path}")
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, encoding='utf-8',
                            skip_blank_lines=False)
    except pd.errors.EmptyDataError:
        raise SchemaMismatchError(str(path), required_columns)
    except pd.errors.ParserError as e:
        match = _PARSER_LINE.search(str(e))
        if match:
            raise MalformedRowError(str(path), int(match.group(1)), "wrong number of fields") from e
        raise DataError(f"{path}: {e}") from e
    except UnicodeDecodeError as e:
        raise DataError(f"{path}: not valid UTF-8 ({e})") from e

    frame.columns = [str(c).strip() for c in frame.columns]
    missing = [c for c in required_columns if c not in frame.columns]
    if missing:
        raise SchemaMismatchError(str(path), missing)

    frame.index = pd.RangeIndex(2, 2 + len(frame))
    blank = (frame.fillna('').astype(str).map(str.strip) == '').all(axis=1)
    return frame[~blank]


def write_delimited(rows: List[Dict[str, object]], columns: List[str], path: Path) -> Path:
    """Write rows as comma-separated text with '\\n' line endings"""
    path = Path(path)
    frame = pd.DataFrame([[format_number(row.get(c)) for c in columns] for row in rows],
                         columns=columns, dtype=object)
    frame.to_csv(path, index=False, lineterminator='\n')
    return path


# ==================== Fund Records ====================

class FundRecordReader:
    """
    Read fund-month records from a comma-separated file

    Columns: fund_id, month (YYYY-MM), tasm_millions, nav, equity_fraction.
    Rows with a blank tasm_millions are dropped and counted.
    """

    def __init__(self, file_path):
        """
        Initialize reader

        Args:
            file_path: Path to the fund file (.csv or .txt)
        """
        self.file_path = Path(file_path)
        self.columns = AnalysisConfig.get('schemas', 'fund_columns')
        self.dropped_missing_tasm = 0

        if not self.file_path.exists():
            raise DataError(f"Fund file not found: {file_path}")
        if self.file_path.suffix not in ['.csv', '.txt']:
            raise DataError(f"Unsupported file format: {self.file_path.suffix}. Use .csv or .txt")

    def read_records(self) -> List[FundRecord]:
        """
        Parse every row

        Returns:
            List of FundRecord in file order

        Raises:
            SchemaMismatchError: Header lacks required columns
            MalformedRowError: A field fails to parse (carries the file line number)
        """
        Logger.info(f"Reading fund records from: {self.file_path}")
        frame = read_delimited(self.file_path, self.columns)

        records = []
        self.dropped_missing_tasm = 0
        for line_number, row in zip(frame.index, frame.to_dict('records')):
            record = self._parse_row(row, line_number)
            if record is None:
                self.dropped_missing_tasm += 1
                continue
            records.append(record)

        Logger.info(f"Loaded {len(records)} record(s); dropped {self.dropped_missing_tasm} "
                    f"with missing tasm")
        return records

    def _parse_row(self, row: Dict[str, object], line_number: int) -> Optional[FundRecord]:
        tasm_text = _cell(row.get('tasm_millions'))
        if tasm_text == '':
            Logger.debug(f"{self.file_path}:{line_number}: blank tasm, row dropped")
            return None

        nav_text = _cell(row.get('nav'))
        try:
            return FundRecord(
                fund_id=_cell(row.get('fund_id')),
                month=_cell(row.get('month')),
                tasm=_parse_decimal(tasm_text, 'tasm_millions', self.file_path, line_number),
                nav=(_parse_decimal(nav_text, 'nav', self.file_path, line_number)
                     if nav_text else None),
                equity_fraction=_parse_decimal(_cell(row.get('equity_fraction')), 'equity_fraction',
                                               self.file_path, line_number)
            )
        except ValidationError as e:
            reasons = "; ".join(f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}"
                                for err in e.errors())
            raise MalformedRowError(str(self.file_path), line_number, reasons) from e


def load_fund_records(path) -> List[FundRecord]:
    """
    Read a fund file

    Args:
        path: Comma-separated fund file

    Returns:
        List of FundRecord (rows with blank tasm dropped)
    """
    return FundRecordReader(path).read_records()


def write_fund_records(records: Iterable[FundRecord], path) -> Path:
    """Write records in the fund file schema"""
    rows = [{
        'fund_id': r.fund_id,
        'month': r.month,
        'tasm_millions': r.tasm,
        'nav': r.nav,
        'equity_fraction': r.equity_fraction
    } for r in records]
    return write_delimited(rows, AnalysisConfig.get('schemas', 'fund_columns'), path)


# ==================== CPI ====================

def load_cpi_table(path, base_month: Optional[str] = None) -> CpiTable:
    """
    Read a two-column CPI file (month, index)

    Args:
        path: Comma-separated CPI file
        base_month: Month sizes are expressed in (default from config)

    Returns:
        CpiTable

    Raises:
        DataError: Duplicate months, bad values, or base month absent
    """
    path = Path(path)
    base_month = AnalysisConfig.get('pipeline', 'base_month') if base_month is None else base_month
    frame = read_delimited(path, AnalysisConfig.get('schemas', 'cpi_columns'))

    index = {}
    for line_number, row in zip(frame.index, frame.to_dict('records')):
        try:
            month = parse_month(_cell(row.get('month')))
        except ValueError as e:
            raise MalformedRowError(str(path), line_number, str(e)) from e
        if month in index:
            raise MalformedRowError(str(path), line_number, f"duplicate month {month}")
        index[month] = _parse_decimal(_cell(row.get('index')), 'index', path, line_number)

    try:
        table = CpiTable(index=index, base_month=base_month)
    except ValidationError as e:
        raise DataError(f"{path}: {e.errors()[0]['msg']}") from e
    Logger.info(f"Loaded CPI table with {len(index)} month(s), base {base_month}")
    return table


def adjust_inflation(records: Iterable[FundRecord], cpi: CpiTable) -> List[FundRecord]:
    """
    Express tasm in base-month currency: tasm × cpi[base] / cpi[month]

    Args:
        records: Nominal records
        cpi: CPI table

    Returns:
        New records; fields other than tasm unchanged

    Raises:
        MissingCpiMonthError: A record month is absent from the table
    """
    adjusted = []
    for record in records:
        if record.month not in cpi.index:
            raise MissingCpiMonthError(record.month)
        adjusted.append(record.model_copy(update={'tasm': record.tasm * cpi.ratio(record.month)}))
    return adjusted


def filter_equity(records: Iterable[FundRecord], threshold: Optional[float] = None) -> List[FundRecord]:
    """
    Keep records whose equity fraction is at least the threshold

    Args:
        records: Records
        threshold: Minimum stock fraction (default 0.80); 0 keeps every fund

    Returns:
        Filtered list in input order
    """
    if threshold is None:
        threshold = AnalysisConfig.get('pipeline', 'equity_threshold')
    kept = [r for r in records if r.equity_fraction >= threshold]
    Logger.debug(f"filter_equity: kept {len(kept)} record(s) at threshold {threshold}")
    return kept


# ==================== Snapshots ====================

def month_snapshot(records: Iterable[FundRecord], month: str) -> SizeSample:
    """
    Cross-section of the records dated in one month

    Args:
        records: Records (any order)
        month: 'YYYY-MM'

    Returns:
        SizeSample of positive sizes; zero sizes are excluded and counted

    Raises:
        EmptySnapshotError: No record in that month
        DuplicateRecordError: A fund appears twice in the month
    """
    month = parse_month(month)
    picks = [r for r in records if r.month == month]
    if not picks:
        raise EmptySnapshotError(f"no records for {month}")

    seen = set()
    for record in picks:
        if record.fund_id in seen:
            raise DuplicateRecordError(f"fund {record.fund_id} has more than one record for {month}")
        seen.add(record.fund_id)

    sizes = sorted(r.tasm for r in picks if r.tasm > 0)
    excluded_zero = len(picks) - len(sizes)
    if excluded_zero:
        Logger.info(f"{month}: excluded {excluded_zero} zero-size record(s)")
    return SizeSample(as_of=month, sizes=sizes, source_count=len(picks), excluded_zero=excluded_zero)


def year_end_snapshot(records: Iterable[FundRecord], year: int) -> SizeSample:
    """
    Funds existing at the end of a year: each fund's December record

    Args:
        records: Records
        year: Calendar year

    Returns:
        SizeSample dated YYYY-12
    """
    return month_snapshot(records, f"{int(year):04d}-12")


def summary_stats(sample: SizeSample, log_base: LogBase = LogBase.NATURAL) -> SummaryStats:
    """
    Size moments with the population (1/N) variance convention

    Args:
        sample: Cross-section
        log_base: Base of ω = log(size); natural by default

    Returns:
        SummaryStats: N, E[s] (millions), Std[s] (billions), E[ω], Std[ω]

    Raises:
        EmptySampleError: Sample has no sizes
    """
    if len(sample) == 0:
        raise EmptySampleError(f"sample {sample.as_of or '(undated)'} has no sizes")
    values = sample.values
    omega = np.log(values) if log_base is LogBase.NATURAL else np.log10(values)
    return SummaryStats(
        n_funds=int(values.size),
        mean_size=float(np.mean(values)),
        std_size=float(np.std(values)) / 1e3,
        mean_log_size=float(np.mean(omega)),
        std_log_size=float(np.std(omega)),
        log_base=log_base
    )


# ==================== Sample Files ====================

def write_sample(sample: SizeSample, path) -> Path:
    """One-column sample file (size_millions) with a header even when empty"""
    column = AnalysisConfig.get('schemas', 'sample_columns')[0]
    return write_delimited([{column: s} for s in sample.sizes], [column], path)


def read_sample(path, as_of: Optional[str] = None) -> SizeSample:
    """
    Read a one-column sample file

    Args:
        path: File written by write_sample
        as_of: Date label to attach

    Returns:
        SizeSample
    """
    path = Path(path)
    column = AnalysisConfig.get('schemas', 'sample_columns')[0]
    frame = read_delimited(path, [column])
    sizes = [_parse_decimal(_cell(v), column, path, line) for line, v in zip(frame.index, frame[column].tolist())]
    try:
        return SizeSample(as_of=as_of, sizes=sizes)
    except ValidationError as e:
        raise DataError(f"{path}: {e.errors()[0]['msg']}") from e

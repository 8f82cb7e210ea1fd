"""
Report
Figure-ready series (CCDF, QQ) and the yearly parameter table, plus the
Reporter that writes them to disk
"""

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from scipy.stats import binomtest

from base.config import AnalysisConfig
from base.errors import DomainError, EmptySampleError, FundTailsError, InsufficientTailError
from base.logger import Logger
from base.stage_tracker import StageTracker
from engine.dist_core import TailModel, tail_ccdf, tail_quantile
from engine.gof import bootstrap_pvalue, log_likelihood_ratio
from engine.panel import (
    adjust_inflation,
    filter_equity,
    format_number,
    month_snapshot,
    read_delimited,
    summary_stats,
)
from engine.streams import derive_seed
from engine.tail_fit import SampleLike, fit_lognormal_tail, fit_pareto_given_smin, scan_smin, sorted_values, tail_values
from models.figures import FigureSeries
from models.fits import GofResult, LikelihoodRatioResult, LogNormalTailFit, ParetoTailFit
from models.panel import CpiTable, FundRecord, SizeSample, YearlySummaryRow, month_year
from models.run_config import RunConfig
from models.types import AxisTransform, PipelineStage, SnapshotMode

# Table columns averaged in cross-year summaries and monthly-average rows
NUMERIC_COLUMNS = ['N', 'E_s_millions', 'Std_s_billions', 'E_omega', 'Std_omega',
                   'zeta', 's_min', 'N_tail', 'p_value', 'R_log10']
COUNT_COLUMNS = {'N', 'N_tail'}


# ==================== Figure Series ====================

def ccdf_points(sample: SampleLike, label: str = "ccdf") -> FigureSeries:
    """
    Empirical P(S > s) at each distinct size, for double-logarithmic axes

    The point at s is the fraction of sizes strictly above s, so the largest
    size (value 0) is left out and the series ends at 1/n.

    Args:
        sample: Sizes
        label: Series label

    Returns:
        FigureSeries with log10 axes

    Raises:
        EmptySampleError: Sample has no sizes
    """
    values = sorted_values(sample)
    n = values.size
    if n == 0:
        raise EmptySampleError("ccdf_points: sample has no sizes")
    xs = np.unique(values)
    above = n - np.searchsorted(values, xs, side='right')
    keep = above > 0
    points = list(zip(xs[keep].tolist(), (above[keep] / n).tolist()))
    return FigureSeries(label=label, points=points, axis_transform=AxisTransform.LOG10)


def ccdf_reference_series(
    sample: SampleLike,
    exponent: Optional[float] = None,
    anchor: Optional[float] = None,
    label: str = "ccdf_reference"
) -> FigureSeries:
    """
    Algebraic reference line y = P(S > anchor) (s/anchor)^exponent

    Evaluated at the x values of ccdf_points so both series overlay directly.

    Args:
        sample: Sizes
        exponent: Slope on log-log axes (default -1)
        anchor: Size at which the line meets the empirical CCDF (default 10²)
        label: Series label

    Raises:
        DomainError: No size lies above the anchor
    """
    figures = AnalysisConfig.section('figures')
    exponent = figures['reference_exponent'] if exponent is None else exponent
    anchor = figures['reference_anchor'] if anchor is None else anchor
    values = sorted_values(sample)
    if values.size == 0:
        raise EmptySampleError("ccdf_reference_series: sample has no sizes")

    level = (values.size - np.searchsorted(values, anchor, side='right')) / values.size
    if level <= 0:
        raise DomainError(f"no size above the reference anchor {anchor}")
    xs = np.asarray(ccdf_points(values).xs)
    ys = level * (xs / anchor) ** exponent
    return FigureSeries(label=label, points=list(zip(xs.tolist(), ys.tolist())),
                        axis_transform=AxisTransform.LOG10)


def qq_points(
    sample: SampleLike,
    model: TailModel,
    s_min: Optional[float] = None,
    label: str = "qq"
) -> FigureSeries:
    """
    Log10 quantile-quantile series of the tail against a fitted model

    x_i is log10 of the i-th tail order statistic and y_i log10 of the model
    quantile at (i - 0.5)/n_tail. A matching model puts the points on y = x.

    Args:
        sample: Sizes
        model: ParetoTail or LogNormalTail
        s_min: Tail cutoff (defaults to the model's)
        label: Series label

    Returns:
        FigureSeries of already-logged values (linear transform)

    Raises:
        InsufficientTailError: Fewer than 2 tail points
    """
    s_min = model.s_min if s_min is None else s_min
    tail = tail_values(sample, s_min)
    m = tail.size
    if m < 2:
        raise InsufficientTailError(f"qq_points: {m} point(s) >= s_min={s_min}; need at least 2", n_tail=m)
    probabilities = (np.arange(1, m + 1, dtype=float) - 0.5) / m
    quantiles = np.asarray(tail_quantile(probabilities, model), dtype=float)
    points = list(zip(np.log10(tail).tolist(), np.log10(quantiles).tolist()))
    return FigureSeries(label=label, points=points, axis_transform=AxisTransform.LINEAR)


def qq_residual_slope(series: FigureSeries, top_fraction: Optional[float] = None) -> float:
    """
    Least-squares slope of y - x against x over the largest points of a QQ series

    A positive slope means model quantiles outgrow the data: the data bend
    down relative to the model.

    Args:
        series: Output of qq_points
        top_fraction: Share of points used (default 0.1, at least 2 points)

    Returns:
        float: Slope
    """
    top_fraction = AnalysisConfig.get('figures', 'qq_top_fraction') if top_fraction is None else top_fraction
    if len(series) < 2:
        raise InsufficientTailError("qq_residual_slope needs at least 2 points", n_tail=len(series))
    k = min(len(series), max(2, math.ceil(top_fraction * len(series))))
    x = np.asarray(series.xs[-k:])
    residual = np.asarray(series.ys[-k:]) - x
    if np.ptp(x) == 0:
        raise DomainError("qq_residual_slope: top points share one x value")
    return float(np.polyfit(x, residual, 1)[0])


def qq_sign_test(
    sample: SampleLike,
    model: TailModel,
    s_min: Optional[float] = None,
    top_fraction: Optional[float] = None
) -> float:
    """
    Two-sided sign test for a systematic QQ departure among the largest sizes

    With s_(0) = s_min, the spacings (m - j + 1)(ln ccdf(s_(j-1)) - ln ccdf(s_(j)))
    of the sorted tail are independent unit exponentials when the model is
    right, so over the top k the count above ln 2 is Binomial(k, 1/2). A tail
    that bends away from the model moves every spacing the same way.

    Args:
        sample: Sizes
        model: ParetoTail or LogNormalTail
        s_min: Tail cutoff (defaults to the model's)
        top_fraction: Share of tail points tested (default 0.1, at least 2 points)

    Returns:
        float: p-value; small values mean the residuals trend

    Raises:
        InsufficientTailError: Fewer than 2 tail points
    """
    s_min = model.s_min if s_min is None else s_min
    top_fraction = AnalysisConfig.get('figures', 'qq_top_fraction') if top_fraction is None else top_fraction
    tail = tail_values(sample, s_min)
    m = tail.size
    if m < 2:
        raise InsufficientTailError(f"qq_sign_test: {m} point(s) >= s_min={s_min}; need at least 2", n_tail=m)

    with np.errstate(divide='ignore', invalid='ignore'):
        log_ccdf = np.log(np.asarray(tail_ccdf(model)(tail), dtype=float))
        steps = -np.diff(np.concatenate(([0.0], log_ccdf)))
    spacings = np.arange(m, 0, -1, dtype=float) * steps
    k = min(m, max(2, math.ceil(top_fraction * m)))
    above = int(np.count_nonzero(spacings[-k:] > math.log(2.0)))
    return float(binomtest(above, k, 0.5).pvalue)


# ==================== Yearly Table ====================

@dataclass
class YearAnalysis:
    """Everything computed for one report year; row is always set"""
    year: int
    row: YearlySummaryRow
    sample: Optional[SizeSample] = None
    pareto: Optional[ParetoTailFit] = None
    lognormal: Optional[LogNormalTailFit] = None
    gof: Optional[GofResult] = None
    ratio: Optional[LikelihoodRatioResult] = None
    errors: List[str] = field(default_factory=list)


@dataclass
class _MonthResult:
    fields: Dict[str, Any] = field(default_factory=dict)
    sample: Optional[SizeSample] = None
    pareto: Optional[ParetoTailFit] = None
    lognormal: Optional[LogNormalTailFit] = None
    gof: Optional[GofResult] = None
    ratio: Optional[LikelihoodRatioResult] = None


def _analyze_month(
    records: List[FundRecord],
    cpi: CpiTable,
    month: str,
    seed: int,
    config: RunConfig,
    tracker: StageTracker,
    result: _MonthResult
) -> None:
    """Run every stage for one dated cross-section, filling result as stages complete"""
    tracker.start_stage(PipelineStage.SNAPSHOT)
    sample = month_snapshot(adjust_inflation(records, cpi), month)
    result.sample = sample
    tracker.pass_stage()

    tracker.start_stage(PipelineStage.SUMMARY)
    stats = summary_stats(sample, config.log_base)
    result.fields.update({
        'N': stats.n_funds,
        'E_s_millions': stats.mean_size,
        'Std_s_billions': stats.std_size,
        'E_omega': stats.mean_log_size,
        'Std_omega': stats.std_log_size
    })
    tracker.pass_stage()

    tracker.start_stage(PipelineStage.SCAN)
    if config.fixed_s_min is not None:
        pareto = fit_pareto_given_smin(sample, config.fixed_s_min)
    else:
        pareto = scan_smin(sample)
    result.pareto = pareto
    result.fields.update({'zeta': pareto.zeta_hat, 's_min': pareto.s_min, 'N_tail': pareto.n_tail})
    tracker.pass_stage(f"{month} s_min={pareto.s_min:.6g}, n_tail={pareto.n_tail}, zeta={pareto.zeta_hat:.4f}")

    tracker.start_stage(PipelineStage.LOGNORMAL_FIT)
    result.lognormal = fit_lognormal_tail(sample, pareto.s_min)
    tracker.pass_stage()

    tracker.start_stage(PipelineStage.BOOTSTRAP)
    result.gof = bootstrap_pvalue(sample, pareto, n_replicates=config.n_replicates, master_seed=seed,
                                  mode=config.replicate_mode, workers=config.worker_count)
    result.fields['p_value'] = result.gof.p_value
    tracker.pass_stage()

    tracker.start_stage(PipelineStage.LIKELIHOOD_RATIO)
    result.ratio = log_likelihood_ratio(sample, pareto, result.lognormal)
    result.fields['R_log10'] = result.ratio.r_base10
    tracker.pass_stage(f"{month} p={result.gof.p_value:.4f}, R_log10={result.ratio.r_base10:.3f}")


def _average_fields(months: List[_MonthResult]) -> Dict[str, Any]:
    averaged = {}
    for column in NUMERIC_COLUMNS:
        mean = float(np.mean([m.fields[column] for m in months]))
        averaged[column] = int(round(mean)) if column in COUNT_COLUMNS else mean
    return averaged


def analyze_years(
    panel: Sequence[FundRecord],
    cpi: CpiTable,
    years: Sequence[int],
    config: RunConfig
) -> List[YearAnalysis]:
    """
    Run the per-year pipeline and keep every intermediate result

    A year's seed is derive_seed(master_seed, year); in monthly-average mode
    each month uses derive_seed(master_seed, year, month). A failing year is
    flagged invalid and keeps the columns its completed stages produced.

    Args:
        panel: Nominal fund records
        cpi: CPI table
        years: Years to analyze (emitted in ascending order)
        config: Run configuration

    Returns:
        One YearAnalysis per distinct year
    """
    records = filter_equity(panel, config.threshold)
    by_month: Dict[str, List[FundRecord]] = {}
    for record in records:
        by_month.setdefault(record.month, []).append(record)

    analyses = []
    for year in sorted(set(int(y) for y in years)):
        tracker = StageTracker(f"year {year}")
        year_seed = derive_seed(config.master_seed, year)
        months = [f"{year:04d}-12"] if config.snapshot_mode is SnapshotMode.YEAR_END else \
            sorted(m for m in by_month if month_year(m) == year)
        Logger.info(f"year {year}: {config.snapshot_mode.value} over {len(months)} month(s)")

        results = []
        try:
            if not months:
                tracker.start_stage(PipelineStage.SNAPSHOT)
                raise EmptySampleError(f"no records in {year}")
            for month in months:
                result = _MonthResult()
                results.append(result)
                seed = year_seed if config.snapshot_mode is SnapshotMode.YEAR_END else \
                    derive_seed(config.master_seed, year, int(month[5:]))
                _analyze_month(by_month.get(month, []), cpi, month, seed, config, tracker, result)
        except (FundTailsError, ValueError) as e:
            message = e.describe() if isinstance(e, FundTailsError) else f"{type(e).__name__}: {e}"
            tracker.fail_stage(message)

        valid = tracker.all_stages_passed()
        if valid and config.snapshot_mode is SnapshotMode.MONTHLY_AVERAGE:
            fields = _average_fields(results)
        elif config.snapshot_mode is SnapshotMode.YEAR_END and results:
            fields = dict(results[0].fields)
        else:
            fields = {}

        row = YearlySummaryRow.model_validate({
            'year': year, **fields,
            'replicate_mode': config.replicate_mode,
            'seed': year_seed,
            'valid': valid
        })
        tracker.summarize_results()

        last = results[-1] if results else _MonthResult()
        analyses.append(YearAnalysis(
            year=year, row=row, sample=last.sample, pareto=last.pareto, lognormal=last.lognormal,
            gof=last.gof, ratio=last.ratio,
            errors=[tracker.error_message] if tracker.error_message else []
        ))
    return analyses


def yearly_table(
    panel: Sequence[FundRecord],
    cpi: CpiTable,
    years: Sequence[int],
    config: RunConfig
) -> List[YearlySummaryRow]:
    """
    Table of yearly parameters: snapshot, summary, cutoff scan, log-normal fit
    at the shared cutoff, bootstrap p-value and likelihood ratio

    Returns:
        Rows ordered by year; failed years are flagged invalid
    """
    return [analysis.row for analysis in analyze_years(panel, cpi, years, config)]


def cross_year_summary(rows: Sequence[YearlySummaryRow]) -> Dict[str, Dict[str, float]]:
    """
    Mean and population standard deviation of each numeric column over valid rows

    Returns:
        {column: {'mean': ..., 'std': ...}}; empty when no row is valid
    """
    valid = [row.model_dump(by_alias=True) for row in rows if row.valid]
    summary = {}
    for column in NUMERIC_COLUMNS:
        values = [r[column] for r in valid if r[column] is not None]
        if values:
            summary[column] = {'mean': float(np.mean(values)), 'std': float(np.std(values))}
    return summary


# ==================== Output Files ====================

def read_table(path) -> List[YearlySummaryRow]:
    """
    Parse a table written by Reporter.write_table

    Args:
        path: Table file

    Returns:
        Rows equal to the ones written
    """
    columns = AnalysisConfig.get('schemas', 'table_columns')
    frame = read_delimited(Path(path), columns)
    rows = []
    for raw in frame.to_dict('records'):
        cells = {c: (raw[c] if raw[c] != '' else None) for c in columns}
        rows.append(YearlySummaryRow.model_validate(cells))
    return rows


class Reporter:
    """
    Write run outputs and remember every file written

    Documents carry no timestamps, so identical runs produce identical bytes.
    """

    TABLE_FILE = "yearly_table.csv"
    TEXT_FILE = "yearly_table.txt"

    # (label, column, format) in the order of the text table
    TEXT_ROWS = [
        ("N", 'N', "{:.0f}"),
        ("E[s] (millions)", 'E_s_millions', "{:.0f}"),
        ("Std[s] (billions)", 'Std_s_billions', "{:.2f}"),
        ("E[omega]", 'E_omega', "{:.2f}"),
        ("Std[omega]", 'Std_omega', "{:.2f}"),
        ("zeta", 'zeta', "{:.2f}"),
        ("s_min", 's_min', "{:.0f}"),
        ("N_tail", 'N_tail', "{:.0f}"),
        ("p-value", 'p_value', "{:.2f}"),
        ("R (log10)", 'R_log10', "{:.1f}"),
    ]

    def __init__(self, output_dir, config: Optional[RunConfig] = None):
        """
        Initialize reporter

        Args:
            output_dir: Directory for outputs (created if missing)
            config: Run configuration echoed into documents
        """
        self.output_dir = Path(output_dir)
        self.output_dir.mkdir(parents=True, exist_ok=True)
        self.config = config
        self.written: List[Path] = []

    def track(self, path: Path) -> Path:
        self.written.append(Path(path))
        return Path(path)

    def path(self, name: str) -> Path:
        return self.output_dir / name

    def _write_text(self, name: str, text: str) -> Path:
        target = self.path(name)
        with open(target, 'w', encoding='utf-8', newline='\n') as f:
            f.write(text)
        Logger.info(f"Wrote {target}")
        return self.track(target)

    def write_document(self, name: str, payload: Dict[str, Any]) -> Path:
        """
        Write a JSON document with the schema version and the config echo

        Args:
            name: File name
            payload: JSON-serializable content

        Returns:
            Path written
        """
        document = {'schema_version': AnalysisConfig.get('schemas', 'version'), **payload}
        if self.config is not None:
            document['config'] = self.config.echo()
        return self._write_text(name, json.dumps(document, indent=2, sort_keys=True) + "\n")

    def write_table(self, rows: Sequence[YearlySummaryRow], name: Optional[str] = None) -> Path:
        """Comma-separated yearly table; floats in shortest round-trip form"""
        columns = AnalysisConfig.get('schemas', 'table_columns')
        lines = [",".join(columns)]
        for row in rows:
            dumped = row.model_dump(by_alias=True, mode='json')
            lines.append(",".join(format_number(dumped[c]) for c in columns))
        return self._write_text(name or self.TABLE_FILE, "\n".join(lines) + "\n")

    def write_text_table(
        self,
        rows: Sequence[YearlySummaryRow],
        summary: Dict[str, Dict[str, float]],
        name: Optional[str] = None
    ) -> Path:
        """
        Human-readable table: variables as rows, years as columns, then mean and std

        Invalid years show '-' in every cell.
        """
        def cell(value, fmt):
            return "-" if value is None else fmt.format(value)

        header = ["variable"] + [str(r.year) for r in rows] + ["mean", "std"]
        body = []
        for label, column, fmt in self.TEXT_ROWS:
            line = [label]
            for row in rows:
                value = row.model_dump(by_alias=True)[column] if row.valid else None
                line.append(cell(value, fmt))
            stats = summary.get(column, {})
            line.extend([cell(stats.get('mean'), fmt), cell(stats.get('std'), fmt)])
            body.append(line)

        widths = [max(len(r[i]) for r in [header] + body) for i in range(len(header))]
        lines = ["=" * (sum(widths) + 2 * (len(widths) - 1))]
        lines.append("  ".join(h.rjust(w) if i else h.ljust(w) for i, (h, w) in enumerate(zip(header, widths))))
        lines.append("-" * len(lines[0]))
        for line in body:
            lines.append("  ".join(c.rjust(w) if i else c.ljust(w) for i, (c, w) in enumerate(zip(line, widths))))
        lines.append("=" * len(lines[0]))
        return self._write_text(name or self.TEXT_FILE, "\n".join(lines) + "\n")

    def write_series(self, series: FigureSeries, name: str) -> Path:
        """Header line with label and transform, then x<TAB>y rows"""
        lines = [f"# {series.label}\taxis_transform={series.axis_transform.value}"]
        lines.extend(f"{repr(float(x))}\t{repr(float(y))}" for x, y in series.points)
        return self._write_text(name, "\n".join(lines) + "\n")

    def write_year_series(self, analysis: YearAnalysis) -> List[Path]:
        """
        CCDF, reference line and both QQ series for one valid year

        Series that cannot be formed (e.g. no size above the reference
        anchor) are skipped with a warning.
        """
        written = []
        if analysis.sample is None or analysis.pareto is None:
            return written
        year = analysis.year
        builders = [
            (f"ccdf_{year}.tsv", lambda: ccdf_points(analysis.sample, label=f"ccdf {year}")),
            (f"ccdf_reference_{year}.tsv",
             lambda: ccdf_reference_series(analysis.sample, label=f"ccdf reference {year}")),
            (f"qq_pareto_{year}.tsv",
             lambda: qq_points(analysis.sample, analysis.pareto.model(), label=f"qq pareto {year}")),
        ]
        if analysis.lognormal is not None:
            builders.append((f"qq_lognormal_{year}.tsv",
                             lambda: qq_points(analysis.sample, analysis.lognormal.model(),
                                               label=f"qq lognormal {year}")))
        for name, build in builders:
            try:
                written.append(self.write_series(build(), name))
            except FundTailsError as e:
                Logger.warning(f"year {year}: {name} skipped ({e.describe()})")
        return written

    def discard(self) -> None:
        """Remove every file this reporter wrote"""
        for path in self.written:
            try:
                path.unlink()
                Logger.debug(f"Removed partial output {path}")
            except FileNotFoundError:
                pass
        self.written = []

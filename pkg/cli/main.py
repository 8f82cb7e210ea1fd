"""
Command Line
Single entry point for the pipeline: ingest, fit, gof, compare, synth, report

Exit codes: 0 ok, 1 configuration, 2 data, 3 numerical. Errors are printed
to stderr as 'ERROR <CODE>: <message>' and files written by the failed run
are removed.
"""

import argparse
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional

from pydantic import ValidationError

from base.config import AnalysisConfig
from base.errors import ConfigError, DataError, FundTailsError
from base.logger import Logger
from engine.dist_core import sample as draw_sample
from engine.gof import bootstrap_pvalue, log_likelihood_ratio
from engine.panel import (
    FundRecordReader,
    adjust_inflation,
    filter_equity,
    load_cpi_table,
    load_fund_records,
    month_snapshot,
    read_sample,
    write_fund_records,
    write_sample,
)
from engine.report import Reporter, analyze_years, cross_year_summary
from engine.streams import substream
from engine.tail_fit import fit_lognormal_tail, fit_pareto_given_smin, scan_smin
from models.distributions import LogNormalTail, ParetoTail
from models.panel import SizeSample
from models.run_config import RunConfig
from models.types import ExitCode, LogBase, ReplicateMode, SnapshotMode, Subcommand, TailModelKind


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that reports usage errors as ConfigError instead of exiting with 2"""

    def error(self, message):
        raise ConfigError(f"{self.prog}: {message}")


def _common_flags() -> argparse.ArgumentParser:
    pipeline = AnalysisConfig.section('pipeline')
    common = _Parser(add_help=False)
    common.add_argument('--input', dest='input_path', type=Path, default=None,
                        help='Fund file (ingest, report) or one-column sample file (fit, gof, compare)')
    common.add_argument('--cpi', dest='cpi_path', type=Path, default=None,
                        help='CPI file (month,index); required by report')
    common.add_argument('--threshold', type=float, default=pipeline['equity_threshold'],
                        help='Minimum equity fraction kept; 0 keeps every fund')
    common.add_argument('--base-month', default=pipeline['base_month'],
                        help='Month (YYYY-MM) sizes are expressed in')
    common.add_argument('--n-replicates', type=int, default=pipeline['n_replicates'],
                        help='Synthetic data sets per goodness-of-fit test')
    common.add_argument('--seed', dest='master_seed', type=int, default=pipeline['master_seed'],
                        help='Master seed of all random substreams')
    common.add_argument('--replicate-mode', choices=[m.value for m in ReplicateMode],
                        default=pipeline['replicate_mode'], help='Bootstrap replicate construction')
    common.add_argument('--snapshot-mode', choices=[m.value for m in SnapshotMode],
                        default=pipeline['snapshot_mode'], help='Yearly cross-section rule')
    common.add_argument('--workers', dest='worker_count', type=int, default=AnalysisConfig.default_workers(),
                        help=f'Bootstrap worker processes (env {AnalysisConfig.WORKERS_ENV})')
    common.add_argument('--out', dest='output_dir', type=Path, default=Path('results'),
                        help='Output directory')
    common.add_argument('--log-base', choices=[b.value for b in LogBase], default=pipeline['log_base'],
                        help='Base of omega = log(size) in summaries')
    common.add_argument('--years', type=int, nargs='+', default=None,
                        help='Years to process (default: every year in the panel)')
    common.add_argument('--smin', type=float, default=None,
                        help='Fixed cutoff instead of the KS scan; for synth, the model cutoff')
    common.add_argument('--log-path', default=AnalysisConfig.default_log_dir(),
                        help=f'Directory for a run log file (env {AnalysisConfig.LOG_DIR_ENV})')
    common.add_argument('--console-log-level', default=Logger.DEFAULT_CONSOLE_LEVEL,
                        choices=list(Logger.LOG_LEVELS), help='Console log level')
    return common


def build_parser() -> argparse.ArgumentParser:
    """
    Build the argument parser

    Returns:
        Parser with one subparser per subcommand, each listing every flag and its default
    """
    common = _common_flags()
    parser = _Parser(prog='fundtails', description='Power-law and log-normal tail analysis of fund sizes')
    subparsers = parser.add_subparsers(dest='subcommand', required=True, parser_class=_Parser)
    helps = {
        Subcommand.INGEST: 'Validate and normalize a fund file; write yearly sample files with --years',
        Subcommand.FIT: 'Fit the power law (KS cutoff scan) and the truncated log-normal to a sample',
        Subcommand.GOF: 'Monte Carlo goodness-of-fit p-value of the power law',
        Subcommand.COMPARE: 'Log-likelihood ratio of power law vs truncated log-normal',
        Subcommand.SYNTH: 'Write a synthetic sample from either tail model',
        Subcommand.REPORT: 'Yearly table, figure series and run document from a fund panel',
    }
    for subcommand, text in helps.items():
        sub = subparsers.add_parser(subcommand.value, parents=[common], help=text, description=text,
                                    formatter_class=argparse.ArgumentDefaultsHelpFormatter)
        if subcommand is Subcommand.SYNTH:
            sub.add_argument('model', choices=[k.value for k in TailModelKind], help='Tail model')
            sub.add_argument('--zeta', type=float, default=None, help='Power-law exponent')
            sub.add_argument('--mu', type=float, default=None, help='Log-normal location')
            sub.add_argument('--sigma', type=float, default=None, help='Log-normal scale')
            sub.add_argument('-n', '--n-points', type=int, default=0, help='Number of sizes')
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """
    Validate parsed flags into a RunConfig

    Raises:
        ConfigError: A flag value is invalid for the subcommand
    """
    subcommand = Subcommand(args.subcommand)
    values = {
        'subcommand': subcommand,
        'input_path': args.input_path,
        'cpi_path': args.cpi_path,
        'output_dir': args.output_dir,
        'threshold': args.threshold,
        'base_month': args.base_month,
        'n_replicates': args.n_replicates,
        'master_seed': args.master_seed,
        'replicate_mode': args.replicate_mode,
        'snapshot_mode': args.snapshot_mode,
        'log_base': args.log_base,
        'worker_count': args.worker_count,
        'years': args.years or [],
    }
    if subcommand is Subcommand.SYNTH:
        values.update({
            'synth_model': args.model,
            'zeta': args.zeta,
            's_min': args.smin if args.smin is not None else 0.0,
            'mu': args.mu,
            'sigma': args.sigma,
            'n_points': args.n_points
        })
    else:
        values['fixed_s_min'] = args.smin
    try:
        return RunConfig(**values)
    except ValidationError as e:
        reasons = "; ".join(f"{'.'.join(str(p) for p in err['loc']) or 'config'}: {err['msg']}"
                            for err in e.errors())
        raise ConfigError(reasons) from e


# ==================== Subcommands ====================

def _pareto_fit(sample: SizeSample, config: RunConfig):
    if config.fixed_s_min is not None:
        return fit_pareto_given_smin(sample, config.fixed_s_min)
    return scan_smin(sample)


def run_ingest(config: RunConfig, reporter: Reporter) -> None:
    reader = FundRecordReader(config.input_path)
    records = reader.read_records()
    reporter.track(write_fund_records(records, reporter.path('funds.csv')))

    payload = {
        'records': len(records),
        'dropped_missing_tasm': reader.dropped_missing_tasm,
        'funds': len({r.fund_id for r in records}),
        'months': sorted({r.month for r in records}),
        'samples': {}
    }
    if config.years:
        kept = filter_equity(records, config.threshold)
        if config.cpi_path is not None:
            kept = adjust_inflation(kept, load_cpi_table(config.cpi_path, config.base_month))
        for year in sorted(set(config.years)):
            sample = month_snapshot(kept, f"{year:04d}-12")
            reporter.track(write_sample(sample, reporter.path(f"sample_{year}.csv")))
            payload['samples'][str(year)] = {
                'n': len(sample), 'source_count': sample.source_count, 'excluded_zero': sample.excluded_zero
            }
    reporter.write_document('ingest.json', payload)


def run_fit(config: RunConfig, reporter: Reporter) -> None:
    sample = read_sample(config.input_path)
    pareto = _pareto_fit(sample, config)
    lognormal = fit_lognormal_tail(sample, pareto.s_min)
    reporter.write_document('fit.json', {
        'n': len(sample),
        'pareto': pareto.model_dump(mode='json'),
        'lognormal': lognormal.model_dump(mode='json')
    })


def run_gof(config: RunConfig, reporter: Reporter) -> None:
    sample = read_sample(config.input_path)
    pareto = _pareto_fit(sample, config)
    result = bootstrap_pvalue(sample, pareto, n_replicates=config.n_replicates,
                              master_seed=config.master_seed, mode=config.replicate_mode,
                              workers=config.worker_count)
    reporter.write_document('gof.json', {
        'n': len(sample),
        'pareto': pareto.model_dump(mode='json'),
        'gof': result.model_dump(mode='json')
    })


def run_compare(config: RunConfig, reporter: Reporter) -> None:
    sample = read_sample(config.input_path)
    pareto = _pareto_fit(sample, config)
    lognormal = fit_lognormal_tail(sample, pareto.s_min)
    ratio = log_likelihood_ratio(sample, pareto, lognormal)
    reporter.write_document('compare.json', {
        'n': len(sample),
        'pareto': pareto.model_dump(mode='json'),
        'lognormal': lognormal.model_dump(mode='json'),
        'likelihood_ratio': ratio.model_dump(mode='json'),
        'favors_lognormal': ratio.favors_lognormal
    })


def run_synth(config: RunConfig, reporter: Reporter) -> None:
    if config.synth_model is TailModelKind.PARETO:
        model = ParetoTail(zeta=config.zeta, s_min=config.s_min)
    else:
        model = LogNormalTail(mu=config.mu, sigma=config.sigma, s_min=config.s_min)
    values = draw_sample(model, config.n_points, substream(config.master_seed))
    sample = SizeSample.from_values(values)
    name = f"sample_{config.synth_model.value}.csv"
    reporter.track(write_sample(sample, reporter.path(name)))
    reporter.write_document('synth.json', {'model': model.model_dump(mode='json'), 'n': len(sample),
                                           'sample_file': name})


def run_report(config: RunConfig, reporter: Reporter) -> None:
    records = load_fund_records(config.input_path)
    cpi = load_cpi_table(config.cpi_path, config.base_month)
    years = config.years or sorted({r.year for r in records})
    if not years:
        raise DataError(f"{config.input_path}: no records to report on")

    analyses = analyze_years(records, cpi, years, config)
    rows = [a.row for a in analyses]
    summary = cross_year_summary(rows)

    reporter.write_table(rows)
    reporter.write_text_table(rows, summary)
    series_files = []
    for analysis in analyses:
        if analysis.row.valid:
            series_files.extend(p.name for p in reporter.write_year_series(analysis))

    reporter.write_document('report.json', {
        'rows': [row.model_dump(mode='json', by_alias=True) for row in rows],
        'summary': summary,
        'errors': {str(a.year): a.errors for a in analyses if a.errors},
        'gof': {str(a.year): a.gof.model_dump(mode='json') for a in analyses if a.gof is not None},
        'lognormal': {str(a.year): a.lognormal.model_dump(mode='json')
                      for a in analyses if a.lognormal is not None},
        'series_files': series_files
    })
    invalid = [a.year for a in analyses if not a.row.valid]
    if invalid:
        Logger.warning(f"report: {len(invalid)} year(s) flagged invalid: {invalid}")


RUNNERS: Dict[Subcommand, Callable[[RunConfig, Reporter], None]] = {
    Subcommand.INGEST: run_ingest,
    Subcommand.FIT: run_fit,
    Subcommand.GOF: run_gof,
    Subcommand.COMPARE: run_compare,
    Subcommand.SYNTH: run_synth,
    Subcommand.REPORT: run_report,
}


def run_pipeline(config: RunConfig) -> int:
    """
    Run one subcommand; on failure remove what it wrote

    Returns:
        Exit code
    """
    reporter = Reporter(config.output_dir, config)
    try:
        RUNNERS[config.subcommand](config, reporter)
    except BaseException:
        reporter.discard()
        raise
    return ExitCode.OK


def main(argv: Optional[List[str]] = None) -> int:
    Logger.init_error_collection()
    try:
        args = build_parser().parse_args(argv)
        Logger.configure(args.log_path, console_level=args.console_log_level)
        config = resolve_config(args)
        Logger.debug(f"config: {config.echo()}")
        code = run_pipeline(config)
    except FundTailsError as e:
        print(f"ERROR {e.describe()}", file=sys.stderr)
        return e.exit_code

    if Logger.has_errors():
        print(Logger.get_error_summary(), file=sys.stderr)
    return int(code)

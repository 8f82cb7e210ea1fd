"""
Internal Types
Enums for framework-wide choices
"""

from enum import Enum, IntEnum


# ==================== Pipeline Choices ====================

class ReplicateMode(Enum):
    """How bootstrap replicates are synthesized"""
    SEMIPARAMETRIC = "semiparametric"  # empirical body + power-law tail
    TAIL_ONLY = "tail_only"            # n_tail pure power-law draws


class SnapshotMode(Enum):
    """How a year's cross-section is formed"""
    YEAR_END = "year_end"
    MONTHLY_AVERAGE = "monthly_average"


class LogBase(Enum):
    """Logarithm base for the ω = log(size) summary columns"""
    NATURAL = "e"
    BASE10 = "10"


class AxisTransform(Enum):
    """Axis scaling a figure series is meant to be drawn with"""
    LINEAR = "linear"
    LOG10 = "log10"


class TailModelKind(Enum):
    """Competing tail models"""
    PARETO = "pareto"
    LOGNORMAL = "lognormal"


class Subcommand(Enum):
    """CLI subcommands"""
    INGEST = "ingest"
    FIT = "fit"
    GOF = "gof"
    COMPARE = "compare"
    SYNTH = "synth"
    REPORT = "report"


class PipelineStage(Enum):
    """Stages of the per-year analysis"""
    SNAPSHOT = "snapshot"
    SUMMARY = "summary_stats"
    SCAN = "scan_smin"
    LOGNORMAL_FIT = "fit_lognormal_tail"
    BOOTSTRAP = "bootstrap_pvalue"
    LIKELIHOOD_RATIO = "log_likelihood_ratio"


class ExitCode(IntEnum):
    """Process exit codes of the CLI"""
    OK = 0
    CONFIG = 1
    DATA = 2
    NUMERICAL = 3

"""
Run Configuration Model
Validated settings of one CLI invocation
"""

from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from base.config import AnalysisConfig
from models.panel import parse_month
from models.types import LogBase, ReplicateMode, SnapshotMode, Subcommand, TailModelKind


def _pipeline_default(key: str):
    return lambda: AnalysisConfig.get('pipeline', key)


class RunConfig(BaseModel):
    """
    Resolved settings for one run

    Defaults come from config/defaults.json; worker_count additionally honors
    FUNDTAILS_WORKERS.
    """
    model_config = ConfigDict(frozen=True)

    subcommand: Subcommand
    input_path: Optional[Path] = None
    cpi_path: Optional[Path] = None
    output_dir: Path = Path("results")

    threshold: float = Field(default_factory=_pipeline_default('equity_threshold'), ge=0, le=1)
    base_month: str = Field(default_factory=_pipeline_default('base_month'))
    n_replicates: int = Field(default_factory=_pipeline_default('n_replicates'), ge=1)
    master_seed: int = Field(default_factory=_pipeline_default('master_seed'), ge=0, lt=2 ** 64)
    replicate_mode: ReplicateMode = Field(
        default_factory=lambda: ReplicateMode(AnalysisConfig.get('pipeline', 'replicate_mode'))
    )
    snapshot_mode: SnapshotMode = Field(
        default_factory=lambda: SnapshotMode(AnalysisConfig.get('pipeline', 'snapshot_mode'))
    )
    log_base: LogBase = Field(
        default_factory=lambda: LogBase(AnalysisConfig.get('pipeline', 'log_base'))
    )
    worker_count: int = Field(default_factory=AnalysisConfig.default_workers, ge=1)

    years: List[int] = Field(default_factory=list)
    fixed_s_min: Optional[float] = Field(default=None, gt=0)

    # synth
    synth_model: Optional[TailModelKind] = None
    zeta: Optional[float] = Field(default=None, gt=0)
    s_min: Optional[float] = Field(default=None, ge=0)
    mu: Optional[float] = None
    sigma: Optional[float] = Field(default=None, gt=0)
    n_points: int = Field(default=0, ge=0)

    @field_validator('base_month')
    @classmethod
    def _check_base_month(cls, value: str) -> str:
        return parse_month(value)

    @model_validator(mode='after')
    def _check_subcommand_inputs(self):
        needs_input = {Subcommand.INGEST, Subcommand.FIT, Subcommand.GOF,
                       Subcommand.COMPARE, Subcommand.REPORT}
        if self.subcommand in needs_input and self.input_path is None:
            raise ValueError(f"'{self.subcommand.value}' requires --input")
        if self.subcommand is Subcommand.REPORT and self.cpi_path is None:
            raise ValueError("'report' requires --cpi")
        if self.subcommand is Subcommand.SYNTH:
            if self.synth_model is TailModelKind.PARETO:
                if self.zeta is None or not self.s_min:
                    raise ValueError("synth pareto requires --zeta and a positive --smin")
            elif self.synth_model is TailModelKind.LOGNORMAL:
                if self.mu is None or self.sigma is None:
                    raise ValueError("synth lognormal requires --mu and --sigma")
            else:
                raise ValueError("synth requires a model: pareto or lognormal")
        return self

    def echo(self) -> Dict[str, Any]:
        """
        Settings written into every output document

        Worker count and output directory are left out so outputs are
        identical whatever the parallelism or destination.
        """
        payload = self.model_dump(mode='json', exclude={'worker_count', 'output_dir'})
        for key in ('input_path', 'cpi_path'):
            if payload.get(key):
                payload[key] = Path(payload[key]).name
        return payload

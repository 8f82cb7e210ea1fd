from typing import List, Optional, Tuple

from base.logger import Logger
from models.types import PipelineStage


class StageTracker:
    """
    Record the pipeline stages of one work item (a report year) and their outcomes

    A stage is None while running, True when passed, False when failed.
    """

    def __init__(self, label: str):
        self.label = label
        self.stages: List[Tuple[int, PipelineStage, Optional[bool]]] = []  # (number, stage, result)
        self.current_stage = 0
        self.error_message: Optional[str] = None

    def start_stage(self, stage: PipelineStage) -> int:
        """
        Start a new stage and log it.

        Args:
            stage: Stage being entered

        Returns:
            Current stage number
        """
        self.current_stage += 1
        Logger.debug(f"{self.label} stage {self.current_stage}: {stage.value}")
        self.stages.append((self.current_stage, stage, None))
        return self.current_stage

    def pass_stage(self, message: Optional[str] = None) -> None:
        """
        Mark the current stage as passed.

        Args:
            message: Optional milestone message to log
        """
        if message:
            Logger.info(f"{self.label}: {message}")
        number, stage, _ = self.stages[-1]
        self.stages[-1] = (number, stage, True)

    def fail_stage(self, error_message: str) -> None:
        """
        Mark the current stage as failed; the message is collected by the Logger.

        Args:
            error_message: Error message to log
        """
        number, stage, _ = self.stages[-1]
        self.error_message = error_message
        Logger.error(f"{self.label}: {stage.value} failed - {error_message}")
        self.stages[-1] = (number, stage, False)

    def get_failed_stages(self) -> List[PipelineStage]:
        return [stage for _, stage, result in self.stages if result is False]

    def completed(self, stage: PipelineStage) -> bool:
        return any(s is stage and result is True for _, s, result in self.stages)

    def all_stages_passed(self) -> bool:
        """
        Check whether every started stage passed.

        Returns:
            True if no stage failed or is left running
        """
        return all(result is True for _, _, result in self.stages)

    def summarize_results(self) -> None:
        failed = self.get_failed_stages()
        if failed:
            Logger.warning(f"{self.label}: flagged invalid after {', '.join(s.value for s in failed)}")
        else:
            Logger.info(f"{self.label}: all {len(self.stages)} stages passed")

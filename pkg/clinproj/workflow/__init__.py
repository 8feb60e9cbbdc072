"""Run orchestration."""

from .runner import PipelineRunner

__all__ = ["PipelineRunner"]

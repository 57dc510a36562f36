"""Exception types shared across the service."""

from __future__ import annotations


class ModelServiceError(Exception):
    """Base class for every error this package raises on purpose."""


class DatasetError(ModelServiceError):
    """A dataset file is missing, unreadable, or violates SQuAD v2.0 shape."""


class ManifestError(ModelServiceError):
    """A training manifest is missing, unreadable, or fails validation."""


class CheckpointError(ModelServiceError):
    """A checkpoint is missing, incomplete, or would be overwritten."""


class StageError(ModelServiceError):
    """One stage of a training plan failed; the plan halts here.

    Carries the failing stage index and the outcomes of the stages that
    completed before it, so callers can report exactly how far the plan got.
    """

    def __init__(self, stage_index: int, message: str, completed=()):
        super().__init__(f"stage {stage_index} failed: {message}")
        self.stage_index = stage_index
        self.message = message
        self.completed = list(completed)

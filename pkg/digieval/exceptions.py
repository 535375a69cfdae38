from __future__ import annotations

from typing import TYPE_CHECKING, Literal

if TYPE_CHECKING:
    from .base import Counts


class DigiEvalError(Exception):
    """Base class for every error raised by digieval."""


class GeometryError(DigiEvalError):
    """Raised when a ring or polygon violates its construction invariants."""

    feature_id: str | None

    def __init__(self, message: str, *, feature_id: str | None = None) -> None:
        if feature_id is not None:
            message = f"feature '{feature_id}': {message}"
        super().__init__(message)
        self.feature_id = feature_id


class ParseError(DigiEvalError):
    """Raised when an input document cannot be parsed."""

    line: int | None
    column: int | None

    def __init__(
        self, message: str, *, line: int | None = None, column: int | None = None
    ) -> None:
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column


class UsageError(DigiEvalError):
    """Raised when an API is called with inputs of the wrong kind."""


class CountsError(DigiEvalError):
    """Raised when tally inputs are inconsistent."""


class ConfigError(DigiEvalError):
    """Raised when a run configuration fails validation."""


class UndefinedMetricError(DigiEvalError):
    """Raised when a metric has a zero denominator."""

    metric: Literal["precision", "recall", "f1"]
    counts: Counts

    def __init__(self, metric: str, *, counts: Counts) -> None:
        super().__init__(
            f"{metric} is undefined for tp={counts.tp}, fp={counts.fp}, fn={counts.fn_}"
        )
        self.metric = metric  # type: ignore[assignment]
        self.counts = counts


class SegmenterError(DigiEvalError):
    """Raised when the segmenter fails on a tile."""

    tile_id: str

    def __init__(self, message: str, *, tile_id: str) -> None:
        super().__init__(f"tile {tile_id}: {message}")
        self.tile_id = tile_id

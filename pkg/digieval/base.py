from __future__ import annotations

import os
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Iterator

import numpy as np
from dotenv import load_dotenv

from .exceptions import ConfigError, CountsError, UsageError
from .geometry import EPS_AREA, Coordinate, Polygon, Rect, iou, overlaps

# use the .env that is inside the current folder
# the OS environment variables take precedence over the .env file
load_dotenv(dotenv_path=".env", override=False)


class FeatureSource(str, Enum):
    """Which side of the comparison a feature belongs to"""

    PREDICTION = "prediction"
    GROUND_TRUTH = "ground_truth"


@dataclass(frozen=True)
class Feature:
    id: str
    """Stable identifier, unique within its FeatureSet."""

    geometry: Polygon
    source: FeatureSource
    tags: dict[str, str] = field(default_factory=dict, hash=False)
    """Free-form string tags, e.g. OSM `building=yes`."""


@dataclass(frozen=True)
class FeatureSet:
    features: tuple[Feature, ...]
    source: FeatureSource
    crs_note: str = "planar-meters"
    """Provenance of the planar frame the coordinates live in."""

    skipped: int = 0
    """Input records dropped during parsing (non-polygonal, dangling refs, ...)."""

    extent: Rect | None = None
    """Analysis extent declared alongside the features, if any."""

    def __post_init__(self):
        object.__setattr__(self, "features", tuple(self.features))
        seen: set[str] = set()
        for feature in self.features:
            if feature.source != self.source:
                raise UsageError(
                    f"feature '{feature.id}' has source {feature.source.value}, "
                    f"expected {self.source.value}"
                )
            if feature.id in seen:
                raise UsageError(f"duplicate feature id '{feature.id}'")
            seen.add(feature.id)

    def __len__(self) -> int:
        return len(self.features)

    def __iter__(self) -> Iterator[Feature]:
        return iter(self.features)

    def ids(self) -> list[str]:
        return [f.id for f in self.features]

    def with_features(self, features: tuple[Feature, ...] | list[Feature]) -> FeatureSet:
        """Copy with the same source metadata and a different feature list."""
        return FeatureSet(
            features=tuple(features),
            source=self.source,
            crs_note=self.crs_note,
            skipped=self.skipped,
            extent=self.extent,
        )


class CriterionKind(str, Enum):
    ANY_OVERLAP = "any_overlap"
    IOU_THRESHOLD = "iou_threshold"


@dataclass(frozen=True)
class MatchCriterion:
    """Decides whether a prediction and a ground-truth building match."""

    kind: CriterionKind = CriterionKind.ANY_OVERLAP
    """
    - "any_overlap": any intersection area above `eps_area`.
    - "iou_threshold": positive overlap and IoU >= `tau`.
    """

    tau: float | None = None
    """IoU cutoff in (0, 1]; present iff kind is iou_threshold."""

    eps_area: float = EPS_AREA
    """Minimum intersection area (m²) that counts as overlap."""

    def __post_init__(self):
        if self.kind == CriterionKind.IOU_THRESHOLD:
            if self.tau is None or not 0.0 < self.tau <= 1.0:
                raise ConfigError(f"iou threshold must lie in (0, 1], got {self.tau}")
        elif self.tau is not None:
            raise ConfigError("tau is only valid for the iou_threshold criterion")
        if self.eps_area < 0:
            raise ConfigError(f"eps_area must be non-negative, got {self.eps_area}")

    @classmethod
    def parse(cls, text: str, eps_area: float = EPS_AREA) -> MatchCriterion:
        """Parse the command-line form: `any-overlap` or `iou:<tau>`."""
        text = text.strip().lower()
        if text in ("any-overlap", "any_overlap"):
            return cls(eps_area=eps_area)
        if text.startswith("iou:"):
            try:
                tau = float(text[4:])
            except ValueError:
                raise ConfigError(f"invalid iou threshold in '{text}'") from None
            return cls(CriterionKind.IOU_THRESHOLD, tau, eps_area)
        raise ConfigError(f"unknown criterion '{text}' (any-overlap | iou:<tau>)")

    def describe(self) -> str:
        if self.kind == CriterionKind.IOU_THRESHOLD:
            return f"iou:{self.tau:g}"
        return "any-overlap"

    def is_satisfied(self, pred: Polygon, gt: Polygon) -> bool:
        if not overlaps(pred, gt, self.eps_area):
            return False
        if self.kind == CriterionKind.IOU_THRESHOLD:
            return iou(pred, gt) >= self.tau
        return True


@dataclass(frozen=True)
class Counts:
    """The four tallies behind precision/recall plus the totals they derive from."""

    tp: int
    fp: int
    fn_: int
    n_gt: int
    n_pred: int
    n_gt_matched: int
    """Ground-truth buildings overlapped by at least one prediction."""

    n_pred_matched: int
    """Predictions overlapping at least one ground-truth building."""

    def __post_init__(self):
        values = (
            self.tp,
            self.fp,
            self.fn_,
            self.n_gt,
            self.n_pred,
            self.n_gt_matched,
            self.n_pred_matched,
        )
        if any(v < 0 for v in values):
            raise CountsError(f"counts must be non-negative: {self.to_dict()}")
        if (
            self.tp != self.n_gt_matched
            or self.fn_ != self.n_gt - self.n_gt_matched
            or self.fp != self.n_pred - self.n_pred_matched
        ):
            raise CountsError(f"inconsistent counts: {self.to_dict()}")

    def to_dict(self) -> dict[str, int]:
        return {
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn_,
            "n_gt": self.n_gt,
            "n_pred": self.n_pred,
            "n_gt_matched": self.n_gt_matched,
            "n_pred_matched": self.n_pred_matched,
        }


class GtStatus(str, Enum):
    DETECTED = "detected"
    MISSED = "missed"


class PredStatus(str, Enum):
    MATCHED = "matched"
    SPURIOUS = "spurious"


@dataclass
class MatchOutcome:
    counts: Counts
    gt_status: dict[str, GtStatus]
    pred_status: dict[str, PredStatus]
    pairs: tuple[tuple[str, str], ...]
    """Sorted (prediction id, ground-truth id) pairs satisfying the criterion."""


@dataclass
class MetricsReport:
    precision: float
    recall: float
    f1: float
    counts: Counts
    config_echo: dict[str, Any] = field(default_factory=dict)
    """Parameter snapshot (resolution, overlap, criterion, ...) for provenance."""


@dataclass(frozen=True)
class TileConfig:
    """Digitization parameters of one tiled segmentation run."""

    resolution_cm_per_px: float = 300.0
    """Ground distance covered by one pixel."""

    tile_size_px: int = int(os.getenv("TILE_SIZE_PX", "512"))
    """Edge length of a square inference tile."""

    overlap_percent: int = 0
    """Whole-number percentage of a tile repeated in its neighbour."""

    min_segment_area_m2: float = 0.0
    """Segments smaller than this are removed; 0 keeps everything."""

    def __post_init__(self):
        if not self.resolution_cm_per_px > 0:
            raise ConfigError(
                f"resolution_cm_per_px must be positive, got {self.resolution_cm_per_px}"
            )
        if isinstance(self.tile_size_px, bool) or not isinstance(self.tile_size_px, int):
            raise ConfigError(f"tile_size_px must be an integer, got {self.tile_size_px!r}")
        if self.tile_size_px <= 0:
            raise ConfigError(f"tile_size_px must be positive, got {self.tile_size_px}")
        if isinstance(self.overlap_percent, bool) or not isinstance(
            self.overlap_percent, int
        ):
            raise ConfigError(
                f"overlap_percent must be an integer, got {self.overlap_percent!r}"
            )
        if not 0 <= self.overlap_percent < 100:
            raise ConfigError(
                f"overlap_percent must lie in [0, 100), got {self.overlap_percent}"
            )
        if self.min_segment_area_m2 < 0:
            raise ConfigError(
                f"min_segment_area_m2 must be non-negative, got {self.min_segment_area_m2}"
            )
        if self.stride_px < 1:
            raise ConfigError(
                f"tile_size_px={self.tile_size_px} with overlap {self.overlap_percent}% "
                "leaves a stride below one pixel"
            )

    @property
    def resolution_m_per_px(self) -> float:
        return self.resolution_cm_per_px / 100.0

    @property
    def stride_px(self) -> int:
        # round half up: tile_size * (1 - overlap / 100)
        return (2 * self.tile_size_px * (100 - self.overlap_percent) + 100) // 200

    def to_dict(self) -> dict[str, Any]:
        return {
            "resolution_cm_per_px": self.resolution_cm_per_px,
            "tile_size_px": self.tile_size_px,
            "overlap_percent": self.overlap_percent,
            "min_segment_area_m2": self.min_segment_area_m2,
        }


@dataclass(frozen=True)
class NoiseSpec:
    """Seeded corruptions the oracle segmenter applies to a clean scene."""

    n_spurious: int = 0
    """Random blobs where no building exists."""

    n_split: int = 0
    """Buildings cut in two by a one-pixel erase line."""

    n_omit: int = 0
    """Buildings left out of every tile."""

    n_shed: int = 0
    """Small outbuildings placed just behind a main building."""

    blob_size_px: tuple[int, int] = (2, 4)
    """Inclusive (min, max) edge length of blobs and sheds in pixels."""

    seed: int = 0

    def __post_init__(self):
        for name in ("n_spurious", "n_split", "n_omit", "n_shed"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int) or value < 0:
                raise ConfigError(f"{name} must be a non-negative integer, got {value!r}")
        lo, hi = self.blob_size_px
        if not 1 <= lo <= hi:
            raise ConfigError(f"blob_size_px must satisfy 1 <= min <= max, got {lo}-{hi}")
        object.__setattr__(self, "blob_size_px", (int(lo), int(hi)))

    @property
    def is_clean(self) -> bool:
        return not (self.n_spurious or self.n_split or self.n_omit or self.n_shed)

    def to_dict(self) -> dict[str, Any]:
        return {
            "n_spurious": self.n_spurious,
            "n_split": self.n_split,
            "n_omit": self.n_omit,
            "n_shed": self.n_shed,
            "blob_size_px": f"{self.blob_size_px[0]}-{self.blob_size_px[1]}",
            "seed": self.seed,
        }


@dataclass(frozen=True)
class PixelWindow:
    """Pixel offsets and size relative to the origin of the run's pixel grid."""

    col_off: int
    row_off: int
    width: int
    height: int


@dataclass(frozen=True)
class Tile:
    col: int
    row: int
    pixel_window: PixelWindow
    world_window: Rect
    grid_origin: Coordinate
    """Top-left corner of pixel (0, 0) of the whole grid."""

    resolution_m_per_px: float

    @property
    def tile_id(self) -> str:
        return f"r{self.row}c{self.col}"


@dataclass(frozen=True)
class TileGrid:
    extent: Rect
    tiles: tuple[Tile, ...]

    def __len__(self) -> int:
        return len(self.tiles)


@dataclass(eq=False)
class BinaryMask:
    """Row-major boolean raster; row 0 is the northern edge."""

    bits: np.ndarray
    origin: Coordinate
    """Top-left corner of the grid the offsets are measured from."""

    resolution_m_per_px: float
    col_off: int = 0
    row_off: int = 0

    def __post_init__(self):
        bits = np.asarray(self.bits, dtype=bool)
        if bits.ndim != 2:
            raise UsageError(f"mask must be two-dimensional, got shape {bits.shape}")
        if not self.resolution_m_per_px > 0:
            raise UsageError("mask resolution must be positive")
        self.bits = bits

    @property
    def width(self) -> int:
        return int(self.bits.shape[1])

    @property
    def height(self) -> int:
        return int(self.bits.shape[0])

    @classmethod
    def empty_for(cls, tile: Tile) -> BinaryMask:
        window = tile.pixel_window
        return cls(
            bits=np.zeros((window.height, window.width), dtype=bool),
            origin=tile.grid_origin,
            resolution_m_per_px=tile.resolution_m_per_px,
            col_off=window.col_off,
            row_off=window.row_off,
        )


class BaseSegmenter(ABC):
    """Anything that turns a tile window into a building mask."""

    @abstractmethod
    def segment(self, tile: Tile) -> BinaryMask:
        """Return a mask with the tile's pixel-window dimensions.

        Implementations must be deterministic for a fixed seed and safe to call
        concurrently from worker threads.
        """

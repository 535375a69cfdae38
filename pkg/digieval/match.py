from __future__ import annotations

import asyncio
import math
import os
import statistics
from collections import defaultdict
from typing import Iterable

from dotenv import load_dotenv

from .base import (
    Counts,
    FeatureSet,
    FeatureSource,
    GtStatus,
    MatchCriterion,
    MatchOutcome,
    PredStatus,
)
from .exceptions import CountsError, UsageError
from .geometry import Rect, bounding_box
from .utils import limit_async_func_call, logger, run_sync

# use the .env that is inside the current folder
# the OS environment variables take precedence over the .env file
load_dotenv(dotenv_path=".env", override=False)

MAX_ASYNC = int(os.getenv("MAX_ASYNC", "4"))
MATCH_CHUNK_SIZE = 64


class GridIndex:
    """Uniform-grid bucket index over axis-aligned bounding boxes."""

    def __init__(self, boxes: dict[str, Rect], cell_size: float | None = None):
        self._boxes = dict(boxes)
        self._order = {fid: i for i, fid in enumerate(self._boxes)}
        if cell_size is None:
            diagonals = [math.hypot(b.width, b.height) for b in self._boxes.values()]
            cell_size = statistics.median(diagonals) if diagonals else 1.0
        self.cell_size = cell_size if cell_size > 0 else 1.0

        self._cells: dict[tuple[int, int], list[str]] = defaultdict(list)
        self._extent: Rect | None = None
        for fid, box in self._boxes.items():
            for cell in self._cells_for(box):
                self._cells[cell].append(fid)
            self._extent = box if self._extent is None else self._extent.union(box)

    def __len__(self) -> int:
        return len(self._boxes)

    def _cells_for(self, rect: Rect) -> Iterable[tuple[int, int]]:
        cs = self.cell_size
        i0, i1 = math.floor(rect.min_x / cs), math.floor(rect.max_x / cs)
        j0, j1 = math.floor(rect.min_y / cs), math.floor(rect.max_y / cs)
        for i in range(i0, i1 + 1):
            for j in range(j0, j1 + 1):
                yield (i, j)

    def query(self, rect: Rect) -> list[str]:
        """Ids whose bounding box intersects `rect`, in insertion order."""
        if self._extent is None or not self._extent.intersects(rect):
            return []
        # no cell outside the indexed extent holds anything
        clipped = Rect(
            max(rect.min_x, self._extent.min_x),
            max(rect.min_y, self._extent.min_y),
            min(rect.max_x, self._extent.max_x),
            min(rect.max_y, self._extent.max_y),
        )
        found: set[str] = set()
        for cell in self._cells_for(clipped):
            for fid in self._cells.get(cell, ()):
                if fid not in found and self._boxes[fid].intersects(rect):
                    found.add(fid)
        return sorted(found, key=self._order.__getitem__)


def build_spatial_index(fs: FeatureSet) -> GridIndex:
    return GridIndex({f.id: bounding_box(f.geometry) for f in fs})


def tally_counts(
    n_gt: int, n_pred: int, n_gt_matched: int, n_pred_matched: int
) -> Counts:
    """Derive TP/FP/FN from the four totals reported for a run."""
    values = {
        "n_gt": n_gt,
        "n_pred": n_pred,
        "n_gt_matched": n_gt_matched,
        "n_pred_matched": n_pred_matched,
    }
    for name, value in values.items():
        if isinstance(value, bool) or not isinstance(value, int):
            raise CountsError(f"{name} must be an integer, got {value!r}")
        if value < 0:
            raise CountsError(f"{name} must be non-negative, got {value}")
    if n_gt_matched > n_gt:
        raise CountsError(f"n_gt_matched ({n_gt_matched}) exceeds n_gt ({n_gt})")
    if n_pred_matched > n_pred:
        raise CountsError(
            f"n_pred_matched ({n_pred_matched}) exceeds n_pred ({n_pred})"
        )
    return Counts(
        tp=n_gt_matched,
        fp=n_pred - n_pred_matched,
        fn_=n_gt - n_gt_matched,
        n_gt=n_gt,
        n_pred=n_pred,
        n_gt_matched=n_gt_matched,
        n_pred_matched=n_pred_matched,
    )


def _check_sources(pred: FeatureSet, gt: FeatureSet) -> None:
    if pred.source != FeatureSource.PREDICTION:
        raise UsageError(f"pred has source {pred.source.value}, expected prediction")
    if gt.source != FeatureSource.GROUND_TRUTH:
        raise UsageError(f"gt has source {gt.source.value}, expected ground_truth")


def _build_outcome(
    pred: FeatureSet, gt: FeatureSet, pairs: Iterable[tuple[str, str]]
) -> MatchOutcome:
    pairs = tuple(sorted(set(pairs)))
    matched_pred = {p for p, _ in pairs}
    detected_gt = {g for _, g in pairs}
    gt_status = {
        f.id: GtStatus.DETECTED if f.id in detected_gt else GtStatus.MISSED for f in gt
    }
    pred_status = {
        f.id: PredStatus.MATCHED if f.id in matched_pred else PredStatus.SPURIOUS
        for f in pred
    }
    counts = tally_counts(len(gt), len(pred), len(detected_gt), len(matched_pred))
    return MatchOutcome(counts, gt_status, pred_status, pairs)


async def amatch_features(
    pred: FeatureSet,
    gt: FeatureSet,
    criterion: MatchCriterion | None = None,
    max_async: int = MAX_ASYNC,
) -> MatchOutcome:
    """Classify predictions and ground truth by overlap.

    A ground-truth building is detected when at least one prediction satisfies
    the criterion against it; a prediction is matched when it satisfies the
    criterion against at least one ground-truth building. Many-to-one matches
    are kept in both directions.
    """
    _check_sources(pred, gt)
    criterion = criterion or MatchCriterion()
    index = build_spatial_index(pred)
    pred_by_id = {f.id: f for f in pred}
    gt_features = list(gt)

    def match_chunk(start: int) -> list[tuple[str, str]]:
        found = []
        for g in gt_features[start : start + MATCH_CHUNK_SIZE]:
            for pid in index.query(bounding_box(g.geometry)):
                if criterion.is_satisfied(pred_by_id[pid].geometry, g.geometry):
                    found.append((pid, g.id))
        return found

    async def run_chunk(start: int) -> list[tuple[str, str]]:
        return await asyncio.to_thread(match_chunk, start)

    worker = limit_async_func_call(max(1, max_async))(run_chunk)
    results = await asyncio.gather(
        *(worker(start) for start in range(0, len(gt_features), MATCH_CHUNK_SIZE))
    )
    outcome = _build_outcome(pred, gt, (pair for chunk in results for pair in chunk))
    c = outcome.counts
    logger.info(
        f"Matched {criterion.describe()}: tp={c.tp} fp={c.fp} fn={c.fn_} "
        f"({len(outcome.pairs)} overlapping pairs)"
    )
    return outcome


def match_features(
    pred: FeatureSet,
    gt: FeatureSet,
    criterion: MatchCriterion | None = None,
    max_async: int = MAX_ASYNC,
) -> MatchOutcome:
    return run_sync(amatch_features(pred, gt, criterion, max_async))


def match_features_exhaustive(
    pred: FeatureSet, gt: FeatureSet, criterion: MatchCriterion | None = None
) -> MatchOutcome:
    """All-pairs reference matcher without spatial pruning."""
    _check_sources(pred, gt)
    criterion = criterion or MatchCriterion()
    pairs = [
        (p.id, g.id)
        for p in pred
        for g in gt
        if criterion.is_satisfied(p.geometry, g.geometry)
    ]
    return _build_outcome(pred, gt, pairs)

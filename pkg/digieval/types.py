from __future__ import annotations

from pydantic import BaseModel
from typing import Any, Optional


class CountsModel(BaseModel):
    tp: int
    fp: int
    fn: int
    n_gt: int
    n_pred: int
    n_gt_matched: int
    n_pred_matched: int


class MetricsReportModel(BaseModel):
    counts: CountsModel
    precision: float
    recall: float
    f1: float
    config_echo: dict[str, Any] = {}
    tool_version: str


class RunManifest(BaseModel):
    command: str
    tool_version: str
    parameters: dict[str, Any]  # tile config, noise, seed, extent
    n_tiles: int
    n_buildings: int
    outputs: list[str] = []


class SceneManifest(BaseModel):
    tool_version: str
    n_buildings: int
    seed: Optional[int]
    straddle: bool = False
    extent: Optional[list[float]] = None  # minx, miny, maxx, maxy


class StudyRow(BaseModel):
    resolution_cm_per_px: float
    overlap_percent: int
    n_tiles: int
    n_buildings: int
    tp: Optional[int] = None
    fp: Optional[int] = None
    fn: Optional[int] = None
    precision: Optional[float] = None  # None when undefined
    recall: Optional[float] = None
    f1: Optional[float] = None

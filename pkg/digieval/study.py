"""
Parameter study: digitize one scene under several resolution / overlap
settings and tabulate building counts and accuracy per setting.
"""

from __future__ import annotations

from dataclasses import replace
from typing import Iterable, Literal

import pandas as pd

from .base import FeatureSet, MatchCriterion, NoiseSpec, TileConfig
from .exceptions import ConfigError, UndefinedMetricError
from .geometry import Rect
from .match import match_features
from .metrics import f1, precision, recall
from .segmenter import oracle_segmenter
from .tiling import plan_tiles, run_pipeline
from .types import StudyRow
from .utils import logger

StudyFormat = Literal["csv", "excel", "md", "txt"]
STUDY_EXTENSIONS = {"csv": "csv", "excel": "xlsx", "md": "md", "txt": "txt"}


def run_setting(
    scene: FeatureSet,
    extent: Rect,
    cfg: TileConfig,
    noise: NoiseSpec,
    seed: int | None = None,
    criterion: MatchCriterion | None = None,
    gt: FeatureSet | None = None,
) -> tuple[StudyRow, FeatureSet]:
    """Digitize `scene` once and score it against `gt` (the scene itself by default)."""
    segmenter = oracle_segmenter(scene, noise, seed)
    predictions = run_pipeline(extent, segmenter, cfg)
    counts = match_features(predictions, gt if gt is not None else scene, criterion).counts

    row = StudyRow(
        resolution_cm_per_px=cfg.resolution_cm_per_px,
        overlap_percent=cfg.overlap_percent,
        n_tiles=len(plan_tiles(extent, cfg)),
        n_buildings=len(predictions),
        tp=counts.tp,
        fp=counts.fp,
        fn=counts.fn_,
    )
    for name, metric in (("precision", precision), ("recall", recall), ("f1", f1)):
        try:
            setattr(row, name, metric(counts))
        except UndefinedMetricError as e:
            logger.warning(f"Setting {cfg.resolution_cm_per_px:g} cm/px, {cfg.overlap_percent}%: {e}")
    return row, predictions


def study_frame(rows: Iterable[StudyRow]) -> pd.DataFrame:
    return pd.DataFrame(
        [row.model_dump() for row in rows], columns=list(StudyRow.model_fields)
    )


def run_parameter_study(
    scene: FeatureSet,
    extent: Rect,
    base_cfg: TileConfig,
    noise: NoiseSpec,
    seed: int | None = None,
    overlaps: Iterable[int] = (0, 12),
    resolutions: Iterable[float] | None = None,
    criterion: MatchCriterion | None = None,
    gt: FeatureSet | None = None,
) -> pd.DataFrame:
    """One row per (resolution, overlap) setting, resolutions outermost."""
    overlaps = list(overlaps)
    resolutions = list(resolutions or [base_cfg.resolution_cm_per_px])
    if not overlaps:
        raise ConfigError("parameter study needs at least one overlap value")
    rows = []
    for resolution in resolutions:
        for overlap in overlaps:
            cfg = replace(
                base_cfg, resolution_cm_per_px=resolution, overlap_percent=overlap
            )
            row, _ = run_setting(scene, extent, cfg, noise, seed, criterion, gt)
            rows.append(row)
    return study_frame(rows)


def export_study(
    df: pd.DataFrame, output_path: str, file_format: StudyFormat = "csv"
) -> None:
    """Write the study table as csv, excel, md or txt."""
    if file_format == "csv":
        df.to_csv(output_path, index=False, lineterminator="\n")

    elif file_format == "excel":
        with pd.ExcelWriter(output_path, engine="xlsxwriter") as writer:
            df.to_excel(writer, sheet_name="Study", index=False)

    elif file_format == "md":
        with open(output_path, "w", encoding="utf-8") as mdfile:
            mdfile.write("# Parameter study\n\n")
            if df.empty:
                mdfile.write("*No settings evaluated*\n")
                return
            mdfile.write("| " + " | ".join(df.columns) + " |\n")
            mdfile.write("| " + " | ".join(["---"] * len(df.columns)) + " |\n")
            for record in df.itertuples(index=False):
                mdfile.write(
                    "| " + " | ".join(_cell(v) for v in record) + " |\n"
                )

    elif file_format == "txt":
        with open(output_path, "w", encoding="utf-8") as txtfile:
            txtfile.write("PARAMETER STUDY\n")
            txtfile.write("=" * 80 + "\n\n")
            txtfile.write(df.to_string(index=False, na_rep="undefined") + "\n")

    else:
        raise ConfigError(
            f"Unsupported file format: {file_format}. Choose from: csv, excel, md, txt"
        )
    logger.info(f"Study exported to {output_path}")


def _cell(value) -> str:
    if value is None or (isinstance(value, float) and value != value):
        return "undefined"
    if isinstance(value, float):
        return f"{value:.4f}"
    return str(value)

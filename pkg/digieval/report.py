"""
Report emission: report.json, the text table, classed overlays and manifests.

Everything here renders to strings; the caller writes files only once every
artifact of a command has been produced.
"""

from __future__ import annotations

import json
import os
from typing import Any, Mapping

from . import __version__
from .base import FeatureSet, GtStatus, MatchOutcome, MetricsReport, PredStatus
from .ingest import dump_feature_collection, feature_to_geojson, is_lonlat
from .metrics import format_percent
from .types import CountsModel, MetricsReportModel
from .utils import logger, write_text

TP_DETECTED = "tp-detected"
FN_MISSED = "fn-missed"
FP_SPURIOUS = "fp-spurious"

TABLE_ROWS = (
    "True Positive",
    "False Positive",
    "False Negative",
    "Precision",
    "Recall",
    "F1-score",
)


def report_document(report: MetricsReport) -> dict[str, Any]:
    return MetricsReportModel(
        counts=CountsModel(**report.counts.to_dict()),
        precision=report.precision,
        recall=report.recall,
        f1=report.f1,
        config_echo=dict(report.config_echo),
        tool_version=__version__,
    ).model_dump()


def dumps_json(doc: Mapping[str, Any]) -> str:
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def render_report_txt(report: MetricsReport) -> str:
    """Counts and percentages as a two-column table."""
    c = report.counts
    values = (
        str(c.tp),
        str(c.fp),
        str(c.fn_),
        f"{format_percent(report.precision)} %",
        f"{format_percent(report.recall)} %",
        f"{format_percent(report.f1)} %",
    )
    width = max(len(label) for label in TABLE_ROWS) + 4
    lines = [f"{'Metric':<{width}}Value", "-" * (width + 10)]
    lines += [f"{label:<{width}}{value}" for label, value in zip(TABLE_ROWS, values)]
    if report.config_echo:
        lines += ["", "Settings"]
        lines += [f"  {k}: {v}" for k, v in sorted(report.config_echo.items())]
    return "\n".join(lines) + "\n"


def render_overlays(pred: FeatureSet, gt: FeatureSet, outcome: MatchOutcome) -> str:
    """Every input feature with a `status` and `layer` property.

    Ids are prefixed with their layer so both sets fit in one collection;
    the input id stays available as `source_id`. When either input was read
    as lon/lat, the overlays are written back in lon/lat degrees.
    """
    lonlat = is_lonlat(pred) or is_lonlat(gt)
    features = []
    for feature in gt:
        status = (
            TP_DETECTED
            if outcome.gt_status[feature.id] == GtStatus.DETECTED
            else FN_MISSED
        )
        doc = feature_to_geojson(
            feature,
            {"status": status, "layer": gt.source.value, "source_id": feature.id},
            lonlat=lonlat,
        )
        doc["id"] = f"gt/{feature.id}"
        features.append(doc)
    for feature in pred:
        status = (
            TP_DETECTED
            if outcome.pred_status[feature.id] == PredStatus.MATCHED
            else FP_SPURIOUS
        )
        doc = feature_to_geojson(
            feature,
            {"status": status, "layer": pred.source.value, "source_id": feature.id},
            lonlat=lonlat,
        )
        doc["id"] = f"pred/{feature.id}"
        features.append(doc)
    return dump_feature_collection(features, crs_note=None if lonlat else "planar-meters")


def write_artifacts(out_dir: str, artifacts: Mapping[str, str]) -> list[str]:
    """Write rendered artifacts into `out_dir`; returns the written paths."""
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for name, content in artifacts.items():
        path = os.path.join(out_dir, name)
        write_text(content, path)
        paths.append(path)
    logger.info(f"Wrote {len(paths)} files to {out_dir}")
    return paths

import json
from collections import Counter

import pytest

from conftest import gts, preds, square
from digieval.base import FeatureSource
from digieval.ingest import parse_geojson
from digieval.match import match_features
from digieval.metrics import build_report, format_percent
from digieval.report import (
    dumps_json,
    render_overlays,
    render_report_txt,
    report_document,
    write_artifacts,
)


def table_rows(text):
    rows = {}
    for line in text.splitlines()[2:8]:
        label, value = line.split("  ", 1)
        rows[label.strip()] = value.strip().removesuffix(" %")
    return rows


def scenario():
    pred = preds({"p1": square(0, 0), "p2": square(0.5, 0), "p3": square(20, 20)})
    gt = gts({"a": square(0, 0), "b": square(5, 5), "c": square(10, 10)})
    return pred, gt, match_features(pred, gt)


def test_overlay_statuses_match_counts():
    pred, gt, outcome = scenario()
    doc = json.loads(render_overlays(pred, gt, outcome))
    features = doc["features"]
    assert len(features) == len(pred) + len(gt)

    by_layer = Counter((f["properties"]["layer"], f["properties"]["status"]) for f in features)
    c = outcome.counts
    assert by_layer[("ground_truth", "tp-detected")] == c.tp
    assert by_layer[("ground_truth", "fn-missed")] == c.fn_
    assert by_layer[("prediction", "tp-detected")] == c.n_pred_matched
    assert by_layer[("prediction", "fp-spurious")] == c.fp

    ids = {f["id"] for f in features}
    assert {"gt/a", "gt/b", "gt/c", "pred/p1", "pred/p2", "pred/p3"} == ids
    assert {f["properties"]["source_id"] for f in features} == {"a", "b", "c", "p1", "p2", "p3"}


def test_text_table_agrees_with_json():
    _, _, outcome = scenario()
    report = build_report(outcome.counts, {"overlap_percent": 12})
    doc = json.loads(dumps_json(report_document(report)))
    lines = table_rows(render_report_txt(report))
    assert lines["True Positive"] == str(doc["counts"]["tp"])
    assert lines["False Positive"] == str(doc["counts"]["fp"])
    assert lines["False Negative"] == str(doc["counts"]["fn"])
    assert lines["Precision"] == format_percent(doc["precision"]) == "50.00"
    assert lines["Recall"] == format_percent(doc["recall"]) == "33.33"
    assert lines["F1-score"] == format_percent(doc["f1"]) == "40.00"


def test_settings_section():
    _, _, outcome = scenario()
    text = render_report_txt(build_report(outcome.counts, {"overlap_percent": 12}))
    assert "Settings" in text
    assert "overlap_percent: 12" in text


def test_report_document_schema():
    _, _, outcome = scenario()
    doc = report_document(build_report(outcome.counts))
    assert set(doc) == {"counts", "precision", "recall", "f1", "config_echo", "tool_version"}
    assert set(doc["counts"]) == {"tp", "fp", "fn", "n_gt", "n_pred", "n_gt_matched", "n_pred_matched"}


def test_write_artifacts(tmp_path):
    out = tmp_path / "nested" / "out"
    paths = write_artifacts(str(out), {"a.txt": "one\n", "b.json": "{}\n"})
    assert [p.rsplit("/", 1)[-1] for p in paths] == ["a.txt", "b.json"]
    assert (out / "a.txt").read_text(encoding="utf-8") == "one\n"


def lonlat_square(lon, lat, size=0.001):
    ring = [[lon, lat], [lon + size, lat], [lon + size, lat + size], [lon, lat + size], [lon, lat]]
    return {
        "type": "Feature",
        "id": "b1",
        "properties": {"building": "yes"},
        "geometry": {"type": "Polygon", "coordinates": [ring]},
    }


def test_lonlat_overlays_stay_in_degrees():
    doc = json.dumps({"type": "FeatureCollection", "features": [lonlat_square(13.0, 52.0)]})
    pred = parse_geojson(doc, FeatureSource.PREDICTION)
    gt = parse_geojson(doc, FeatureSource.GROUND_TRUTH)
    overlays = json.loads(render_overlays(pred, gt, match_features(pred, gt)))

    assert "crs_note" not in overlays
    for feature in overlays["features"]:
        ring = feature["geometry"]["coordinates"][0]
        assert ring[0] == pytest.approx([13.0, 52.0], abs=1e-9)
        assert ring[2] == pytest.approx([13.001, 52.001], abs=1e-9)
        assert feature["properties"]["status"] == "tp-detected"


def test_planar_overlays_keep_meters():
    pred, gt, outcome = scenario()
    overlays = json.loads(render_overlays(pred, gt, outcome))
    assert overlays["crs_note"] == "planar-meters"
    first = next(f for f in overlays["features"] if f["id"] == "gt/b")
    assert first["geometry"]["coordinates"][0][0] == [5.0, 5.0]

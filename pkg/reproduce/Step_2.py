import os

from digieval.base import FeatureSource
from digieval.ingest import load_feature_set
from digieval.match import match_features
from digieval.metrics import build_report
from digieval.report import dumps_json, render_report_txt, report_document
from digieval.utils import write_text

SCENE_DIR = "../datasets/scenes"
WORKING_DIR = "../runs"


def evaluate_run(run_dir, gt):
    pred = load_feature_set(
        os.path.join(run_dir, "predictions.geojson"), FeatureSource.PREDICTION
    )
    outcome = match_features(pred, gt)
    report = build_report(outcome.counts)
    write_text(dumps_json(report_document(report)), os.path.join(run_dir, "report.json"))
    write_text(render_report_txt(report), os.path.join(run_dir, "report.txt"))
    return report


if __name__ == "__main__":
    gt = load_feature_set(os.path.join(SCENE_DIR, "city.osm"), FeatureSource.GROUND_TRUTH)

    for name in sorted(os.listdir(WORKING_DIR)):
        run_dir = os.path.join(WORKING_DIR, name)
        if not os.path.isfile(os.path.join(run_dir, "predictions.geojson")):
            continue
        print(f"== {name} ==")
        print(render_report_txt(evaluate_run(run_dir, gt)))

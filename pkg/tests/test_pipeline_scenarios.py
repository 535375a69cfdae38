"""End-to-end digitization runs on generated scenes."""

import pandas as pd
import pytest

from digieval.base import NoiseSpec, TileConfig
from digieval.geometry import Rect
from digieval.ingest import emit_geojson, feature_set_bounds
from digieval.metrics import evaluate, format_percent
from digieval.scene import generate_scene, generate_straddle_scene
from digieval.segmenter import oracle_segmenter
from digieval.study import export_study, run_parameter_study, run_setting, study_frame
from digieval.tiling import run_pipeline
from digieval.types import StudyRow


@pytest.fixture(scope="module")
def city():
    scene = generate_scene(320, seed=2024)
    return scene, feature_set_bounds(scene).expand(10)


class TestCityRuns:
    @pytest.mark.parametrize(
        "noise,overlap,expected,percentages",
        [
            (NoiseSpec(n_spurious=116, n_omit=1, seed=1), 12, (319, 116, 1), ("73.33", "99.69", "84.50")),
            (NoiseSpec(n_spurious=96, seed=2), 25, (320, 96, 0), ("76.92", "100.00", "86.96")),
        ],
    )
    def test_reported_counts(self, city, noise, overlap, expected, percentages):
        scene, extent = city
        cfg = TileConfig(resolution_cm_per_px=300, tile_size_px=128, overlap_percent=overlap)
        pred = run_pipeline(extent, oracle_segmenter(scene, noise), cfg)
        report = evaluate(pred, scene)
        c = report.counts
        assert (c.tp, c.fp, c.fn_) == expected
        assert (
            format_percent(report.precision),
            format_percent(report.recall),
            format_percent(report.f1),
        ) == percentages

    def test_byte_identical_reruns(self, city):
        scene, extent = city
        cfg = TileConfig(resolution_cm_per_px=300, tile_size_px=128, overlap_percent=12)
        noise = NoiseSpec(n_spurious=20, n_split=5, n_omit=3, n_shed=4, seed=7)
        a = run_pipeline(extent, oracle_segmenter(scene, noise), cfg)
        b = run_pipeline(extent, oracle_segmenter(scene, noise), cfg)
        assert emit_geojson(a) == emit_geojson(b)


class TestOverlapStudy:
    def test_straddling_buildings_split_without_overlap(self):
        scene, extent = generate_straddle_scene(tile_size_px=64, resolution_cm_per_px=300, tiles_x=3)
        n = len(scene)
        assert n > 0
        counts = {}
        for overlap in (0, 12, 25):
            cfg = TileConfig(resolution_cm_per_px=300, tile_size_px=64, overlap_percent=overlap)
            row, _ = run_setting(scene, extent, cfg, NoiseSpec())
            counts[overlap] = row.n_buildings
            assert row.tp == n
            assert row.fn == 0
        assert counts[0] == 2 * n
        assert counts[0] > counts[12]
        assert counts[12] >= counts[25] == n

    def test_parameter_study_table(self):
        scene, extent = generate_straddle_scene(tile_size_px=64, resolution_cm_per_px=300, tiles_x=3)
        df = run_parameter_study(
            scene, extent, TileConfig(resolution_cm_per_px=300, tile_size_px=64), NoiseSpec(), overlaps=(0, 12, 25)
        )
        assert list(df.columns) == list(StudyRow.model_fields)
        assert df["overlap_percent"].tolist() == [0, 12, 25]
        assert df["n_buildings"].is_monotonic_decreasing
        assert df["n_tiles"].is_monotonic_increasing

    def test_resolutions_are_outermost(self):
        scene = generate_scene(9, seed=1)
        df = run_parameter_study(
            scene,
            feature_set_bounds(scene).expand(10),
            TileConfig(tile_size_px=64),
            NoiseSpec(),
            overlaps=(0, 12),
            resolutions=(100, 200),
        )
        assert df[["resolution_cm_per_px", "overlap_percent"]].values.tolist() == [
            [100, 0],
            [100, 12],
            [200, 0],
            [200, 12],
        ]
        assert (df["tp"] == 9).all()


class TestEdgeScenes:
    def test_empty_scene_gives_empty_output(self):
        empty = generate_scene(0)
        pred = run_pipeline(Rect(0, 0, 300, 300), oracle_segmenter(empty), TileConfig(tile_size_px=64))
        assert len(pred) == 0

    def test_undefined_metrics_are_left_blank(self):
        empty = generate_scene(0)
        row, _ = run_setting(empty, Rect(0, 0, 100, 100), TileConfig(tile_size_px=32), NoiseSpec())
        assert (row.tp, row.fp, row.fn) == (0, 0, 0)
        assert row.precision is None and row.f1 is None


def _mixed_frame() -> pd.DataFrame:
    return study_frame(
        [
            StudyRow(resolution_cm_per_px=300, overlap_percent=0, n_tiles=4, n_buildings=10,
                     tp=8, fp=2, fn=1, precision=0.8, recall=8 / 9, f1=16 / 19),
            StudyRow(resolution_cm_per_px=300, overlap_percent=12, n_tiles=9, n_buildings=0,
                     tp=0, fp=0, fn=0),
        ]
    )


class TestExportStudy:
    def test_csv(self, tmp_path):
        path = tmp_path / "study.csv"
        export_study(_mixed_frame(), str(path), "csv")
        back = pd.read_csv(path)
        assert back["n_tiles"].tolist() == [4, 9]
        assert back["precision"].isna().tolist() == [False, True]

    def test_excel(self, tmp_path):
        path = tmp_path / "study.xlsx"
        export_study(_mixed_frame(), str(path), "excel")
        assert path.stat().st_size > 0

    def test_markdown(self, tmp_path):
        path = tmp_path / "study.md"
        export_study(_mixed_frame(), str(path), "md")
        text = path.read_text(encoding="utf-8")
        assert text.startswith("# Parameter study")
        assert "| 0.8000 |" in text
        assert "undefined" in text

    def test_text(self, tmp_path):
        path = tmp_path / "study.txt"
        export_study(_mixed_frame(), str(path), "txt")
        text = path.read_text(encoding="utf-8")
        assert text.startswith("PARAMETER STUDY")
        assert "undefined" in text

    def test_unknown_format(self, tmp_path):
        from digieval.exceptions import ConfigError

        with pytest.raises(ConfigError):
            export_study(_mixed_frame(), str(tmp_path / "x"), "parquet")

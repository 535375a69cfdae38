import numpy as np
import pytest

from digieval.base import NoiseSpec, TileConfig
from digieval.ingest import emit_geojson, feature_set_bounds
from digieval.match import match_features
from digieval.scene import generate_scene
from digieval.segmenter import OracleSegmenter, oracle_segmenter
from digieval.tiling import plan_tiles, rasterize, run_pipeline

CFG = TileConfig(resolution_cm_per_px=100, tile_size_px=64, overlap_percent=12)


@pytest.fixture
def scene():
    return generate_scene(16, seed=8)


@pytest.fixture
def extent(scene):
    return feature_set_bounds(scene).expand(10)


def run(scene, extent, noise, **kwargs):
    pred = run_pipeline(extent, oracle_segmenter(scene, noise), CFG, **kwargs)
    return pred, match_features(pred, scene).counts


class TestCleanScene:
    def test_masks_equal_rasterized_scene(self, scene, extent):
        seg = oracle_segmenter(scene)
        polys = [f.geometry for f in scene]
        for tile in plan_tiles(extent, CFG).tiles:
            w = tile.pixel_window
            expected = rasterize(
                polys, tile.grid_origin, w.width, w.height, 1.0, w.col_off, w.row_off
            )
            assert (seg.segment(tile).bits == expected.bits).all()

    def test_every_building_detected_once(self, scene, extent):
        pred, c = run(scene, extent, NoiseSpec())
        assert len(pred) == len(scene)
        assert (c.tp, c.fp, c.fn_) == (16, 0, 0)


class TestNoise:
    def test_omit_everything(self, scene, extent):
        seg = oracle_segmenter(scene, NoiseSpec(n_omit=16))
        for tile in plan_tiles(extent, CFG).tiles:
            assert not seg.segment(tile).bits.any()

    def test_omit_more_than_available(self, scene):
        seg = oracle_segmenter(scene, NoiseSpec(n_omit=40))
        assert seg.omitted == frozenset(scene.ids())

    def test_omissions_are_missed(self, scene, extent):
        pred, c = run(scene, extent, NoiseSpec(n_omit=3, seed=2))
        assert len(pred) == 13
        assert (c.tp, c.fp, c.fn_) == (13, 0, 3)

    def test_split_building_yields_two_matched_parts(self, scene, extent):
        pred, c = run(scene, extent, NoiseSpec(n_split=2, seed=5))
        assert len(pred) == 18
        assert (c.tp, c.fp, c.fn_) == (16, 0, 0)
        assert c.n_pred_matched == 18

    def test_spurious_blobs_are_false_positives(self, scene, extent):
        _, c = run(scene, extent, NoiseSpec(n_spurious=10, seed=1))
        assert (c.tp, c.fp, c.fn_) == (16, 10, 0)

    def test_sheds_sit_behind_a_building(self, scene, extent):
        noise = NoiseSpec(n_shed=5, seed=3)
        pred = run_pipeline(extent, oracle_segmenter(scene, noise), CFG)
        outcome = match_features(pred, scene)
        assert (outcome.counts.tp, outcome.counts.fp) == (16, 5)
        buildings = [f.geometry.shape for f in scene]
        for f in pred:
            if f.id in {p for p, _ in outcome.pairs}:
                continue
            gap = min(f.geometry.shape.distance(b) for b in buildings)
            assert 0 < gap <= 3 * CFG.resolution_m_per_px + 1e-9


class TestDeterminism:
    def test_same_seed_same_choices(self, scene):
        noise = NoiseSpec(n_omit=4, n_split=3, seed=9)
        a, b = OracleSegmenter(scene, noise), OracleSegmenter(scene, noise)
        assert a.omitted == b.omitted
        assert a.split == b.split
        assert a.omitted.isdisjoint(a.split)

    def test_seed_argument_overrides_noise_seed(self, scene):
        noise = NoiseSpec(n_omit=4, seed=0)
        choices = {OracleSegmenter(scene, noise, seed=s).omitted for s in range(5)}
        assert len(choices) > 1

    def test_noise_is_cached_per_grid(self, scene, extent):
        seg = oracle_segmenter(scene, NoiseSpec(n_spurious=5))
        tile = plan_tiles(extent, CFG).tiles[0]
        first = seg.noise_polygons(tile.grid_origin, 1.0)
        assert seg.noise_polygons(tile.grid_origin, 1.0) is first

    def test_output_independent_of_concurrency(self, scene, extent):
        noise = NoiseSpec(n_spurious=6, n_split=2, n_omit=1, n_shed=2, seed=4)
        serial = run_pipeline(extent, oracle_segmenter(scene, noise), CFG, max_async=1)
        parallel = run_pipeline(extent, oracle_segmenter(scene, noise), CFG, max_async=8)
        assert emit_geojson(serial) == emit_geojson(parallel)

    def test_masks_are_repeatable(self, scene, extent):
        noise = NoiseSpec(n_spurious=6, n_split=2, seed=4)
        tiles = plan_tiles(extent, CFG).tiles
        a = [oracle_segmenter(scene, noise).segment(t).bits for t in tiles]
        b = [oracle_segmenter(scene, noise).segment(t).bits for t in tiles]
        assert all(np.array_equal(x, y) for x, y in zip(a, b))

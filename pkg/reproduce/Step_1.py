import os

from digieval.base import FeatureSource, NoiseSpec, TileConfig
from digieval.ingest import emit_geojson, feature_set_bounds, load_feature_set
from digieval.segmenter import oracle_segmenter
from digieval.tiling import run_pipeline
from digieval.utils import write_text

SCENE_DIR = "../datasets/scenes"
WORKING_DIR = "../runs"

# two digitization runs of the same city, as a reviewer would compare them
RUNS = {
    "run_a": (NoiseSpec(n_spurious=116, n_omit=1, seed=1), 0),
    "run_b": (NoiseSpec(n_spurious=96, seed=2), 12),
}


def main():
    scene = load_feature_set(
        os.path.join(SCENE_DIR, "city.geojson"), FeatureSource.GROUND_TRUTH
    )
    extent = feature_set_bounds(scene).expand(10)

    for name, (noise, overlap) in RUNS.items():
        cfg = TileConfig(resolution_cm_per_px=300, tile_size_px=128, overlap_percent=overlap)
        predictions = run_pipeline(extent, oracle_segmenter(scene, noise), cfg)
        out_dir = os.path.join(WORKING_DIR, name)
        os.makedirs(out_dir, exist_ok=True)
        write_text(emit_geojson(predictions), os.path.join(out_dir, "predictions.geojson"))
        print(f"{name}: {len(predictions)} buildings digitized at {overlap}% overlap")


if __name__ == "__main__":
    main()

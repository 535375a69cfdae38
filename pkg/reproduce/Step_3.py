import os
import argparse

from digieval.base import FeatureSource, NoiseSpec, TileConfig
from digieval.geometry import Rect
from digieval.ingest import load_feature_set
from digieval.study import STUDY_EXTENSIONS, export_study, run_parameter_study


def run_overlap_study(scene_path, extent, output_file, file_format):
    scene = load_feature_set(scene_path, FeatureSource.GROUND_TRUTH)
    extent = extent or scene.extent
    if extent is None:
        raise SystemExit(f"{scene_path} declares no extent; pass --extent")
    df = run_parameter_study(
        scene,
        extent,
        TileConfig(resolution_cm_per_px=300, tile_size_px=512),
        NoiseSpec(),
        overlaps=(0, 12, 25),
    )
    export_study(df, output_file, file_format)
    print(df.to_string(index=False))
    print(f"Study written to {output_file}")


if __name__ == "__main__":
    parser = argparse.ArgumentParser()
    parser.add_argument("-i", "--scene", type=str, default="../datasets/scenes/straddle.geojson")
    # default: the extent stored in the straddle scene
    parser.add_argument("-e", "--extent", type=str, default=None)
    parser.add_argument("-f", "--format", type=str, default="csv", choices=list(STUDY_EXTENSIONS))
    parser.add_argument("-o", "--output_dir", type=str, default="../runs")

    args = parser.parse_args()

    os.makedirs(args.output_dir, exist_ok=True)
    output_file = os.path.join(args.output_dir, f"study.{STUDY_EXTENSIONS[args.format]}")
    extent = Rect.parse(args.extent) if args.extent else None
    run_overlap_study(args.scene, extent, output_file, args.format)

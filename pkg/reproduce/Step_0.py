import os
import argparse

from digieval.ingest import emit_geojson
from digieval.scene import emit_osm_xml, generate_scene, generate_straddle_scene
from digieval.utils import write_text


def generate_scenes(output_directory, n_buildings, seed, tile_size_px, resolution):
    os.makedirs(output_directory, exist_ok=True)

    scene = generate_scene(n_buildings, seed)
    write_text(emit_geojson(scene), os.path.join(output_directory, "city.geojson"))
    write_text(emit_osm_xml(scene), os.path.join(output_directory, "city.osm"))
    print(f"City scene with {len(scene)} buildings written to {output_directory}")

    straddle, extent = generate_straddle_scene(tile_size_px, resolution)
    write_text(emit_geojson(straddle), os.path.join(output_directory, "straddle.geojson"))
    print(
        f"Straddle scene with {len(straddle)} buildings over extent "
        f"{','.join(f'{v:g}' for v in extent.as_tuple())} written to {output_directory}"
    )


if __name__ == "__main__":
    parser = argparse.ArgumentParser()
    parser.add_argument("-o", "--output_dir", type=str, default="../datasets/scenes")
    parser.add_argument("-n", "--buildings", type=int, default=320)
    parser.add_argument("-s", "--seed", type=int, default=0)
    parser.add_argument("--tile_size_px", type=int, default=512)
    parser.add_argument("--resolution", type=float, default=300.0)

    args = parser.parse_args()

    generate_scenes(
        args.output_dir, args.buildings, args.seed, args.tile_size_px, args.resolution
    )

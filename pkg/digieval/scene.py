"""
Synthetic ground truth for reproducible digitization runs.
"""

from __future__ import annotations

import math
import xml.etree.ElementTree as ET

import numpy as np

from .base import Feature, FeatureSet, FeatureSource
from .exceptions import ConfigError
from .geometry import Rect, rectangle, unproject_xy
from .utils import logger


def generate_scene(
    n_buildings: int,
    seed: int = 0,
    cell_size_m: float = 50.0,
    size_range_m: tuple[float, float] = (12.0, 20.0),
    margin_m: float = 5.0,
) -> FeatureSet:
    """Detached rectangular buildings on a jittered grid, one per cell.

    Each building keeps at least `margin_m` to its cell border, so neighbours
    are never closer than twice that.
    """
    if n_buildings < 0:
        raise ConfigError(f"n_buildings must be non-negative, got {n_buildings}")
    lo, hi = size_range_m
    if not 0 < lo <= hi:
        raise ConfigError(f"invalid building size range {lo}-{hi}")
    if cell_size_m - 2 * margin_m < hi:
        raise ConfigError(
            f"cell of {cell_size_m} m cannot hold a {hi} m building with {margin_m} m margins"
        )

    rng = np.random.default_rng(seed)
    n_cols = max(1, math.ceil(math.sqrt(n_buildings)))
    features = []
    for i in range(n_buildings):
        cx0 = (i % n_cols) * cell_size_m
        cy0 = (i // n_cols) * cell_size_m
        w, h = rng.uniform(lo, hi, size=2)
        x0 = rng.uniform(cx0 + margin_m, cx0 + cell_size_m - margin_m - w)
        y0 = rng.uniform(cy0 + margin_m, cy0 + cell_size_m - margin_m - h)
        polygon = rectangle(
            round(x0, 3), round(y0, 3), round(x0 + w, 3), round(y0 + h, 3)
        )
        features.append(
            Feature(f"b{i:04d}", polygon, FeatureSource.GROUND_TRUTH, {"building": "yes"})
        )
    logger.info(f"Generated scene of {n_buildings} buildings (seed {seed})")
    return FeatureSet(tuple(features), FeatureSource.GROUND_TRUTH, crs_note="planar-meters")


def generate_straddle_scene(
    tile_size_px: int = 512,
    resolution_cm_per_px: float = 300.0,
    tiles_x: int = 3,
    tiles_y: int = 1,
) -> tuple[FeatureSet, Rect]:
    """Buildings centred on every interior vertical seam of the 0%-overlap grid.

    Returns the scene and the extent that must be tiled for the seams to land
    where the buildings are.
    """
    if tiles_x < 2 or tiles_y < 1:
        raise ConfigError("a straddle scene needs at least two tile columns")
    if tile_size_px < 24:
        raise ConfigError(f"tile_size_px {tile_size_px} is too small for a straddle scene")
    res = resolution_cm_per_px / 100.0
    tile_m = tile_size_px * res
    extent = Rect(0.0, 0.0, tiles_x * tile_m, tiles_y * tile_m)

    # sizes in pixels: 3 px either side of the seam, 5 px tall, one every 20 px
    half_w, height, step, edge = 3 * res, 5 * res, 20 * res, 10 * res
    features = []
    for seam in range(1, tiles_x):
        x = seam * tile_m
        for row in range(tiles_y):
            top = extent.max_y - row * tile_m - edge
            bottom = extent.max_y - (row + 1) * tile_m + edge
            y = top
            while y - height >= bottom:
                fid = f"s{seam}-r{row}-{len(features):04d}"
                polygon = rectangle(x - half_w, y - height, x + half_w, y)
                features.append(
                    Feature(fid, polygon, FeatureSource.GROUND_TRUTH, {"building": "yes"})
                )
                y -= step
    logger.info(
        f"Generated straddle scene: {len(features)} buildings on {tiles_x - 1} seams"
    )
    scene = FeatureSet(
        tuple(features), FeatureSource.GROUND_TRUTH, crs_note="planar-meters", extent=extent
    )
    return scene, extent


def emit_osm_xml(fs: FeatureSet) -> str:
    """Write outer rings as closed `building` ways with lon/lat nodes."""
    root = ET.Element("osm", version="0.6", generator="digieval")
    ways = []
    next_node = 1
    for way_id, feature in enumerate(fs, start=1):
        if feature.geometry.holes:
            logger.warning(f"Dropping holes of '{feature.id}' in OSM output")
        refs = []
        for vertex in feature.geometry.outer.vertices:
            lon, lat = unproject_xy(vertex.x, vertex.y)
            ET.SubElement(
                root,
                "node",
                id=str(next_node),
                lat=format(lat, ".12f"),
                lon=format(lon, ".12f"),
            )
            refs.append(next_node)
            next_node += 1
        refs.append(refs[0])
        tags = dict(feature.tags)
        tags.setdefault("building", "yes")
        tags.setdefault("ref", feature.id)
        ways.append((way_id, refs, tags))

    for way_id, refs, tags in ways:
        way = ET.SubElement(root, "way", id=str(way_id))
        for ref in refs:
            ET.SubElement(way, "nd", ref=str(ref))
        for k, v in sorted(tags.items()):
            ET.SubElement(way, "tag", k=k, v=v)

    ET.indent(root)
    return '<?xml version="1.0" encoding="UTF-8"?>\n' + ET.tostring(
        root, encoding="unicode"
    ) + "\n"

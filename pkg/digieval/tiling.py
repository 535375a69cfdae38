"""
Tiled digitization: tile planning, rasterization, polygonization and the
stitching of per-tile segments back into building polygons.

Every mask is aligned to one global pixel grid whose origin is the top-left
corner of the analysis extent. A pixel's world coordinates depend only on its
global (column, row) index, so tiles that overlap produce identical vertices
for the pixels they share.
"""

from __future__ import annotations

import asyncio
import math
import os
from typing import Sequence

import networkx as nx
import numpy as np
import shapely
from scipy import ndimage
from shapely.geometry import MultiPolygon as ShapelyMultiPolygon

from .base import (
    BaseSegmenter,
    BinaryMask,
    Feature,
    FeatureSet,
    FeatureSource,
    PixelWindow,
    Tile,
    TileConfig,
    TileGrid,
)
from .exceptions import ConfigError, SegmenterError
from .geometry import (
    EPS_AREA,
    Coordinate,
    Polygon,
    Rect,
    bounding_box,
    intersection_area,
    polygon_area,
)
from .match import GridIndex
from .utils import limit_async_func_call, logger, run_sync, verbose_debug

MAX_ASYNC = int(os.getenv("MAX_ASYNC", "4"))

FOUR_CONNECTED = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)


def _tile_offsets(n_px: int, tile_px: int, stride_px: int) -> list[int]:
    if n_px <= tile_px:
        return [0]
    offsets = []
    pos = 0
    while pos + tile_px < n_px:
        offsets.append(pos)
        pos += stride_px
    # last tile shifted inward so it ends on the extent edge
    offsets.append(n_px - tile_px)
    return offsets


def plan_tiles(extent: Rect, cfg: TileConfig) -> TileGrid:
    """Lay out tiles at stride spacing over `extent`, top row first."""
    if extent.width <= 0 or extent.height <= 0:
        raise ConfigError(f"extent {extent.as_tuple()} is degenerate")
    res = cfg.resolution_m_per_px
    n_cols_px = max(1, math.ceil(extent.width / res - 1e-9))
    n_rows_px = max(1, math.ceil(extent.height / res - 1e-9))
    tile_w = min(cfg.tile_size_px, n_cols_px)
    tile_h = min(cfg.tile_size_px, n_rows_px)
    origin = Coordinate(extent.min_x, extent.max_y)

    tiles = []
    row_offsets = _tile_offsets(n_rows_px, cfg.tile_size_px, cfg.stride_px)
    col_offsets = _tile_offsets(n_cols_px, cfg.tile_size_px, cfg.stride_px)
    for row, row_off in enumerate(row_offsets):
        for col, col_off in enumerate(col_offsets):
            # the outermost pixel may reach past the extent; world windows stop at it
            world = Rect(
                origin.x + col_off * res,
                max(extent.min_y, origin.y - (row_off + tile_h) * res),
                min(extent.max_x, origin.x + (col_off + tile_w) * res),
                origin.y - row_off * res,
            )
            tiles.append(
                Tile(
                    col=col,
                    row=row,
                    pixel_window=PixelWindow(col_off, row_off, tile_w, tile_h),
                    world_window=world,
                    grid_origin=origin,
                    resolution_m_per_px=res,
                )
            )
    logger.debug(
        f"Planned {len(row_offsets)}x{len(col_offsets)} tiles of {tile_w}x{tile_h} px "
        f"(stride {cfg.stride_px} px) over {n_cols_px}x{n_rows_px} px"
    )
    return TileGrid(extent=extent, tiles=tuple(tiles))


def rasterize(
    polygons: Sequence[Polygon],
    origin: Coordinate,
    width: int,
    height: int,
    resolution: float,
    col_off: int = 0,
    row_off: int = 0,
) -> BinaryMask:
    """Burn polygons into a mask: a pixel is set when its centre is inside."""
    bits = np.zeros((height, width), dtype=bool)
    for polygon in polygons:
        box = bounding_box(polygon)
        c0 = max(col_off, math.ceil((box.min_x - origin.x) / resolution - 0.5))
        c1 = min(col_off + width - 1, math.floor((box.max_x - origin.x) / resolution - 0.5))
        r0 = max(row_off, math.ceil((origin.y - box.max_y) / resolution - 0.5))
        r1 = min(row_off + height - 1, math.floor((origin.y - box.min_y) / resolution - 0.5))
        if c0 > c1 or r0 > r1:
            continue
        xs = origin.x + (np.arange(c0, c1 + 1) + 0.5) * resolution
        ys = origin.y - (np.arange(r0, r1 + 1) + 0.5) * resolution
        grid_x, grid_y = np.meshgrid(xs, ys)
        inside = shapely.contains_xy(polygon.shape, grid_x, grid_y)
        bits[r0 - row_off : r1 - row_off + 1, c0 - col_off : c1 - col_off + 1] |= inside
    return BinaryMask(
        bits=bits,
        origin=origin,
        resolution_m_per_px=resolution,
        col_off=col_off,
        row_off=row_off,
    )


def _to_polygons(geom) -> list[Polygon]:
    geom = geom.simplify(0)
    parts = geom.geoms if isinstance(geom, ShapelyMultiPolygon) else [geom]
    return [Polygon.from_shapely(part) for part in parts if not part.is_empty]


def polygonize(mask: BinaryMask) -> list[Polygon]:
    """Trace each 4-connected foreground component along pixel edges."""
    labels, n_components = ndimage.label(mask.bits, structure=FOUR_CONNECTED)
    if n_components == 0:
        return []
    res = mask.resolution_m_per_px
    ox, oy = mask.origin.x, mask.origin.y
    polygons = []
    for label, window in enumerate(ndimage.find_objects(labels), start=1):
        component = labels[window] == label
        padded = np.pad(component, ((0, 0), (1, 1))).astype(np.int8)
        edges = np.diff(padded, axis=1)
        starts = np.argwhere(edges == 1)
        ends = np.argwhere(edges == -1)
        row_base = mask.row_off + window[0].start
        col_base = mask.col_off + window[1].start
        boxes = [
            shapely.box(
                ox + (col_base + c_start) * res,
                oy - (row_base + r + 1) * res,
                ox + (col_base + c_end) * res,
                oy - (row_base + r) * res,
            )
            for (r, c_start), (_, c_end) in zip(starts, ends)
        ]
        polygons.extend(_to_polygons(shapely.unary_union(boxes)))
    return polygons


def _polygon_sort_key(p: Polygon) -> tuple:
    return bounding_box(p).as_tuple() + (polygon_area(p),)


def merge_across_tiles(
    per_tile_polys: Sequence[tuple[str, Polygon]], eps_area: float = EPS_AREA
) -> list[Polygon]:
    """Union segments that overlap by positive area; touching segments stay apart.

    Groups are the connected components of the overlap graph, so the result
    does not depend on input order.
    """
    polys = [p for _, p in per_tile_polys]
    index = GridIndex({str(i): bounding_box(p) for i, p in enumerate(polys)})
    graph = nx.Graph()
    graph.add_nodes_from(range(len(polys)))
    for i, p in enumerate(polys):
        for key in index.query(bounding_box(p)):
            j = int(key)
            if j > i and intersection_area(p, polys[j]) > eps_area:
                graph.add_edge(i, j)

    merged: list[Polygon] = []
    for component in nx.connected_components(graph):
        members = sorted(component)
        if len(members) == 1:
            merged.append(polys[members[0]])
            continue
        union = shapely.unary_union([polys[i].shape for i in members])
        merged.extend(_to_polygons(union))

    merged.sort(key=_polygon_sort_key)
    logger.debug(f"Merged {len(polys)} tile segments into {len(merged)} polygons")
    return merged


def filter_small_segments(
    polys: Sequence[Polygon], min_area_m2: float
) -> list[Polygon]:
    return [p for p in polys if polygon_area(p) >= min_area_m2]


def _segment_tile(segmenter: BaseSegmenter, tile: Tile) -> list[tuple[str, Polygon]]:
    try:
        mask = segmenter.segment(tile)
    except SegmenterError:
        raise
    except Exception as e:
        raise SegmenterError(f"{type(e).__name__}: {e}", tile_id=tile.tile_id) from e
    window = tile.pixel_window
    if (mask.width, mask.height) != (window.width, window.height):
        raise SegmenterError(
            f"mask is {mask.width}x{mask.height}, expected {window.width}x{window.height}",
            tile_id=tile.tile_id,
        )
    polygons = polygonize(mask)
    verbose_debug(f"Tile {tile.tile_id}: {len(polygons)} segments")
    return [(tile.tile_id, p) for p in polygons]


async def arun_pipeline(
    extent: Rect,
    segmenter: BaseSegmenter,
    cfg: TileConfig,
    max_async: int = MAX_ASYNC,
) -> FeatureSet:
    """Segment every tile concurrently, then stitch and filter the segments."""
    grid = plan_tiles(extent, cfg)

    async def run_tile(tile: Tile) -> list[tuple[str, Polygon]]:
        return await asyncio.to_thread(_segment_tile, segmenter, tile)

    worker = limit_async_func_call(max(1, max_async))(run_tile)
    per_tile = await asyncio.gather(*(worker(tile) for tile in grid.tiles))
    pieces = [piece for tile_pieces in per_tile for piece in tile_pieces]

    merged = merge_across_tiles(pieces)
    kept = filter_small_segments(merged, cfg.min_segment_area_m2)
    features = tuple(
        Feature(f"pred-{i:05d}", polygon, FeatureSource.PREDICTION)
        for i, polygon in enumerate(kept, start=1)
    )
    logger.info(
        f"Digitized {len(features)} buildings from {len(grid)} tiles "
        f"({len(pieces)} segments, {len(merged) - len(kept)} removed as small) "
        f"at {cfg.resolution_cm_per_px:g} cm/px, {cfg.overlap_percent}% overlap"
    )
    return FeatureSet(features, FeatureSource.PREDICTION, crs_note="planar-meters")


def run_pipeline(
    extent: Rect,
    segmenter: BaseSegmenter,
    cfg: TileConfig,
    max_async: int = MAX_ASYNC,
) -> FeatureSet:
    return run_sync(arun_pipeline(extent, segmenter, cfg, max_async))

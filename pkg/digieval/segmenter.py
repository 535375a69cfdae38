"""
Oracle segmenter: renders a known scene into tile masks and corrupts it with
seeded, world-space noise that every tile sees the same way.
"""

from __future__ import annotations

import math
import threading

import numpy as np

from .base import BaseSegmenter, BinaryMask, FeatureSet, NoiseSpec, Tile
from .geometry import Coordinate, Polygon, Rect, bounding_box, rectangle
from .ingest import feature_set_bounds
from .match import GridIndex
from .tiling import rasterize
from .utils import logger

# gap between injected noise and anything else, in pixels
NOISE_CLEARANCE_PX = 2
PLACEMENT_ATTEMPTS = 200


class OracleSegmenter(BaseSegmenter):
    """Scene rasterizer with omission, split, spurious-blob and shed noise.

    Omitted and split buildings are chosen once per segmenter. Blobs and sheds
    are placed on the pixel grid of the run, so they are generated lazily the
    first time a grid (origin, resolution) is seen and cached afterwards.
    """

    def __init__(
        self,
        scene: FeatureSet,
        noise: NoiseSpec | None = None,
        seed: int | None = None,
        area: Rect | None = None,
    ):
        self.scene = scene
        self.noise = noise or NoiseSpec()
        self.seed = self.noise.seed if seed is None else seed
        self.area = area or feature_set_bounds(scene)

        self._polygons = {f.id: f.geometry for f in scene}
        self._boxes = {f.id: bounding_box(f.geometry) for f in scene}
        self._index = GridIndex(self._boxes)

        rng = np.random.default_rng(self.seed)
        ids = scene.ids()
        n_omit = min(self.noise.n_omit, len(ids))
        if n_omit < self.noise.n_omit:
            logger.warning(f"Only {len(ids)} buildings available, omitting all of them")
        omit_idx = rng.choice(len(ids), size=n_omit, replace=False) if n_omit else []
        self.omitted = frozenset(ids[i] for i in omit_idx)

        remaining = [fid for fid in ids if fid not in self.omitted]
        n_split = min(self.noise.n_split, len(remaining))
        if n_split < self.noise.n_split:
            logger.warning(f"Only {len(remaining)} buildings left to split")
        split_idx = rng.choice(len(remaining), size=n_split, replace=False) if n_split else []
        self.split = frozenset(remaining[i] for i in split_idx)

        self._noise_cache: dict[tuple[float, float, float], list[Polygon]] = {}
        self._lock = threading.Lock()

    def noise_polygons(self, origin: Coordinate, resolution: float) -> list[Polygon]:
        """Pixel-aligned blobs and sheds for the grid anchored at `origin`."""
        key = (origin.x, origin.y, resolution)
        with self._lock:
            if key not in self._noise_cache:
                self._noise_cache[key] = self._place_noise(origin, resolution)
            return self._noise_cache[key]

    def _pixel_rect(
        self, origin: Coordinate, res: float, col: int, row: int, w: int, h: int
    ) -> Rect:
        return Rect(
            origin.x + col * res,
            origin.y - (row + h) * res,
            origin.x + (col + w) * res,
            origin.y - row * res,
        )

    def _is_clear(
        self, rect: Rect, margin: float, placed: list[Rect], ignore: str | None = None
    ) -> bool:
        if self.area is None or not (
            self.area.contains_point(rect.min_x, rect.min_y)
            and self.area.contains_point(rect.max_x, rect.max_y)
        ):
            return False
        grown = rect.expand(margin)
        if any(fid != ignore for fid in self._index.query(grown)):
            return False
        return not any(grown.intersects(other) for other in placed)

    def _place_noise(self, origin: Coordinate, res: float) -> list[Polygon]:
        # a fresh generator per grid keeps placement independent of tile order
        rng = np.random.default_rng([self.seed, 1])
        lo, hi = self.noise.blob_size_px
        margin = NOISE_CLEARANCE_PX * res
        placed: list[Rect] = []

        hosts = [fid for fid in self.scene.ids() if fid not in self.omitted]
        sheds = 0
        for _ in range(self.noise.n_shed * PLACEMENT_ATTEMPTS):
            if sheds == self.noise.n_shed or not hosts:
                break
            host = hosts[int(rng.integers(len(hosts)))]
            box = self._boxes[host]
            w, h = (int(v) for v in rng.integers(lo, hi + 1, size=2))
            col = math.floor((0.5 * (box.min_x + box.max_x) - origin.x) / res) - w // 2
            row = math.floor((origin.y - box.max_y) / res) - NOISE_CLEARANCE_PX - h
            rect = self._pixel_rect(origin, res, col, row, w, h)
            # the host is behind the shed by construction
            if self._is_clear(rect, margin, placed, ignore=host):
                placed.append(rect)
                sheds += 1

        blobs = 0
        if self.area is not None and self.noise.n_spurious:
            col_lo = math.ceil((self.area.min_x - origin.x) / res)
            col_hi = math.floor((self.area.max_x - origin.x) / res)
            row_lo = math.ceil((origin.y - self.area.max_y) / res)
            row_hi = math.floor((origin.y - self.area.min_y) / res)
            for _ in range(self.noise.n_spurious * PLACEMENT_ATTEMPTS):
                if blobs == self.noise.n_spurious:
                    break
                w, h = (int(v) for v in rng.integers(lo, hi + 1, size=2))
                if col_hi - w < col_lo or row_hi - h < row_lo:
                    break
                col = int(rng.integers(col_lo, col_hi - w + 1))
                row = int(rng.integers(row_lo, row_hi - h + 1))
                rect = self._pixel_rect(origin, res, col, row, w, h)
                if self._is_clear(rect, margin, placed):
                    placed.append(rect)
                    blobs += 1

        if sheds < self.noise.n_shed or blobs < self.noise.n_spurious:
            logger.warning(
                f"Placed {blobs}/{self.noise.n_spurious} spurious blobs and "
                f"{sheds}/{self.noise.n_shed} sheds; the scene is too crowded"
            )
        return [rectangle(*r.as_tuple()) for r in placed]

    def segment(self, tile: Tile) -> BinaryMask:
        window = tile.pixel_window
        res = tile.resolution_m_per_px
        origin = tile.grid_origin
        candidates = self._index.query(tile.world_window.expand(res))

        clean = [
            self._polygons[fid]
            for fid in candidates
            if fid not in self.omitted and fid not in self.split
        ]
        noise = [
            p
            for p in self.noise_polygons(origin, res)
            if bounding_box(p).intersects(tile.world_window)
        ]
        mask = rasterize(
            clean + noise,
            origin,
            window.width,
            window.height,
            res,
            window.col_off,
            window.row_off,
        )

        for fid in candidates:
            if fid not in self.split:
                continue
            part = rasterize(
                [self._polygons[fid]],
                origin,
                window.width,
                window.height,
                res,
                window.col_off,
                window.row_off,
            )
            box = self._boxes[fid]
            cut = math.floor((0.5 * (box.min_x + box.max_x) - origin.x) / res)
            local = cut - window.col_off
            if 0 <= local < window.width:
                part.bits[:, local] = False
            mask.bits |= part.bits
        return mask


def oracle_segmenter(
    scene: FeatureSet,
    noise: NoiseSpec | None = None,
    seed: int | None = None,
    area: Rect | None = None,
) -> OracleSegmenter:
    return OracleSegmenter(scene, noise, seed, area)

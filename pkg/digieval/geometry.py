"""
Planar polygon primitives.

All coordinates are meters in a projected plane. Longitude/latitude input is
brought into that plane with spherical Web Mercator on ingest.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Sequence

import shapely
from shapely.geometry import LinearRing
from shapely.geometry import Polygon as ShapelyPolygon
from shapely.geometry.polygon import signed_area

from .exceptions import GeometryError

EARTH_RADIUS_M = 6378137.0
# Latitude at which the spherical Mercator square closes (y == x at lon 180)
MAX_LATITUDE = 85.0511287798066

EPS_AREA = float(os.getenv("EPS_AREA", "1e-6"))
"""Positive-overlap threshold in square meters."""


@dataclass(frozen=True)
class Coordinate:
    x: float
    """Planar easting in meters."""

    y: float
    """Planar northing in meters."""

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise GeometryError(f"non-finite coordinate ({self.x}, {self.y})")


@dataclass(frozen=True)
class Ring:
    """A closed simple ring. Closure is implicit: the first vertex is not repeated."""

    vertices: tuple[Coordinate, ...]
    _ring: LinearRing = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        vertices = self.vertices
        if len(set(vertices)) < 3:
            raise GeometryError(
                f"ring needs at least 3 distinct vertices, got {len(set(vertices))}"
            )
        for i, vertex in enumerate(vertices):
            if vertex == vertices[(i + 1) % len(vertices)]:
                raise GeometryError(f"repeated consecutive vertex ({vertex.x}, {vertex.y})")

        ring = LinearRing([(v.x, v.y) for v in vertices])
        if not ring.is_simple:
            raise GeometryError("self-intersecting ring")
        if signed_area(ring) == 0.0:
            raise GeometryError("zero-area ring")
        object.__setattr__(self, "_ring", ring)

    @classmethod
    def from_coords(cls, coords: Sequence[Sequence[float]]) -> Ring:
        """Build a ring from (x, y) pairs, dropping an explicit closing vertex."""
        points = [Coordinate(float(c[0]), float(c[1])) for c in coords]
        if len(points) > 1 and points[0] == points[-1]:
            points = points[:-1]
        return cls(tuple(points))

    def reversed(self) -> Ring:
        return Ring(tuple(reversed(self.vertices)))

    def coords(self, closed: bool = False) -> list[list[float]]:
        out = [[v.x, v.y] for v in self.vertices]
        if closed:
            out.append(list(out[0]))
        return out


@dataclass(frozen=True)
class Polygon:
    """Outer ring plus optional holes; outer is normalized CCW, holes CW."""

    outer: Ring
    holes: tuple[Ring, ...] = ()
    _shape: ShapelyPolygon = field(init=False, repr=False, compare=False)
    _area: float = field(init=False, repr=False, compare=False)
    _bbox: Rect = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        outer = self.outer
        if ring_area(outer) < 0:
            outer = outer.reversed()
        holes = tuple(h.reversed() if ring_area(h) > 0 else h for h in self.holes)
        object.__setattr__(self, "outer", outer)
        object.__setattr__(self, "holes", holes)

        area = abs(ring_area(outer)) - sum(abs(ring_area(h)) for h in holes)
        if area <= 0:
            raise GeometryError("holes exceed the outer ring area")

        shell = ShapelyPolygon(outer._ring)
        for hole in holes:
            if not shell.covers(ShapelyPolygon(hole._ring)):
                raise GeometryError("hole lies outside the outer ring")
        shape = ShapelyPolygon(outer._ring, [h._ring for h in holes])
        if holes and not shape.is_valid:
            raise GeometryError(shapely.is_valid_reason(shape))
        shapely.prepare(shape)

        object.__setattr__(self, "_shape", shape)
        object.__setattr__(self, "_area", area)
        object.__setattr__(self, "_bbox", Rect(*shape.bounds))

    @classmethod
    def from_coords(
        cls,
        outer: Sequence[Sequence[float]],
        holes: Sequence[Sequence[Sequence[float]]] = (),
        feature_id: str | None = None,
    ) -> Polygon:
        """Build a polygon from coordinate lists, naming `feature_id` on rejection."""
        try:
            return cls(
                Ring.from_coords(outer), tuple(Ring.from_coords(h) for h in holes)
            )
        except GeometryError as e:
            if feature_id is None:
                raise
            raise GeometryError(str(e), feature_id=feature_id) from None

    @classmethod
    def from_shapely(cls, geom: ShapelyPolygon) -> Polygon:
        return cls.from_coords(
            geom.exterior.coords, [interior.coords for interior in geom.interiors]
        )

    @property
    def shape(self) -> ShapelyPolygon:
        return self._shape

    def to_geojson_coords(self) -> list[list[list[float]]]:
        return [self.outer.coords(closed=True)] + [
            h.coords(closed=True) for h in self.holes
        ]


@dataclass(frozen=True)
class Rect:
    min_x: float
    min_y: float
    max_x: float
    max_y: float

    def __post_init__(self):
        values = (self.min_x, self.min_y, self.max_x, self.max_y)
        if not all(math.isfinite(v) for v in values):
            raise GeometryError(f"non-finite rectangle {values}")
        if self.min_x > self.max_x or self.min_y > self.max_y:
            raise GeometryError(f"inverted rectangle {values}")

    @classmethod
    def parse(cls, text: str) -> Rect:
        """Parse 'minx,miny,maxx,maxy'."""
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != 4:
            raise GeometryError(f"expected minx,miny,maxx,maxy, got '{text}'")
        try:
            return cls(*(float(p) for p in parts))
        except ValueError:
            raise GeometryError(f"non-numeric rectangle '{text}'") from None

    @property
    def width(self) -> float:
        return self.max_x - self.min_x

    @property
    def height(self) -> float:
        return self.max_y - self.min_y

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.min_x, self.min_y, self.max_x, self.max_y)

    def intersects(self, other: Rect) -> bool:
        """Closed-interval overlap test (shared edges count)."""
        return (
            self.min_x <= other.max_x
            and other.min_x <= self.max_x
            and self.min_y <= other.max_y
            and other.min_y <= self.max_y
        )

    def contains_point(self, x: float, y: float) -> bool:
        return self.min_x <= x <= self.max_x and self.min_y <= y <= self.max_y

    def union(self, other: Rect) -> Rect:
        return Rect(
            min(self.min_x, other.min_x),
            min(self.min_y, other.min_y),
            max(self.max_x, other.max_x),
            max(self.max_y, other.max_y),
        )

    def expand(self, margin: float) -> Rect:
        return Rect(
            self.min_x - margin,
            self.min_y - margin,
            self.max_x + margin,
            self.max_y + margin,
        )


def ring_area(r: Ring) -> float:
    """Signed shoelace area: positive for counter-clockwise rings."""
    return float(signed_area(r._ring))


def polygon_area(p: Polygon) -> float:
    return p._area


def _canonical_key(p: Polygon) -> tuple:
    return tuple((v.x, v.y) for v in p.outer.vertices) + tuple(
        tuple((v.x, v.y) for v in h.vertices) for h in p.holes
    )


def intersection_area(a: Polygon, b: Polygon) -> float:
    if not bounding_box(a).intersects(bounding_box(b)):
        return 0.0
    # operand order fixed so the result is bitwise commutative
    if _canonical_key(b) < _canonical_key(a):
        a, b = b, a
    area = a.shape.intersection(b.shape).area
    return min(float(area), a._area, b._area)


def iou(a: Polygon, b: Polygon) -> float:
    inter = intersection_area(a, b)
    if inter <= 0.0:
        return 0.0
    union = a._area + b._area - inter
    return min(1.0, inter / union)


def overlaps(a: Polygon, b: Polygon, eps_area: float = EPS_AREA) -> bool:
    return intersection_area(a, b) > eps_area


def bounding_box(p: Polygon) -> Rect:
    return p._bbox


def polygon_centroid(p: Polygon) -> Coordinate:
    c = p.shape.centroid
    return Coordinate(c.x, c.y)


def rectangle(min_x: float, min_y: float, max_x: float, max_y: float) -> Polygon:
    return Polygon.from_coords(
        [(min_x, min_y), (max_x, min_y), (max_x, max_y), (min_x, max_y)]
    )


def project_lonlat(lon: float, lat: float) -> Coordinate:
    """Spherical Web Mercator forward projection to planar meters."""
    if not (math.isfinite(lon) and math.isfinite(lat)):
        raise GeometryError(f"non-finite lon/lat ({lon}, {lat})")
    if not -180.0 <= lon <= 180.0:
        raise GeometryError(f"longitude {lon} outside [-180, 180]")
    if abs(lat) > MAX_LATITUDE:
        raise GeometryError(f"latitude {lat} outside the Mercator range")
    x = EARTH_RADIUS_M * math.radians(lon)
    y = EARTH_RADIUS_M * math.log(math.tan(math.pi / 4 + math.radians(lat) / 2))
    return Coordinate(x, y)


def unproject_xy(x: float, y: float) -> tuple[float, float]:
    """Inverse of project_lonlat; returns (lon, lat) in degrees."""
    lon = math.degrees(x / EARTH_RADIUS_M)
    lat = math.degrees(2 * math.atan(math.exp(y / EARTH_RADIUS_M)) - math.pi / 2)
    return lon, lat

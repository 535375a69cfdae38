"""
Readers and writers for the two feature interchange formats.

GeoJSON carries predictions and ground truth alike; OSM XML carries ground
truth only. Both come out as FeatureSets in the planar meter frame.
"""

from __future__ import annotations

import json
import os
import xml.etree.ElementTree as ET
from typing import Any, Mapping

from .base import Feature, FeatureSet, FeatureSource
from .exceptions import GeometryError, ParseError
from .geometry import (
    Coordinate,
    Polygon,
    Rect,
    bounding_box,
    polygon_centroid,
    project_lonlat,
    unproject_xy,
)
from .namespace import is_namespace
from .utils import logger, read_bytes

PLANAR_NOTES = ("planar", "planar-meters")
LONLAT_NOTE = "EPSG:3857 (spherical mercator, projected from lon/lat)"
OSM_SUFFIXES = (".osm", ".xml")


def _decode(data: bytes | str) -> str:
    if isinstance(data, str):
        return data
    try:
        return data.decode("utf-8-sig")
    except UnicodeDecodeError as e:
        raise ParseError(f"input is not UTF-8: {e.reason} at byte {e.start}") from None


def _ring_coords(
    raw: Any, planar: bool, feature_id: str
) -> list[tuple[float, float]]:
    if not isinstance(raw, list):
        raise GeometryError("ring is not a coordinate array", feature_id=feature_id)
    coords = []
    for position in raw:
        if (
            not isinstance(position, list)
            or len(position) < 2
            or not all(isinstance(v, (int, float)) for v in position[:2])
        ):
            raise GeometryError(
                f"malformed position {position!r}", feature_id=feature_id
            )
        x, y = float(position[0]), float(position[1])
        if not planar:
            try:
                c = project_lonlat(x, y)
            except GeometryError as e:
                raise GeometryError(str(e), feature_id=feature_id) from None
            x, y = c.x, c.y
        coords.append((x, y))
    return coords


def _polygon_from_rings(rings: Any, planar: bool, feature_id: str) -> Polygon:
    if not isinstance(rings, list) or not rings:
        raise GeometryError("polygon has no rings", feature_id=feature_id)
    outer = _ring_coords(rings[0], planar, feature_id)
    holes = [_ring_coords(r, planar, feature_id) for r in rings[1:]]
    return Polygon.from_coords(outer, holes, feature_id=feature_id)


def _feature_id(raw: Mapping[str, Any], properties: Mapping[str, Any], index: int) -> str:
    fid = raw.get("id")
    if fid is None:
        fid = properties.get("id")
    if fid is None:
        return f"feature-{index}"
    return str(fid)


def _tags(properties: Mapping[str, Any]) -> dict[str, str]:
    return {
        str(k): v if isinstance(v, str) else json.dumps(v)
        for k, v in properties.items()
        if k != "id" and v is not None
    }


def _declared_extent(raw: Any, planar: bool) -> Rect | None:
    if raw is None:
        return None
    if (
        not isinstance(raw, list)
        or len(raw) != 4
        or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in raw)
    ):
        raise ParseError(f"'extent' must be [minx, miny, maxx, maxy], got {raw!r}")
    min_x, min_y, max_x, max_y = (float(v) for v in raw)
    if not planar:
        low = project_lonlat(min_x, min_y)
        high = project_lonlat(max_x, max_y)
        min_x, min_y, max_x, max_y = low.x, low.y, high.x, high.y
    try:
        return Rect(min_x, min_y, max_x, max_y)
    except GeometryError as e:
        raise ParseError(f"invalid 'extent': {e}") from None


def is_lonlat(fs: FeatureSet) -> bool:
    """True when the set was projected from longitude/latitude input."""
    return fs.crs_note.lower() not in PLANAR_NOTES


def parse_geojson(
    data: bytes | str, source: FeatureSource | None = None
) -> FeatureSet:
    """Parse a GeoJSON FeatureCollection into a FeatureSet.

    Coordinates are taken as lon/lat and projected to planar meters unless the
    collection carries a top-level `"crs_note": "planar-meters"` member. The
    FeatureSet source comes from `source` when given, otherwise from the
    collection's `source` member, otherwise ground truth. An optional
    top-level `extent` member declares the area to tile.

    MultiPolygon parts become separate features with ids `<id>/<k>`.
    Non-polygonal features are skipped and counted in `FeatureSet.skipped`.
    """
    text = _decode(data)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"malformed GeoJSON: {e.msg}", line=e.lineno, column=e.colno) from None

    if not isinstance(doc, dict) or doc.get("type") != "FeatureCollection":
        raise ParseError("GeoJSON document is not a FeatureCollection")
    raw_features = doc.get("features", [])
    if not isinstance(raw_features, list):
        raise ParseError("FeatureCollection 'features' is not an array")

    crs_note = str(doc.get("crs_note", LONLAT_NOTE))
    planar = crs_note.lower() in PLANAR_NOTES
    extent = _declared_extent(doc.get("extent"), planar)
    if source is None:
        declared = doc.get("source", FeatureSource.GROUND_TRUTH.value)
        try:
            source = FeatureSource(declared)
        except ValueError:
            raise ParseError(f"unknown feature source '{declared}'") from None

    features: list[Feature] = []
    seen: set[str] = set()
    skipped = 0
    for index, raw in enumerate(raw_features):
        if not isinstance(raw, dict) or raw.get("type") != "Feature":
            raise ParseError(f"features[{index}] is not a GeoJSON Feature")
        properties = raw.get("properties") or {}
        if not isinstance(properties, dict):
            raise ParseError(f"features[{index}] has non-object properties")
        fid = _feature_id(raw, properties, index)
        geometry = raw.get("geometry")
        kind = geometry.get("type") if isinstance(geometry, dict) else None

        if kind == "Polygon":
            parts = [(fid, geometry.get("coordinates"))]
        elif kind == "MultiPolygon":
            coordinates = geometry.get("coordinates")
            if not isinstance(coordinates, list):
                raise GeometryError("multipolygon has no parts", feature_id=fid)
            parts = [(f"{fid}/{k}", rings) for k, rings in enumerate(coordinates)]
        else:
            skipped += 1
            logger.debug(f"Skipping feature '{fid}' with geometry type {kind}")
            continue

        tags = _tags(properties)
        for part_id, rings in parts:
            if part_id in seen:
                raise ParseError(f"duplicate feature id '{part_id}'")
            seen.add(part_id)
            polygon = _polygon_from_rings(rings, planar, part_id)
            features.append(Feature(part_id, polygon, source, dict(tags)))

    if skipped:
        logger.warning(f"Skipped {skipped} non-polygonal GeoJSON features")
    logger.info(f"Parsed {len(features)} {source.value} features from GeoJSON")
    return FeatureSet(
        tuple(features),
        source,
        crs_note="planar-meters" if planar else crs_note,
        skipped=skipped,
        extent=extent,
    )


def parse_osm_xml(
    data: bytes | str, source: FeatureSource = FeatureSource.GROUND_TRUTH
) -> FeatureSet:
    """Extract closed `building` ways from an OSM XML document.

    Ways referencing unknown nodes, ways that are not closed and buildings
    whose ring is invalid are skipped with a warning count.
    """
    try:
        if isinstance(data, str):
            data = data.encode("utf-8")
        root = ET.fromstring(data)
    except ET.ParseError as e:
        line, column = e.position
        raise ParseError(f"malformed OSM XML: {e.msg}", line=line, column=column) from None

    nodes: dict[str, Coordinate] = {}
    bad_nodes = 0
    for node in root.iter("node"):
        node_id = node.get("id")
        try:
            lat = float(node.get("lat"))
            lon = float(node.get("lon"))
        except (TypeError, ValueError):
            raise ParseError(f"node {node_id} is missing lat/lon") from None
        if node_id is None:
            raise ParseError("node without id")
        try:
            nodes[node_id] = project_lonlat(lon, lat)
        except GeometryError as e:
            bad_nodes += 1
            logger.warning(f"Dropping node {node_id}: {e}")

    features: list[Feature] = []
    dangling = unclosed = invalid = 0
    for way in root.iter("way"):
        tags = {t.get("k"): t.get("v", "") for t in way.findall("tag") if t.get("k")}
        if tags.get("building", "no") == "no":
            continue
        fid = f"way/{way.get('id')}"
        refs = [nd.get("ref") for nd in way.findall("nd")]
        if len(refs) < 4 or refs[0] != refs[-1]:
            unclosed += 1
            logger.debug(f"Skipping unclosed building {fid}")
            continue
        missing = [r for r in refs if r not in nodes]
        if missing:
            dangling += 1
            logger.warning(f"Skipping {fid}: unresolved node refs {missing[:3]}")
            continue
        coords = [(nodes[r].x, nodes[r].y) for r in refs]
        try:
            polygon = Polygon.from_coords(coords, feature_id=fid)
        except GeometryError as e:
            invalid += 1
            logger.warning(f"Skipping invalid building: {e}")
            continue
        features.append(Feature(fid, polygon, source, tags))

    skipped = dangling + unclosed + invalid
    if skipped:
        logger.warning(
            f"OSM buildings skipped: {dangling} dangling, {unclosed} unclosed, {invalid} invalid"
        )
    logger.info(f"Parsed {len(features)} buildings from OSM XML ({bad_nodes} bad nodes)")
    return FeatureSet(tuple(features), source, crs_note=LONLAT_NOTE, skipped=skipped)


def load_feature_set(path: str, source: FeatureSource) -> FeatureSet:
    """Read a GeoJSON or OSM XML file, picking the parser by file suffix."""
    if not os.path.isfile(path):
        raise FileNotFoundError(f"input file not found: {path}")
    data = read_bytes(path)
    if is_namespace(path.lower(), OSM_SUFFIXES):
        return parse_osm_xml(data, source)
    return parse_geojson(data, source)


def clip_to_boundary(fs: FeatureSet, boundary: Rect) -> FeatureSet:
    """Keep the features whose centroid lies inside `boundary` (edges included)."""
    kept = []
    for feature in fs:
        c = polygon_centroid(feature.geometry)
        if boundary.contains_point(c.x, c.y):
            kept.append(feature)
    logger.info(f"Boundary clip kept {len(kept)}/{len(fs)} {fs.source.value} features")
    return fs.with_features(kept)


def feature_set_bounds(fs: FeatureSet) -> Rect | None:
    bounds = None
    for feature in fs:
        box = bounding_box(feature.geometry)
        bounds = box if bounds is None else bounds.union(box)
    return bounds


def feature_to_geojson(
    feature: Feature,
    extra_properties: Mapping[str, str] | None = None,
    lonlat: bool = False,
) -> dict[str, Any]:
    """GeoJSON Feature in planar meters, or in lon/lat degrees when `lonlat`."""
    properties: dict[str, Any] = dict(feature.tags)
    if extra_properties:
        properties.update(extra_properties)
    rings = feature.geometry.to_geojson_coords()
    if lonlat:
        rings = [[list(unproject_xy(x, y)) for x, y in ring] for ring in rings]
    return {
        "type": "Feature",
        "id": feature.id,
        "properties": properties,
        "geometry": {"type": "Polygon", "coordinates": rings},
    }


def dump_feature_collection(
    features: list[dict[str, Any]],
    source: FeatureSource | None = None,
    crs_note: str | None = "planar-meters",
    extent: Rect | None = None,
) -> str:
    # without a crs_note the collection is plain RFC 7946 lon/lat
    doc: dict[str, Any] = {"type": "FeatureCollection"}
    if crs_note is not None:
        doc["crs_note"] = crs_note
    if source is not None:
        doc["source"] = source.value
    if extent is not None:
        doc["extent"] = list(extent.as_tuple())
    doc["features"] = features
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def emit_geojson(fs: FeatureSet) -> str:
    """Serialize a FeatureSet as planar GeoJSON that parse_geojson reads back unchanged."""
    return dump_feature_collection(
        [feature_to_geojson(f) for f in fs], fs.source, extent=fs.extent
    )

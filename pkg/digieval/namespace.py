from __future__ import annotations

from typing import Iterable


class NameSpace:
    REPORT_JSON = "report.json"
    REPORT_TXT = "report.txt"
    OVERLAYS = "overlays.geojson"

    PREDICTIONS = "predictions.geojson"
    MANIFEST = "manifest.json"

    SCENE_GEOJSON = "scene.geojson"
    SCENE_OSM = "scene.osm"
    SCENE_MANIFEST = "scene_manifest.json"

    STUDY = "study"


def make_namespace(prefix: str, base_namespace: str):
    return prefix + base_namespace


def is_namespace(namespace: str, base_namespace: str | Iterable[str]):
    if isinstance(base_namespace, str):
        return namespace.endswith(base_namespace)
    return any(is_namespace(namespace, ns) for ns in base_namespace)

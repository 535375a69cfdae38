import os
import sys

import numpy as np
import pytest

# make the package importable without installation
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from digieval.base import Feature, FeatureSet, FeatureSource  # noqa: E402
from digieval.geometry import Polygon, rectangle  # noqa: E402


def square(x: float, y: float, size: float = 1.0) -> Polygon:
    return rectangle(x, y, x + size, y + size)


def feature_set(
    polygons: dict[str, Polygon], source: FeatureSource = FeatureSource.GROUND_TRUTH
) -> FeatureSet:
    return FeatureSet(
        tuple(Feature(fid, p, source) for fid, p in polygons.items()), source
    )


def preds(polygons: dict[str, Polygon]) -> FeatureSet:
    return feature_set(polygons, FeatureSource.PREDICTION)


def gts(polygons: dict[str, Polygon]) -> FeatureSet:
    return feature_set(polygons, FeatureSource.GROUND_TRUTH)


def random_squares(
    rng: np.random.Generator, n: int, extent: float, size_range=(1.0, 10.0)
) -> list[Polygon]:
    out = []
    for _ in range(n):
        size = rng.uniform(*size_range)
        x, y = rng.uniform(0, extent, size=2)
        out.append(square(float(x), float(y), float(size)))
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture(autouse=True)
def _isolated_cwd(tmp_path, monkeypatch):
    # keeps stray log files and outputs out of the repository
    monkeypatch.chdir(tmp_path)
    monkeypatch.setenv("LOG_FILE_ENABLED", "false")

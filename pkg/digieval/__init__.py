__version__ = "0.1.0"
__author__ = "digieval contributors"
__url__ = "https://github.com/digieval/digieval"

from .base import (  # noqa: E402
    BaseSegmenter as BaseSegmenter,
    BinaryMask as BinaryMask,
    Counts as Counts,
    CriterionKind as CriterionKind,
    Feature as Feature,
    FeatureSet as FeatureSet,
    FeatureSource as FeatureSource,
    MatchCriterion as MatchCriterion,
    MatchOutcome as MatchOutcome,
    MetricsReport as MetricsReport,
    NoiseSpec as NoiseSpec,
    TileConfig as TileConfig,
)
from .ingest import (  # noqa: E402
    clip_to_boundary as clip_to_boundary,
    emit_geojson as emit_geojson,
    parse_geojson as parse_geojson,
    parse_osm_xml as parse_osm_xml,
)
from .match import (  # noqa: E402
    match_features as match_features,
    tally_counts as tally_counts,
)
from .metrics import evaluate as evaluate  # noqa: E402
from .segmenter import oracle_segmenter as oracle_segmenter  # noqa: E402
from .tiling import plan_tiles as plan_tiles, run_pipeline as run_pipeline  # noqa: E402
from .scene import generate_scene as generate_scene  # noqa: E402

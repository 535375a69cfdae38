"""
Configs for the digieval command line.
"""

from __future__ import annotations

import argparse
import configparser
import os
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Sequence

from dotenv import load_dotenv

from ..base import MatchCriterion, NoiseSpec, TileConfig
from ..exceptions import ConfigError, GeometryError
from ..geometry import EPS_AREA, Rect

# use the .env that is inside the current folder
# the OS environment variables take precedence over the .env file
load_dotenv(dotenv_path=".env", override=False)

CONFIG_SECTION = "run"

# keys accepted in a run configuration file
CONFIG_KEYS = (
    "pred",
    "gt",
    "scene",
    "boundary",
    "extent",
    "extent_margin_m",
    "criterion",
    "resolution_cm_per_px",
    "tile_size_px",
    "overlap_percent",
    "min_segment_area_m2",
    "n_spurious",
    "n_split",
    "n_omit",
    "n_shed",
    "blob_size_px",
    "seed",
    "out",
)

# run keys that fall back to an environment variable before the built-in default
ENV_KEYS = {"tile_size_px": "TILE_SIZE_PX"}

DEFAULT_EXTENT_MARGIN_M = 10.0


class RunMode(str, Enum):
    EVALUATE = "evaluate"
    SIMULATE = "simulate"
    TALLY = "tally"
    SCENE = "scene"
    SWEEP = "sweep"


def get_env_value(env_key: str, default: any, value_type: type = str) -> any:
    """
    Get value from environment variable with type conversion

    Args:
        env_key (str): Environment variable key
        default (any): Default value if env variable is not set
        value_type (type): Type to convert the value to

    Returns:
        any: Converted value from environment or default
    """
    value = os.getenv(env_key)
    if value is None:
        return default

    if value_type is bool:
        return value.lower() in ("true", "1", "yes", "t", "on")
    try:
        return value_type(value)
    except ValueError:
        return default


def load_config_file(path: str) -> dict[str, str]:
    """Read flat `key = value` lines (`#` comments) into a dict."""
    if not os.path.isfile(path):
        raise ConfigError(f"config file not found: {path}")
    with open(path, encoding="utf-8") as f:
        text = f.read()

    parser = configparser.ConfigParser(
        interpolation=None, inline_comment_prefixes=("#",), delimiters=("=",)
    )
    parser.optionxform = str  # keys are case-sensitive
    try:
        parser.read_string(f"[{CONFIG_SECTION}]\n{text}", source=path)
    except configparser.Error as e:
        raise ConfigError(f"{path}: {e.message}") from None

    values = dict(parser.items(CONFIG_SECTION))
    unknown = sorted(set(values) - set(CONFIG_KEYS))
    if unknown:
        raise ConfigError(f"{path}: unknown config keys {', '.join(unknown)}")
    return values


def _convert(key: str, raw: Any, convert: Callable[[str], Any]) -> Any:
    if not isinstance(raw, str):
        return raw
    try:
        return convert(raw.strip())
    except (ValueError, GeometryError) as e:
        raise ConfigError(f"invalid value for {key}: '{raw}' ({e})") from None


def _parse_size_range(text: str) -> tuple[int, int]:
    lo, _, hi = text.partition("-")
    return (int(lo), int(hi or lo))


def _parse_int_list(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def _parse_float_list(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


@dataclass
class RunConfig:
    """Fully resolved settings of one command invocation."""

    mode: RunMode
    out: str | None = None
    pred: str | None = None
    gt: str | None = None
    scene: str | None = None
    boundary: Rect | None = None
    extent: Rect | None = None
    extent_margin_m: float = DEFAULT_EXTENT_MARGIN_M
    criterion: MatchCriterion = field(default_factory=MatchCriterion)
    tile: TileConfig = field(default_factory=TileConfig)
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    seed: int = 0
    overlaps: list[int] = field(default_factory=lambda: [0, 12])
    resolutions: list[float] = field(default_factory=list)
    study_format: str = "csv"

    def __post_init__(self):
        required = {
            RunMode.EVALUATE: ("pred", "gt", "out"),
            RunMode.SIMULATE: ("scene", "out"),
            RunMode.SWEEP: ("scene", "out"),
        }.get(self.mode, ())
        missing = [name for name in required if getattr(self, name) is None]
        if missing:
            raise ConfigError(
                f"{self.mode.value} requires {', '.join('--' + m for m in missing)}"
            )
        if self.extent_margin_m < 0:
            raise ConfigError(f"extent_margin_m must be non-negative, got {self.extent_margin_m}")
        if self.extent is not None and (self.extent.width <= 0 or self.extent.height <= 0):
            raise ConfigError(f"extent {self.extent.as_tuple()} is degenerate")

    def echo(self) -> dict[str, Any]:
        """Parameter snapshot recorded in reports and manifests."""
        snapshot: dict[str, Any] = {
            "criterion": self.criterion.describe(),
            "eps_area": self.criterion.eps_area,
        }
        if self.mode in (RunMode.SIMULATE, RunMode.SWEEP):
            snapshot.update(self.tile.to_dict())
            snapshot.update(self.noise.to_dict())
            snapshot["seed"] = self.seed
        if self.boundary is not None:
            snapshot["boundary"] = list(self.boundary.as_tuple())
        if self.extent is not None:
            snapshot["extent"] = list(self.extent.as_tuple())
        return snapshot


def build_run_config(args: argparse.Namespace) -> RunConfig:
    """Resolve settings with precedence flag > config file > environment > default."""
    mode = RunMode(args.command)
    file_values = load_config_file(args.config) if getattr(args, "config", None) else {}

    def pick(key: str, convert: Callable[[str], Any] = str, default: Any = None) -> Any:
        value = getattr(args, key, None)
        if value is None:
            value = file_values.get(key)
        if value is None and key in ENV_KEYS:
            value = os.getenv(ENV_KEYS[key])
        if value is None:
            return default
        return _convert(key, value, convert)

    seed = pick("seed", int, 0)
    tile = TileConfig(
        resolution_cm_per_px=pick("resolution_cm_per_px", float, 300.0),
        tile_size_px=pick("tile_size_px", int, 512),
        overlap_percent=pick("overlap_percent", int, 0),
        min_segment_area_m2=pick("min_segment_area_m2", float, 0.0),
    )
    noise = NoiseSpec(
        n_spurious=pick("n_spurious", int, 0),
        n_split=pick("n_split", int, 0),
        n_omit=pick("n_omit", int, 0),
        n_shed=pick("n_shed", int, 0),
        blob_size_px=pick("blob_size_px", _parse_size_range, (2, 4)),
        seed=seed,
    )
    eps_area = get_env_value("EPS_AREA", EPS_AREA, float)
    criterion = MatchCriterion.parse(pick("criterion", str, "any-overlap"), eps_area)

    return RunConfig(
        mode=mode,
        out=pick("out"),
        pred=pick("pred"),
        gt=pick("gt"),
        scene=pick("scene"),
        boundary=pick("boundary", Rect.parse),
        extent=pick("extent", Rect.parse),
        extent_margin_m=pick("extent_margin_m", float, DEFAULT_EXTENT_MARGIN_M),
        criterion=criterion,
        tile=tile,
        noise=noise,
        seed=seed,
        overlaps=_convert("overlaps", getattr(args, "overlaps", None) or "0,12", _parse_int_list),
        resolutions=_convert(
            "resolutions",
            getattr(args, "resolutions", None) or str(tile.resolution_cm_per_px),
            _parse_float_list,
        ),
        study_format=getattr(args, "format", None) or "csv",
    )


def _add_run_flags(parser: argparse.ArgumentParser, keys: Sequence[str]) -> None:
    """Flags for run config keys; defaults stay None so the file can fill them in."""
    helps = {
        "pred": "Prediction GeoJSON",
        "gt": "Ground-truth GeoJSON or OSM XML",
        "scene": "Scene GeoJSON or OSM XML to digitize",
        "boundary": "Analysis boundary minx,miny,maxx,maxy (centroid rule)",
        "extent": "Tiled extent minx,miny,maxx,maxy (default: the scene's declared extent, else its bounds + margin)",
        "extent_margin_m": f"Margin around scene bounds (default: {DEFAULT_EXTENT_MARGIN_M})",
        "criterion": "Match criterion: any-overlap | iou:<tau> (default: any-overlap)",
        "resolution_cm_per_px": "Processing resolution in cm/px (default: 300)",
        "tile_size_px": "Tile edge in pixels (default: from env or 512)",
        "overlap_percent": "Integer tile overlap percentage (default: 0)",
        "min_segment_area_m2": "Remove segments smaller than this (default: 0)",
        "n_spurious": "Spurious blobs injected by the oracle segmenter",
        "n_split": "Buildings split by a one-pixel erase line",
        "n_omit": "Buildings omitted from every tile",
        "n_shed": "Outbuildings placed behind main buildings",
        "blob_size_px": "Blob edge range min-max in pixels (default: 2-4)",
        "seed": "Random seed (default: 0)",
        "out": "Output directory",
    }
    for key in keys:
        parser.add_argument(f"--{key.replace('_', '-')}", dest=key, default=None, help=helps[key])


def parse_args(argv: Sequence[str] | None = None) -> argparse.Namespace:
    """
    Parse command line arguments with environment variable fallback

    Args:
        argv: Arguments to parse; defaults to sys.argv[1:]

    Returns:
        argparse.Namespace: Parsed arguments
    """
    parser = argparse.ArgumentParser(
        prog="digieval",
        description="Evaluate building-footprint digitization against ground truth",
    )
    parser.add_argument(
        "--log-level",
        default=get_env_value("LOG_LEVEL", "INFO"),
        choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"],
        help="Logging level (default: from env or INFO)",
    )
    parser.add_argument(
        "--verbose",
        action="store_true",
        default=get_env_value("VERBOSE", False, bool),
        help="Enable verbose debug output (default: from env or false)",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    evaluate = commands.add_parser("evaluate", help="Score predictions against ground truth")
    evaluate.add_argument("--config", help="Run configuration file")
    _add_run_flags(evaluate, ("pred", "gt", "boundary", "criterion", "out"))

    simulate = commands.add_parser("simulate", help="Digitize a scene with the oracle segmenter")
    simulate.add_argument("--config", help="Run configuration file")
    _add_run_flags(
        simulate,
        (
            "scene",
            "extent",
            "extent_margin_m",
            "resolution_cm_per_px",
            "tile_size_px",
            "overlap_percent",
            "min_segment_area_m2",
            "n_spurious",
            "n_split",
            "n_omit",
            "n_shed",
            "blob_size_px",
            "seed",
            "out",
        ),
    )

    tally = commands.add_parser("tally", help="Metrics from the four building totals")
    tally.add_argument("n_gt", type=int)
    tally.add_argument("n_pred", type=int)
    tally.add_argument("n_gt_matched", type=int)
    tally.add_argument("n_pred_matched", type=int)
    tally.add_argument("--json", action="store_true", help="Print report.json instead of the table")

    scene = commands.add_parser("scene", help="Generate a synthetic ground-truth scene")
    scene.add_argument("--buildings", type=int, default=320, help="Number of buildings (default: 320)")
    scene.add_argument("--seed", type=int, default=0, help="Random seed (default: 0)")
    scene.add_argument("--straddle", action="store_true", help="Place buildings on tile seams instead")
    scene.add_argument("--tiles-x", type=int, default=3, help="Straddle scene tile columns (default: 3)")
    scene.add_argument("--tiles-y", type=int, default=1, help="Straddle scene tile rows (default: 1)")
    scene.add_argument(
        "--tile-size-px",
        type=int,
        default=get_env_value("TILE_SIZE_PX", 512, int),
        help="Straddle scene tile edge in pixels (default: from env or 512)",
    )
    scene.add_argument(
        "--resolution-cm-per-px",
        type=float,
        default=300.0,
        help="Straddle scene resolution (default: 300)",
    )
    scene.add_argument("--out", required=True, help="Output directory")

    sweep = commands.add_parser("sweep", help="Run a resolution x overlap parameter study")
    sweep.add_argument("--config", help="Run configuration file")
    sweep.add_argument("--overlaps", help="Comma-separated overlap percentages (default: 0,12)")
    sweep.add_argument("--resolutions", help="Comma-separated cm/px values (default: the configured one)")
    sweep.add_argument(
        "--format",
        choices=["csv", "excel", "md", "txt"],
        default="csv",
        help="Study table format (default: csv)",
    )
    _add_run_flags(
        sweep,
        (
            "scene",
            "gt",
            "extent",
            "extent_margin_m",
            "criterion",
            "tile_size_px",
            "min_segment_area_m2",
            "n_spurious",
            "n_split",
            "n_omit",
            "n_shed",
            "blob_size_px",
            "seed",
            "out",
        ),
    )
    return parser.parse_args(argv)

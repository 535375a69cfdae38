"""
digieval command line: evaluate, simulate, tally, scene and sweep.
"""

from __future__ import annotations

import os
import sys
from dataclasses import replace
from typing import Sequence

from .. import __version__
from ..base import FeatureSet, FeatureSource
from ..exceptions import (
    ConfigError,
    CountsError,
    DigiEvalError,
    GeometryError,
    ParseError,
    UndefinedMetricError,
    UsageError,
)
from ..geometry import Rect
from ..ingest import clip_to_boundary, emit_geojson, feature_set_bounds, load_feature_set
from ..match import match_features, tally_counts
from ..metrics import build_report
from ..namespace import NameSpace, make_namespace
from ..report import dumps_json, render_overlays, render_report_txt, report_document, write_artifacts
from ..scene import emit_osm_xml, generate_scene, generate_straddle_scene
from ..segmenter import oracle_segmenter
from ..study import STUDY_EXTENSIONS, export_study, run_setting, study_frame
from ..tiling import plan_tiles, run_pipeline
from ..types import RunManifest, SceneManifest
from ..utils import logger, set_verbose_debug, setup_logger
from .config import RunConfig, RunMode, build_run_config, get_env_value, parse_args
from .utils_cli import display_outputs, display_report, display_splash_screen

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_INPUT_ERROR = 2
EXIT_UNDEFINED_METRIC = 3

INPUT_ERRORS = (ParseError, GeometryError, ConfigError, CountsError, UsageError, OSError)


def configure_logging(log_level: str, verbose: bool) -> None:
    setup_logger(
        "digieval",
        level=log_level,
        enable_file_logging=get_env_value("LOG_FILE_ENABLED", False, bool),
    )
    set_verbose_debug(verbose)


def resolve_extent(cfg: RunConfig, scene: FeatureSet) -> Rect | None:
    if cfg.extent is not None:
        return cfg.extent
    if scene.extent is not None:
        logger.info(f"Using the extent declared by the scene: {scene.extent.as_tuple()}")
        return scene.extent
    bounds = feature_set_bounds(scene)
    return bounds.expand(cfg.extent_margin_m) if bounds is not None else None


def cmd_evaluate(cfg: RunConfig) -> int:
    pred = load_feature_set(cfg.pred, FeatureSource.PREDICTION)
    gt = load_feature_set(cfg.gt, FeatureSource.GROUND_TRUTH)
    if pred.crs_note != gt.crs_note:
        logger.warning(
            f"Predictions are '{pred.crs_note}', ground truth is '{gt.crs_note}'; "
            "assuming both share one planar frame"
        )
    if cfg.boundary is not None:
        pred = clip_to_boundary(pred, cfg.boundary)
        gt = clip_to_boundary(gt, cfg.boundary)

    display_splash_screen("evaluate", {"Predictions": cfg.pred, "Ground truth": cfg.gt, **cfg.echo()})
    outcome = match_features(pred, gt, cfg.criterion)
    report = build_report(outcome.counts, cfg.echo())

    paths = write_artifacts(
        cfg.out,
        {
            NameSpace.REPORT_JSON: dumps_json(report_document(report)),
            NameSpace.REPORT_TXT: render_report_txt(report),
            NameSpace.OVERLAYS: render_overlays(pred, gt, outcome),
        },
    )
    display_report(report)
    display_outputs(paths)
    return EXIT_OK


def cmd_simulate(cfg: RunConfig) -> int:
    scene = load_feature_set(cfg.scene, FeatureSource.GROUND_TRUTH)
    extent = resolve_extent(cfg, scene)
    parameters = cfg.echo()
    display_splash_screen("simulate", {"Scene": cfg.scene, **parameters})

    if extent is None:
        logger.info("Scene is empty and no extent was given; nothing to digitize")
        predictions = FeatureSet((), FeatureSource.PREDICTION)
        n_tiles = 0
    else:
        parameters["extent"] = list(extent.as_tuple())
        segmenter = oracle_segmenter(scene, cfg.noise, cfg.seed)
        predictions = run_pipeline(extent, segmenter, cfg.tile)
        n_tiles = len(plan_tiles(extent, cfg.tile))

    manifest = RunManifest(
        command=RunMode.SIMULATE.value,
        tool_version=__version__,
        parameters=parameters,
        n_tiles=n_tiles,
        n_buildings=len(predictions),
        outputs=[NameSpace.PREDICTIONS, NameSpace.MANIFEST],
    )
    paths = write_artifacts(
        cfg.out,
        {
            NameSpace.PREDICTIONS: emit_geojson(predictions),
            NameSpace.MANIFEST: dumps_json(manifest.model_dump()),
        },
    )
    display_outputs(paths)
    return EXIT_OK


def cmd_sweep(cfg: RunConfig) -> int:
    scene = load_feature_set(cfg.scene, FeatureSource.GROUND_TRUTH)
    gt = load_feature_set(cfg.gt, FeatureSource.GROUND_TRUTH) if cfg.gt else None
    extent = resolve_extent(cfg, scene)
    if extent is None:
        raise ConfigError("cannot sweep an empty scene without an explicit extent")
    display_splash_screen(
        "sweep",
        {
            "Scene": cfg.scene,
            "Resolutions (cm/px)": cfg.resolutions,
            "Overlaps (%)": cfg.overlaps,
            **cfg.echo(),
        },
    )

    rows = []
    artifacts: dict[str, str] = {}
    for resolution in cfg.resolutions:
        for overlap in cfg.overlaps:
            tile = replace(cfg.tile, resolution_cm_per_px=resolution, overlap_percent=overlap)
            row, predictions = run_setting(
                scene, extent, tile, cfg.noise, cfg.seed, cfg.criterion, gt
            )
            rows.append(row)
            prefix = f"r{resolution:g}_o{overlap}_"
            artifacts[make_namespace(prefix, NameSpace.PREDICTIONS)] = emit_geojson(predictions)

    paths = write_artifacts(cfg.out, artifacts)
    study_path = os.path.join(
        cfg.out, f"{NameSpace.STUDY}.{STUDY_EXTENSIONS[cfg.study_format]}"
    )
    export_study(study_frame(rows), study_path, cfg.study_format)
    display_outputs(paths + [study_path])
    return EXIT_OK


def cmd_tally(n_gt: int, n_pred: int, n_gt_matched: int, n_pred_matched: int, as_json: bool) -> int:
    counts = tally_counts(n_gt, n_pred, n_gt_matched, n_pred_matched)
    report = build_report(counts)
    if as_json:
        sys.stdout.write(dumps_json(report_document(report)))
    else:
        c = counts.to_dict()
        sys.stdout.write(" ".join(f"{k}={v}" for k, v in c.items()) + "\n\n")
        sys.stdout.write(render_report_txt(report))
    return EXIT_OK


def cmd_scene(
    out: str,
    buildings: int,
    seed: int,
    straddle: bool,
    tiles_x: int,
    tiles_y: int,
    tile_size_px: int,
    resolution_cm_per_px: float,
) -> int:
    extent = None
    if straddle:
        scene, extent = generate_straddle_scene(
            tile_size_px, resolution_cm_per_px, tiles_x, tiles_y
        )
    else:
        scene = generate_scene(buildings, seed)
    manifest = SceneManifest(
        tool_version=__version__,
        n_buildings=len(scene),
        seed=None if straddle else seed,
        straddle=straddle,
        extent=list(extent.as_tuple()) if extent is not None else None,
    )
    paths = write_artifacts(
        out,
        {
            NameSpace.SCENE_GEOJSON: emit_geojson(scene),
            NameSpace.SCENE_OSM: emit_osm_xml(scene),
            NameSpace.SCENE_MANIFEST: dumps_json(manifest.model_dump()),
        },
    )
    display_outputs(paths)
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    args = parse_args(argv)
    configure_logging(args.log_level, args.verbose)

    try:
        if args.command == RunMode.TALLY.value:
            return cmd_tally(
                args.n_gt, args.n_pred, args.n_gt_matched, args.n_pred_matched, args.json
            )
        if args.command == RunMode.SCENE.value:
            return cmd_scene(
                args.out,
                args.buildings,
                args.seed,
                args.straddle,
                args.tiles_x,
                args.tiles_y,
                args.tile_size_px,
                args.resolution_cm_per_px,
            )
        cfg = build_run_config(args)
        commands = {
            RunMode.EVALUATE: cmd_evaluate,
            RunMode.SIMULATE: cmd_simulate,
            RunMode.SWEEP: cmd_sweep,
        }
        return commands[cfg.mode](cfg)
    except UndefinedMetricError as e:
        logger.error(f"Undefined metric: {e}")
        return EXIT_UNDEFINED_METRIC
    except INPUT_ERRORS as e:
        logger.error(f"{type(e).__name__}: {e}")
        return EXIT_INPUT_ERROR
    except DigiEvalError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())

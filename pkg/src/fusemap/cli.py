"""Command-line entry points.

Exit codes: 0 success, 2 configuration error, 3 dataset/ingestion error.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .config import PipelineConfig, config_from_dict, load_config
from .dataset import Dataset, write_dataset
from .errors import ConfigError, DatasetError, PlacementError
from .evaluate import TruthObject, categorize, report
from .mapfile import load_map
from .runner import ArtifactMapper
from .scenes import default_calibration, get_scene_preset
from .simulate import generate_scene, run_trajectory

MODES = ("camera", "lidar", "fusion")


def _load_config(path, scene, seed) -> PipelineConfig:
    cfg = load_config(path) if path else config_from_dict(None)
    # Preset-recommended settings apply only where the user left defaults.
    overrides = {}
    if scene:
        overrides["scene"] = scene
    if seed is not None:
        overrides["seed"] = seed
    if cfg.scene and not path:
        preset_overrides = dict(get_scene_preset(overrides.get("scene", cfg.scene)).config_overrides)
        overrides = {**preset_overrides, **overrides}
    raw = {**cfg.to_dict(), **overrides}
    return config_from_dict(raw)


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


@click.group()
def main():
    """Camera-lidar fusion semantic mapping toolkit."""


@main.command()
@click.option("--scene", default=None, help="bundled scene preset name")
@click.option("--seed", type=int, default=None)
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--out", "out_dir", type=click.Path(file_okay=False), required=True)
def simulate(scene, seed, config_path, out_dir):
    """Render a synthetic dataset to a directory."""
    try:
        cfg = _load_config(config_path, scene, seed)
        preset = get_scene_preset(cfg.scene)
    except (ConfigError, KeyError) as exc:
        _fail(2, str(exc))
    calib = default_calibration()
    try:
        scene_obj = generate_scene(preset.spec, seed=cfg.seed)
    except PlacementError as exc:
        _fail(2, f"scene generation failed: {exc}")
    frames = run_trajectory(
        scene_obj, preset.waypoints, cfg.sensors, calib,
        rate=cfg.rate, speed=cfg.speed, seed=cfg.seed, turn_rate=cfg.turn_rate,
    )
    count = write_dataset(out_dir, frames, calib, scene_obj.truth_dicts())
    click.echo(f"wrote {count} frames to {out_dir}")


@main.command(name="map")
@click.option("--dataset", "dataset_path", type=click.Path(exists=True, file_okay=False), required=True)
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--mode", type=click.Choice(MODES), default="fusion")
@click.option("--out", "out_path", type=click.Path(dir_okay=False), required=True)
@click.option("--events", "events_path", type=click.Path(dir_okay=False), default=None,
              help="also write the per-frame event log as JSON lines")
@click.option("--run-id", default=None)
def map_cmd(dataset_path, config_path, mode, out_path, events_path, run_id):
    """Run the mapping pipeline over a recorded dataset."""
    try:
        cfg = _load_config(config_path, None, None)
    except ConfigError as exc:
        _fail(2, str(exc))
    try:
        dataset = Dataset(dataset_path)
        mapper = ArtifactMapper(
            calib=dataset.calib, config=cfg, mode=mode,
            run_id=run_id or f"map-{mode}",
        )
        mapper.fit(dataset)
    except DatasetError as exc:
        _fail(3, str(exc))
    mapper.save(out_path)
    if events_path:
        with open(events_path, "w", encoding="utf-8") as fh:
            for event in mapper.events_:
                fh.write(json.dumps(event) + "\n")
    click.echo(
        f"mapped {mapper.frame_count_} frames -> {len(mapper.map_.artifacts)} artifacts at {out_path}"
    )


@main.command()
@click.option("--map", "map_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--truth", "truth_path", type=click.Path(exists=True, dir_okay=False), required=True,
              help="scene_truth.json from the dataset")
@click.option("--xy-only", is_flag=True, default=False, help="measure position error in XY only")
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None)
def evaluate(map_path, truth_path, xy_only, out_path):
    """Score a map against scene ground truth."""
    try:
        artifact_map = load_map(map_path)
        truth_raw = json.loads(Path(truth_path).read_text(encoding="utf-8"))
        truth = [TruthObject.from_dict(d) for d in truth_raw["objects"]]
    except (OSError, ValueError, KeyError) as exc:
        _fail(3, f"cannot read inputs: {exc}")
    outcomes = categorize(artifact_map, truth, xy_only=xy_only)
    rep = report(outcomes, truth)
    click.echo(rep.to_table())
    if out_path:
        Path(out_path).write_text(rep.to_json(), encoding="utf-8")


def _serve_app(session, port):
    import uvicorn

    console_dir = Path(__file__).resolve().parents[2] / "frontend" / "dist"
    from .service import create_app

    app = create_app(session, console_dir=console_dir if console_dir.is_dir() else None)
    session.start()
    try:
        uvicorn.run(app, host="127.0.0.1", port=port, log_level="warning")
    finally:
        session.stop()


@main.command()
@click.option("--scene", default=None)
@click.option("--seed", type=int, default=None)
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--mode", type=click.Choice(MODES), default="fusion")
@click.option("--port", type=int, default=8750)
@click.option("--speed-factor", type=float, default=2.0, help="simulated seconds per wall second")
@click.option("--map-out", type=click.Path(dir_okay=False), default=None,
              help="default path for the save command")
def serve(scene, seed, config_path, mode, port, speed_factor, map_out):
    """Run the live simulator with the HTTP/WebSocket console API."""
    from .service import LiveSession

    try:
        cfg = _load_config(config_path, scene, seed)
        session = LiveSession(cfg, mode=mode, speed_factor=speed_factor)
    except (ConfigError, KeyError) as exc:
        _fail(2, str(exc))
    except PlacementError as exc:
        _fail(2, f"scene generation failed: {exc}")
    session.map_path = map_out
    click.echo(f"serving live session on http://127.0.0.1:{port}")
    _serve_app(session, port)


@main.command()
@click.option("--dataset", "dataset_path", type=click.Path(exists=True, file_okay=False), required=True)
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--mode", type=click.Choice(MODES), default="fusion")
@click.option("--port", type=int, default=8750)
@click.option("--speed-factor", type=float, default=10.0)
@click.option("--map-out", type=click.Path(dir_okay=False), default=None)
def replay(dataset_path, config_path, mode, port, speed_factor, map_out):
    """Stream a recorded dataset through the console API."""
    from .service import ReplaySession

    try:
        cfg = _load_config(config_path, None, None)
        session = ReplaySession(dataset_path, cfg, mode=mode, speed_factor=speed_factor)
    except ConfigError as exc:
        _fail(2, str(exc))
    except DatasetError as exc:
        _fail(3, str(exc))
    session.map_path = map_out
    click.echo(f"replaying {dataset_path} on http://127.0.0.1:{port}")
    _serve_app(session, port)


if __name__ == "__main__":
    main()

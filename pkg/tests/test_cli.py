"""CLI verbs and exit codes (0 ok, 2 config, 3 ingestion)."""

import json

import pytest
import yaml
from click.testing import CliRunner

from fusemap.cli import main
from fusemap.mapfile import load_map


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    """One simulated dataset shared by the CLI tests (rendering is the slow part)."""
    root = tmp_path_factory.mktemp("cli")
    config = {
        "scene": "office-mini",
        "seed": 1,
        "rate": 2.0,
        "speed": 2.0,
        "turn_rate_deg": 180.0,
        "min_confidence": 0.4,
    }
    cfg_path = root / "config.yaml"
    cfg_path.write_text(yaml.safe_dump(config), encoding="utf-8")
    runner = CliRunner()
    result = runner.invoke(
        main, ["simulate", "--config", str(cfg_path), "--out", str(root / "ds")]
    )
    assert result.exit_code == 0, result.output
    return root, cfg_path


def test_simulate_wrote_layout(workspace):
    root, _ = workspace
    ds = root / "ds"
    assert (ds / "calib.json").exists()
    assert (ds / "scene_truth.json").exists()
    first = ds / "frames" / "000001"
    assert (first / "depth.pgm").exists()
    assert (first / "lidar.csv").exists()
    assert (first / "pose.json").exists()
    assert (first / "masks.json").exists()


def test_map_and_evaluate_round(workspace):
    root, cfg_path = workspace
    runner = CliRunner()
    result = runner.invoke(
        main,
        ["map", "--dataset", str(root / "ds"), "--config", str(cfg_path),
         "--mode", "fusion", "--out", str(root / "map.yaml"),
         "--events", str(root / "events.jsonl")],
    )
    assert result.exit_code == 0, result.output
    artifact_map = load_map(root / "map.yaml")
    assert artifact_map.meta.run_id == "map-fusion"

    events = [json.loads(line) for line in (root / "events.jsonl").read_text().splitlines()]
    assert events[-1]["type"] == "finalized"

    result = runner.invoke(
        main,
        ["evaluate", "--map", str(root / "map.yaml"),
         "--truth", str(root / "ds" / "scene_truth.json"),
         "--out", str(root / "report.json")],
    )
    assert result.exit_code == 0, result.output
    assert "Correct detection" in result.output
    report = json.loads((root / "report.json").read_text())
    assert report["total_objects"] == 20


def test_map_deterministic_bytes(workspace):
    root, cfg_path = workspace
    runner = CliRunner()
    outs = []
    for name in ("a.yaml", "b.yaml"):
        result = runner.invoke(
            main,
            ["map", "--dataset", str(root / "ds"), "--config", str(cfg_path),
             "--out", str(root / name)],
        )
        assert result.exit_code == 0, result.output
        outs.append((root / name).read_bytes())
    assert outs[0] == outs[1]


def test_config_error_exit_code(tmp_path):
    bad = tmp_path / "bad.yaml"
    bad.write_text("fusion: {min_c: 9, acc_c: 4, max_c: 6}\n", encoding="utf-8")
    runner = CliRunner()
    result = runner.invoke(main, ["simulate", "--config", str(bad), "--out", str(tmp_path / "x")])
    assert result.exit_code == 2

    unknown = tmp_path / "unknown.yaml"
    unknown.write_text("nonsense_key: 1\n", encoding="utf-8")
    result = runner.invoke(main, ["map", "--dataset", str(tmp_path), "--config", str(unknown),
                                  "--out", str(tmp_path / "m.yaml")])
    assert result.exit_code == 2


def test_ingestion_error_exit_code(tmp_path):
    empty = tmp_path / "empty"
    empty.mkdir()
    runner = CliRunner()
    result = runner.invoke(main, ["map", "--dataset", str(empty), "--out", str(tmp_path / "m.yaml")])
    assert result.exit_code == 3


def test_unknown_scene_is_config_error(tmp_path):
    runner = CliRunner()
    result = runner.invoke(main, ["simulate", "--scene", "atlantis", "--out", str(tmp_path / "x")])
    assert result.exit_code == 2

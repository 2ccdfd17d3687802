"""Artifact map YAML: schema, byte stability, parse failures."""

import numpy as np
import pytest

from fusemap.errors import MapFormatError
from fusemap.mapfile import (
    ArtifactMap,
    ArtifactRecord,
    MapMeta,
    dumps_map,
    load_map,
    loads_map,
    save_map,
)

META = MapMeta(run_id="run-1", created="1970-01-01T00:01:02.500Z", config_digest="abcdef123456")


def sample_map():
    return ArtifactMap(
        META,
        (
            ArtifactRecord(3, "chair", np.array([1.234567, 4.56, 0.4]), 0.45, 1.570796, 14),
            ArtifactRecord(1, "tv", np.array([-2.0, 0.125, 1.0]), 0.3, -0.5, 7),
            ArtifactRecord(8, "plant", np.array([0.0, 0.0, 0.0]), 0.999999, 3.141593, 2),
        ),
    )


class TestSaveLoad:
    def test_empty_map_round_trip(self, tmp_path):
        m = ArtifactMap(META, ())
        path = tmp_path / "map.yaml"
        save_map(m, path)
        loaded = load_map(path)
        assert loaded.meta == META
        assert loaded.artifacts == ()

    def test_three_artifact_round_trip_field_for_field(self, tmp_path):
        m = sample_map()
        path = tmp_path / "map.yaml"
        save_map(m, path)
        loaded = load_map(path)
        assert loaded.meta == m.meta
        by_id = {a.artifact_id: a for a in m.artifacts}
        assert len(loaded.artifacts) == 3
        for a in loaded.artifacts:
            src = by_id[a.artifact_id]
            assert a.class_label == src.class_label
            assert np.allclose(a.position, src.position, atol=5e-7)
            assert a.radius == pytest.approx(src.radius, abs=5e-7)
            assert a.view_angle == pytest.approx(src.view_angle, abs=5e-7)
            assert a.observations == src.observations

    def test_serialization_is_byte_stable(self):
        text = dumps_map(sample_map())
        again = dumps_map(loads_map(text))
        assert text == again

    def test_artifacts_sorted_by_id(self):
        text = dumps_map(sample_map())
        ids = [int(line.split(":")[1]) for line in text.splitlines() if line.startswith("- id:")]
        assert ids == sorted(ids)

    def test_six_decimal_formatting(self):
        text = dumps_map(sample_map())
        assert "position: {x: 1.234567, y: 4.560000, z: 0.400000}" in text
        assert "radius: 0.450000" in text
        assert "view_angle: 1.570796" in text

    def test_schema_shape_matches_expected_layout(self):
        text = dumps_map(sample_map())
        lines = text.splitlines()
        assert lines[0].startswith("meta: {run_id: run-1, created: ")
        assert lines[1] == "artifacts:"


class TestMalformed:
    def test_truncated_file_rejected(self):
        text = dumps_map(sample_map())
        truncated = text[: len(text) // 2].rsplit("\n", 1)[0]
        with pytest.raises(MapFormatError):
            loads_map(truncated)

    def test_non_mapping_rejected(self):
        with pytest.raises(MapFormatError):
            loads_map("- just\n- a list\n")

    def test_missing_keys_rejected(self):
        with pytest.raises(MapFormatError):
            loads_map("meta: {run_id: x, created: '1970', config_digest: 0}\nartifacts:\n- id: 1\n")

    def test_invalid_yaml_reports_location(self):
        with pytest.raises(MapFormatError) as err:
            loads_map("meta: {run_id: [unclosed\nartifacts: []\n")
        assert "line" in str(err.value)

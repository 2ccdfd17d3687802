"""The stable artifact map and its YAML file format.

The on-disk schema is consumed by the map console as well, so the writer
emits a fixed layout with floats at 6 decimal places; identical maps always
serialize to identical bytes.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml

from .errors import MapFormatError


@dataclass(frozen=True)
class MapMeta:
    run_id: str
    created: str
    config_digest: str


@dataclass(frozen=True)
class ArtifactRecord:
    """One stable artifact as persisted: frozen position, class, footprint."""

    artifact_id: int
    class_label: str
    position: np.ndarray
    radius: float
    view_angle: float
    observations: int

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float))

    def to_dict(self) -> dict:
        return {
            "id": self.artifact_id,
            "class": self.class_label,
            "position": {
                "x": round(float(self.position[0]), 6),
                "y": round(float(self.position[1]), 6),
                "z": round(float(self.position[2]), 6),
            },
            "radius": round(float(self.radius), 6),
            "view_angle": round(float(self.view_angle), 6),
            "observations": int(self.observations),
        }


@dataclass(frozen=True)
class ArtifactMap:
    meta: MapMeta
    artifacts: tuple = ()

    def to_dict(self) -> dict:
        return {
            "meta": {
                "run_id": self.meta.run_id,
                "created": self.meta.created,
                "config_digest": self.meta.config_digest,
            },
            "artifacts": [a.to_dict() for a in sorted(self.artifacts, key=lambda a: a.artifact_id)],
        }


def _fmt(v: float) -> str:
    return f"{float(v):.6f}"


def dumps_map(artifact_map: ArtifactMap) -> str:
    m = artifact_map.meta
    lines = [
        f'meta: {{run_id: {m.run_id}, created: "{m.created}", config_digest: {m.config_digest}}}'
    ]
    artifacts = sorted(artifact_map.artifacts, key=lambda a: a.artifact_id)
    if not artifacts:
        lines.append("artifacts: []")
    else:
        lines.append("artifacts:")
        for a in artifacts:
            p = a.position
            lines.append(f"- id: {int(a.artifact_id)}")
            lines.append(f"  class: {a.class_label}")
            lines.append(
                f"  position: {{x: {_fmt(p[0])}, y: {_fmt(p[1])}, z: {_fmt(p[2])}}}"
            )
            lines.append(f"  radius: {_fmt(a.radius)}")
            lines.append(f"  view_angle: {_fmt(a.view_angle)}")
            lines.append(f"  observations: {int(a.observations)}")
    return "\n".join(lines) + "\n"


def save_map(artifact_map: ArtifactMap, path) -> None:
    Path(path).write_text(dumps_map(artifact_map), encoding="utf-8")


def loads_map(text: str) -> ArtifactMap:
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise MapFormatError(f"not valid YAML: {exc}") from exc
    if not isinstance(data, dict):
        raise MapFormatError("map file must contain a mapping at the top level")
    try:
        meta_raw = data["meta"]
        meta = MapMeta(
            run_id=str(meta_raw["run_id"]),
            created=str(meta_raw["created"]),
            config_digest=str(meta_raw["config_digest"]),
        )
        artifacts_raw = data["artifacts"]
        if artifacts_raw is None:
            artifacts_raw = []
        if not isinstance(artifacts_raw, list):
            raise MapFormatError("artifacts must be a list")
        artifacts = []
        for entry in artifacts_raw:
            pos = entry["position"]
            artifacts.append(
                ArtifactRecord(
                    artifact_id=int(entry["id"]),
                    class_label=str(entry["class"]),
                    position=np.array(
                        [float(pos["x"]), float(pos["y"]), float(pos["z"])]
                    ),
                    radius=float(entry["radius"]),
                    view_angle=float(entry["view_angle"]),
                    observations=int(entry["observations"]),
                )
            )
    except MapFormatError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise MapFormatError(f"map file violates the schema: {exc!r}") from exc
    return ArtifactMap(meta=meta, artifacts=tuple(artifacts))


def load_map(path) -> ArtifactMap:
    return loads_map(Path(path).read_text(encoding="utf-8"))

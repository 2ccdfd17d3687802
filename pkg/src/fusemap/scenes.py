"""Bundled scene presets and the default sensor mounting."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .frames import Calibration, CameraIntrinsics, Extrinsics
from .simulate.scene import OFFICE_TEMPLATES, ObjectTemplate, SceneSpec

# Camera optical frame (x right, y down, z forward) mounted looking along the
# robot's +x axis; columns are the camera axes expressed in the robot frame.
_CAMERA_IN_ROBOT = np.array(
    [
        [0.0, 0.0, 1.0],
        [-1.0, 0.0, 0.0],
        [0.0, -1.0, 0.0],
    ]
)

CAMERA_HEIGHT = 0.3
LIDAR_HEIGHT = 0.45


def default_calibration(width: int = 640, height: int = 480, fov_deg: float = 87.0) -> Calibration:
    f = (width / 2.0) / np.tan(np.deg2rad(fov_deg) / 2.0)
    intr = CameraIntrinsics(
        fx=f, fy=f, px=width / 2.0 - 0.5, py=height / 2.0 - 0.5,
        width=width, height=height,
    )
    robot_from_camera = Extrinsics(_CAMERA_IN_ROBOT, np.array([0.0, 0.0, CAMERA_HEIGHT]))
    robot_from_lidar = Extrinsics(np.eye(3), np.array([0.0, 0.0, LIDAR_HEIGHT]))
    camera_from_lidar = robot_from_camera.inverse().compose(robot_from_lidar)
    return Calibration(
        intrinsics=intr,
        camera_from_lidar=camera_from_lidar,
        robot_from_camera=robot_from_camera,
        robot_from_lidar=robot_from_lidar,
    )


@dataclass(frozen=True)
class ScenePreset:
    name: str
    spec: SceneSpec
    waypoints: tuple
    config_overrides: tuple = ()  # recommended pipeline config (key, value) pairs


def _loop(points) -> tuple:
    pts = [tuple(p) for p in points]
    return tuple(pts + [pts[0]])


# Patrol: perimeter loop with a panoramic scan at each corner, then a
# diagonal to a final scan at the center. Scans pan the camera across every
# pocket so nearby objects get frontal, in-range sightings.
_OFFICE_WAYPOINTS = (
    (-4.0, -4.0),
    (4.0, -4.0, "scan"),
    (4.0, 4.0, "scan"),
    (-4.0, 4.0, "scan"),
    (-4.0, -4.0, "scan"),
    (0.0, 0.0, "scan"),
)

_OFFICE_XY = tuple((w[0], w[1]) for w in _OFFICE_WAYPOINTS)
_OFFICE_SEGMENTS = tuple(
    (_OFFICE_XY[i], _OFFICE_XY[i + 1]) for i in range(len(_OFFICE_XY) - 1)
)
_OFFICE_SCAN_POINTS = tuple((w[0], w[1]) for w in _OFFICE_WAYPOINTS if len(w) > 2)

# Vases sit where the lidar rings straddle them but a scan still pans the
# camera over them in range; plants sit beyond the camera's max range so
# only the lidar covers them.
OFFICE_MINI = ScenePreset(
    name="office-mini",
    spec=SceneSpec(
        arena=(-11.0, 11.0, -11.0, 11.0),
        counts=(
            ("vase", 6),
            ("couch", 5),
            ("plant-small", 2, (4.6, 6.2)),
            ("plant", 2, (6.5, 9.0)),
            ("person", 5),
        ),
        templates=OFFICE_TEMPLATES + (
            ObjectTemplate("plant", "sphere", (0.20,), (0.27,), name="plant-small"),
        ),
        min_gap=0.6,
        keepout_segments=_OFFICE_SEGMENTS,
        keepout_clearance=1.2,
        placement_bands=(
            ("vase", (2.2, 3.8), "anchors"),
            ("couch", (1.2, 8.5)),
            ("person", (1.2, 8.5)),
        ),
        band_anchors=_OFFICE_SCAN_POINTS,
        class_gaps=((("plant", "couch"), 2.0), (("plant", "person"), 1.5), (("plant", "plant"), 3.0)),
        floor=True,
    ),
    waypoints=_OFFICE_WAYPOINTS,
    config_overrides=(("min_confidence", 0.40),),
)

# The bundled evaluation suite: five office-mini layouts.
OFFICE_MINI_SEEDS = (1, 2, 3, 4, 5)

SCENES = {OFFICE_MINI.name: OFFICE_MINI}


def get_scene_preset(name: str) -> ScenePreset:
    try:
        return SCENES[name]
    except KeyError:
        raise KeyError(
            f"unknown scene {name!r}; available: {sorted(SCENES)}"
        ) from None

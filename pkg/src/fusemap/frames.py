"""Camera model, rigid transforms and pixel/point projections.

Conventions: pixel (u, v) = (column, row) with the origin at the image's
top-left corner; camera frame is OpenCV-style (x right, y down, z forward);
depths are meters.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import FrameMismatchError, InvalidDepthError
from .validation import as_point, as_points, check_frame, check_rotation


@dataclass(frozen=True)
class CameraIntrinsics:
    """Pinhole intrinsics: focal lengths and principal point, in pixels."""

    fx: float
    fy: float
    px: float
    py: float
    width: int
    height: int

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise ValueError("focal lengths must be positive")
        if not (0 <= self.px < self.width and 0 <= self.py < self.height):
            raise ValueError("principal point must lie inside the image")

    def matrix(self) -> np.ndarray:
        return np.array(
            [[self.fx, 0.0, self.px], [0.0, self.fy, self.py], [0.0, 0.0, 1.0]]
        )

    def to_dict(self) -> dict:
        return {
            "fx": self.fx,
            "fy": self.fy,
            "px": self.px,
            "py": self.py,
            "width": self.width,
            "height": self.height,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CameraIntrinsics":
        return cls(
            fx=float(d["fx"]),
            fy=float(d["fy"]),
            px=float(d["px"]),
            py=float(d["py"]),
            width=int(d["width"]),
            height=int(d["height"]),
        )


@dataclass(frozen=True)
class Extrinsics:
    """Rigid transform between two sensor frames: p_dst = R @ p_src + t."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "rotation", check_rotation(self.rotation))
        object.__setattr__(self, "translation", as_point(self.translation, "translation"))

    @classmethod
    def identity(cls) -> "Extrinsics":
        return cls(np.eye(3), np.zeros(3))

    def apply(self, points: np.ndarray) -> np.ndarray:
        pts = as_points(points)
        out = pts @ self.rotation.T + self.translation
        return out[0] if np.asarray(points).ndim == 1 else out

    def inverse(self) -> "Extrinsics":
        rt = self.rotation.T
        return Extrinsics(rt, -rt @ self.translation)

    def compose(self, other: "Extrinsics") -> "Extrinsics":
        """self after other: (self.compose(other)).apply(p) == self.apply(other.apply(p))."""
        return Extrinsics(
            self.rotation @ other.rotation,
            self.rotation @ other.translation + self.translation,
        )

    def to_dict(self) -> dict:
        return {
            "rotation": [float(v) for v in self.rotation.reshape(-1)],
            "translation": [float(v) for v in self.translation],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Extrinsics":
        rot = np.asarray(d["rotation"], dtype=float).reshape(3, 3)
        return cls(rot, np.asarray(d["translation"], dtype=float))


@dataclass(frozen=True)
class RobotPose:
    """Robot position and orientation in the map frame (rotation maps robot -> map)."""

    x: float
    y: float
    z: float
    rotation: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "rotation", check_rotation(self.rotation))

    @classmethod
    def from_xyyaw(cls, x: float, y: float, yaw: float, z: float = 0.0) -> "RobotPose":
        c, s = np.cos(yaw), np.sin(yaw)
        return cls(x, y, z, np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]]))

    @property
    def position(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    @property
    def yaw(self) -> float:
        return float(np.arctan2(self.rotation[1, 0], self.rotation[0, 0]))

    def as_extrinsics(self) -> Extrinsics:
        return Extrinsics(self.rotation, self.position)

    def to_dict(self) -> dict:
        return {
            "position": {"x": self.x, "y": self.y, "z": self.z},
            "rotation": [float(v) for v in self.rotation.reshape(-1)],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RobotPose":
        pos = d["position"]
        rot = np.asarray(d["rotation"], dtype=float).reshape(3, 3)
        return cls(float(pos["x"]), float(pos["y"]), float(pos["z"]), rot)


@dataclass(frozen=True)
class Calibration:
    """Sensor chain: camera intrinsics plus the three mounting transforms."""

    intrinsics: CameraIntrinsics
    camera_from_lidar: Extrinsics
    robot_from_camera: Extrinsics
    robot_from_lidar: Extrinsics

    def sensor_to_robot(self, frame: str) -> Extrinsics:
        check_frame(frame, "camera", "lidar", "robot")
        if frame == "camera":
            return self.robot_from_camera
        if frame == "lidar":
            return self.robot_from_lidar
        return Extrinsics.identity()

    def to_dict(self) -> dict:
        return {
            "intrinsics": self.intrinsics.to_dict(),
            "camera_from_lidar": self.camera_from_lidar.to_dict(),
            "robot_from_camera": self.robot_from_camera.to_dict(),
            "robot_from_lidar": self.robot_from_lidar.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Calibration":
        return cls(
            intrinsics=CameraIntrinsics.from_dict(d["intrinsics"]),
            camera_from_lidar=Extrinsics.from_dict(d["camera_from_lidar"]),
            robot_from_camera=Extrinsics.from_dict(d["robot_from_camera"]),
            robot_from_lidar=Extrinsics.from_dict(d["robot_from_lidar"]),
        )


def save_calibration(calib: Calibration, path) -> None:
    Path(path).write_text(json.dumps(calib.to_dict(), indent=2), encoding="utf-8")


def load_calibration(path) -> Calibration:
    return Calibration.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def back_project(u: float, v: float, depth: float, intr: CameraIntrinsics) -> np.ndarray:
    """Lift a pixel plus depth to a camera-frame point.

    Raises InvalidDepthError for depth <= 0 (zero depth marks a missing
    measurement in depth rasters).
    """
    if depth <= 0:
        raise InvalidDepthError(f"depth must be positive, got {depth}")
    x = (u - intr.px) / intr.fx * depth
    y = (v - intr.py) / intr.fy * depth
    return np.array([x, y, depth])


def back_project_pixels(
    us: np.ndarray, vs: np.ndarray, depths: np.ndarray, intr: CameraIntrinsics
) -> np.ndarray:
    """Vectorized back-projection; caller guarantees depths > 0."""
    us = np.asarray(us, dtype=float)
    vs = np.asarray(vs, dtype=float)
    depths = np.asarray(depths, dtype=float)
    x = (us - intr.px) / intr.fx * depths
    y = (vs - intr.py) / intr.fy * depths
    return np.stack([x, y, depths], axis=-1)


def project_to_image(point, extr: Extrinsics, intr: CameraIntrinsics):
    """Project a lidar-frame point onto the image plane.

    Returns (u, v, depth) with depth the camera-frame z, or None when the
    point falls behind the image plane or outside image bounds.
    """
    p_cam = extr.apply(as_point(point))
    z = p_cam[2]
    if z <= 0:
        return None
    u = intr.fx * p_cam[0] / z + intr.px
    v = intr.fy * p_cam[1] / z + intr.py
    if not (0 <= u < intr.width and 0 <= v < intr.height):
        return None
    return float(u), float(v), float(z)


def project_points(points: np.ndarray, extr: Extrinsics, intr: CameraIntrinsics):
    """Vectorized projection of (N, 3) lidar-frame points.

    Returns (uv, depth, valid): uv is (N, 2), depth the camera-frame z,
    valid marks points in front of the camera and inside image bounds.
    """
    pts = as_points(points)
    if len(pts) == 0:
        return np.zeros((0, 2)), np.zeros(0), np.zeros(0, dtype=bool)
    p_cam = pts @ extr.rotation.T + extr.translation
    z = p_cam[:, 2]
    in_front = z > 0
    # Guard the division; out-of-front entries are masked out below.
    safe_z = np.where(in_front, z, 1.0)
    u = intr.fx * p_cam[:, 0] / safe_z + intr.px
    v = intr.fy * p_cam[:, 1] / safe_z + intr.py
    valid = in_front & (u >= 0) & (u < intr.width) & (v >= 0) & (v < intr.height)
    return np.stack([u, v], axis=1), z, valid


def to_map_frame(
    points, frame: str, calib: Calibration, robot_pose: RobotPose
) -> np.ndarray:
    """Express sensor-frame or robot-frame points in the map frame."""
    if frame == "map":
        raise FrameMismatchError("points are already in the map frame")
    robot_from_sensor = calib.sensor_to_robot(frame)
    map_from_robot = robot_pose.as_extrinsics()
    return map_from_robot.apply(robot_from_sensor.apply(points))

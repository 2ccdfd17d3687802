from .scene import (
    ObjectTemplate,
    Scene,
    SceneObject,
    SceneSpec,
    OFFICE_TEMPLATES,
    generate_scene,
)
from .sensors import CameraSensor, Frame, LidarSensor, SensorModel, render_frame
from .trajectory import WaypointDriver, frame_count, pose_at, run_trajectory

__all__ = [
    "ObjectTemplate",
    "Scene",
    "SceneObject",
    "SceneSpec",
    "OFFICE_TEMPLATES",
    "generate_scene",
    "CameraSensor",
    "Frame",
    "LidarSensor",
    "SensorModel",
    "render_frame",
    "WaypointDriver",
    "frame_count",
    "pose_at",
    "run_trajectory",
]

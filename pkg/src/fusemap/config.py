"""Pipeline configuration: strict YAML parsing and the config digest."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
import yaml

from .clouds import CAMERA_FILTER_DEFAULTS, LIDAR_FILTER_DEFAULTS, FilterParams
from .errors import ConfigError
from .fusion import FusionConfig
from .simulate.sensors import CameraSensor, LidarSensor, SensorModel


@dataclass(frozen=True)
class ManagerConfig:
    window: int = 10
    stability_period: float = 0.2
    stability_use_stddev: bool = False

    def __post_init__(self):
        if self.window < 1:
            raise ConfigError("manager.window must be >= 1")
        if self.stability_period <= 0:
            raise ConfigError("manager.stability_period must be positive")

    def to_dict(self) -> dict:
        return {
            "window": self.window,
            "stability_period": self.stability_period,
            "stability_use_stddev": self.stability_use_stddev,
        }


@dataclass(frozen=True)
class PipelineConfig:
    fusion: FusionConfig = FusionConfig()
    camera_filter: FilterParams = CAMERA_FILTER_DEFAULTS
    lidar_filter: FilterParams = LIDAR_FILTER_DEFAULTS
    manager: ManagerConfig = ManagerConfig()
    sensors: SensorModel = SensorModel()
    class_filter: Optional[tuple] = None
    min_confidence: float = 0.0
    scene: str = "office-mini"
    seed: int = 1
    rate: float = 5.0
    speed: float = 1.0
    turn_rate_deg: float = 90.0
    goal_margin: float = 0.5

    @property
    def turn_rate(self) -> float:
        return float(np.deg2rad(self.turn_rate_deg))

    def to_dict(self) -> dict:
        return {
            "fusion": self.fusion.to_dict(),
            "camera_filter": self.camera_filter.to_dict(),
            "lidar_filter": self.lidar_filter.to_dict(),
            "manager": self.manager.to_dict(),
            "sensors": self.sensors.to_dict(),
            "class_filter": None if self.class_filter is None else list(self.class_filter),
            "min_confidence": self.min_confidence,
            "scene": self.scene,
            "seed": self.seed,
            "rate": self.rate,
            "speed": self.speed,
            "turn_rate_deg": self.turn_rate_deg,
            "goal_margin": self.goal_margin,
        }

    def digest(self) -> str:
        canon = json.dumps(self.to_dict(), sort_keys=True)
        return hashlib.sha256(canon.encode("utf-8")).hexdigest()[:12]


def _take(raw: dict, allowed: set, context: str) -> dict:
    unknown = set(raw) - allowed
    if unknown:
        raise ConfigError(f"unknown {context} keys: {sorted(unknown)}")
    return raw


def _filter_params(raw: dict, defaults: FilterParams, context: str) -> FilterParams:
    allowed = {"voxel_leaf", "neighbor_radius", "min_neighbor_fraction", "min_neighbors_floor"}
    _take(raw, allowed, context)
    merged = {**defaults.to_dict(), **raw}
    try:
        return FilterParams(**merged)
    except ValueError as exc:
        raise ConfigError(f"{context}: {exc}") from exc


def _sensors(raw: dict) -> SensorModel:
    _take(raw, {"camera", "lidar", "mask_erosion_px", "label_swap_prob", "pose_noise_xy", "pose_noise_yaw"}, "sensors")
    cam_raw = _take(
        dict(raw.get("camera", {})),
        {"min_range", "acc_range", "max_range", "far_limit", "noise_coeff", "object_bias_share", "frame_share", "dropout"},
        "sensors.camera",
    )
    lid_raw = dict(raw.get("lidar", {}))
    _take(
        lid_raw,
        {"rings", "horizontal_resolution_deg", "vertical_fov_deg", "range_noise", "max_range"},
        "sensors.lidar",
    )
    lid_kwargs = {}
    if "rings" in lid_raw:
        lid_kwargs["rings"] = int(lid_raw["rings"])
    if "horizontal_resolution_deg" in lid_raw:
        lid_kwargs["horizontal_resolution"] = float(np.deg2rad(lid_raw["horizontal_resolution_deg"]))
    if "vertical_fov_deg" in lid_raw:
        lo, hi = lid_raw["vertical_fov_deg"]
        lid_kwargs["vertical_fov"] = (float(np.deg2rad(lo)), float(np.deg2rad(hi)))
    if "range_noise" in lid_raw:
        lid_kwargs["range_noise"] = float(lid_raw["range_noise"])
    if "max_range" in lid_raw:
        lid_kwargs["max_range"] = float(lid_raw["max_range"])
    try:
        return SensorModel(
            camera=CameraSensor(**cam_raw),
            lidar=LidarSensor(**lid_kwargs),
            mask_erosion_px=int(raw.get("mask_erosion_px", 1)),
            label_swap_prob=float(raw.get("label_swap_prob", 0.02)),
            pose_noise_xy=float(raw.get("pose_noise_xy", 0.0)),
            pose_noise_yaw=float(raw.get("pose_noise_yaw", 0.0)),
        )
    except ValueError as exc:
        raise ConfigError(f"sensors: {exc}") from exc


def config_from_dict(raw: Optional[dict]) -> PipelineConfig:
    raw = dict(raw or {})
    allowed = {
        "fusion", "camera_filter", "lidar_filter", "manager", "sensors",
        "class_filter", "min_confidence", "scene", "seed", "rate", "speed",
        "turn_rate_deg", "goal_margin",
    }
    _take(raw, allowed, "top-level")
    try:
        fusion_raw = _take(dict(raw.get("fusion", {})), {"min_c", "acc_c", "max_c"}, "fusion")
        fusion = FusionConfig(**{**FusionConfig().to_dict(), **fusion_raw})
        manager_raw = _take(
            dict(raw.get("manager", {})),
            {"window", "stability_period", "stability_use_stddev"},
            "manager",
        )
        manager = ManagerConfig(**{**ManagerConfig().to_dict(), **manager_raw})
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    class_filter = raw.get("class_filter")
    if class_filter is not None:
        if not isinstance(class_filter, (list, tuple)) or not all(
            isinstance(c, str) for c in class_filter
        ):
            raise ConfigError("class_filter must be a list of class names or null")
        class_filter = tuple(class_filter)
    return PipelineConfig(
        fusion=fusion,
        camera_filter=_filter_params(dict(raw.get("camera_filter", {})), CAMERA_FILTER_DEFAULTS, "camera_filter"),
        lidar_filter=_filter_params(dict(raw.get("lidar_filter", {})), LIDAR_FILTER_DEFAULTS, "lidar_filter"),
        manager=manager,
        sensors=_sensors(dict(raw.get("sensors", {}))),
        class_filter=class_filter,
        min_confidence=float(raw.get("min_confidence", 0.0)),
        scene=str(raw.get("scene", "office-mini")),
        seed=int(raw.get("seed", 1)),
        rate=float(raw.get("rate", 5.0)),
        speed=float(raw.get("speed", 1.0)),
        turn_rate_deg=float(raw.get("turn_rate_deg", 90.0)),
        goal_margin=float(raw.get("goal_margin", 0.5)),
    )


def load_config(path) -> PipelineConfig:
    try:
        raw = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"config is not valid YAML: {exc}") from exc
    if raw is not None and not isinstance(raw, dict):
        raise ConfigError("config must be a YAML mapping")
    return config_from_dict(raw)

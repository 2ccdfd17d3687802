"""The mapping estimator: streams frames through fusion into the manager.

`ArtifactMapper` is fit-shaped: `fit(frames)` (or repeated `partial_fit`)
consumes a frame stream and exposes the learned map as `map_` after
`finalize()`. The run is fully deterministic for a fixed frame stream and
parameter set.
"""

from __future__ import annotations

import datetime
from typing import Callable, Iterable, Optional

from sklearn.base import BaseEstimator

from .config import PipelineConfig
from .frames import Calibration
from .fusion import FrameFuser
from .mapfile import ArtifactMap, MapMeta, save_map
from .manager import ArtifactManager


def _iso_time(seconds: float) -> str:
    base = datetime.datetime(1970, 1, 1, tzinfo=datetime.timezone.utc)
    stamp = base + datetime.timedelta(seconds=round(seconds, 3))
    return stamp.strftime("%Y-%m-%dT%H:%M:%S.%f")[:-3] + "Z"


class ArtifactMapper(BaseEstimator):
    """Online estimator turning a stream of sensor frames into an artifact map.

    Map timestamps come from the simulated clock (the frame timestamps), so
    repeated runs over the same data produce identical output files.
    """

    def __init__(
        self,
        calib: Optional[Calibration] = None,
        config: PipelineConfig = PipelineConfig(),
        mode: str = "fusion",
        run_id: str = "map",
        on_event: Optional[Callable[[dict], None]] = None,
    ):
        self.calib = calib
        self.config = config
        self.mode = mode
        self.run_id = run_id
        self.on_event = on_event

    def _setup(self) -> None:
        if self.calib is None:
            raise ValueError("calib is required before fitting")
        cfg = self.config
        self.fuser_ = FrameFuser(
            calib=self.calib,
            fusion=cfg.fusion,
            camera_filter=cfg.camera_filter,
            lidar_filter=cfg.lidar_filter,
            mode=self.mode,
            class_filter=cfg.class_filter,
            min_confidence=cfg.min_confidence,
        )
        self.manager_ = ArtifactManager(
            window=cfg.manager.window,
            stability_use_stddev=cfg.manager.stability_use_stddev,
        )
        self.events_: list[dict] = []
        self.frame_count_ = 0
        self.last_timestamp_ = 0.0
        self._next_stability = cfg.manager.stability_period

    def _emit(self, event: dict) -> None:
        self.events_.append(event)
        if self.on_event is not None:
            self.on_event(event)

    def partial_fit(self, frame) -> "ArtifactMapper":
        if not hasattr(self, "manager_"):
            self._setup()
        result = self.fuser_.process(frame)

        touched = []
        for estimate in result.estimates:
            artifact_id, what = self.manager_.observe(estimate)
            touched.append(
                {
                    "id": artifact_id,
                    "event": what,
                    "class": estimate.class_label,
                    "position": {
                        "x": float(estimate.position[0]),
                        "y": float(estimate.position[1]),
                        "z": float(estimate.position[2]),
                    },
                    "radius": float(estimate.radius),
                    "view_angle": float(estimate.view_angle),
                    "sources": sorted(estimate.sources),
                }
            )

        promoted: list[int] = []
        period = self.config.manager.stability_period
        while self._next_stability <= frame.timestamp:
            promoted.extend(self.manager_.stabilize_pass())
            self._next_stability += period

        self.frame_count_ += 1
        self.last_timestamp_ = frame.timestamp
        self._emit(
            {
                "type": "frame",
                "index": frame.index,
                "timestamp": frame.timestamp,
                "robot_pose": {
                    "x": frame.robot_pose.x,
                    "y": frame.robot_pose.y,
                    "z": frame.robot_pose.z,
                    "yaw": frame.robot_pose.yaw,
                },
                "detections": touched,
                "promoted": promoted,
                "dropped": [
                    {"class": d.class_label, "reason": d.reason} for d in result.dropped
                ],
            }
        )
        return self

    def fit(self, frames: Iterable, y=None) -> "ArtifactMapper":
        self._setup()
        for frame in frames:
            self.partial_fit(frame)
        self.finalize()
        return self

    def current_meta(self) -> MapMeta:
        return MapMeta(
            run_id=self.run_id,
            created=_iso_time(self.last_timestamp_ if hasattr(self, "last_timestamp_") else 0.0),
            config_digest=self.config.digest(),
        )

    def finalize(self) -> ArtifactMap:
        """Last stabilization sweep, overlap merge, and freeze the map."""
        if not hasattr(self, "manager_"):
            self._setup()
        self.manager_.stabilize_pass()
        self.map_ = self.manager_.finalize(self.current_meta())
        self._emit({"type": "finalized", "artifacts": len(self.map_.artifacts)})
        return self.map_

    def save(self, path) -> None:
        if not hasattr(self, "map_"):
            self.finalize()
        save_map(self.map_, path)


def run_mapping(
    frames: Iterable,
    calib: Calibration,
    config: PipelineConfig,
    mode: str = "fusion",
    run_id: str = "map",
    on_event: Optional[Callable[[dict], None]] = None,
) -> ArtifactMapper:
    """Convenience wrapper: fit a mapper over a frame stream and finalize."""
    mapper = ArtifactMapper(
        calib=calib, config=config, mode=mode, run_id=run_id, on_event=on_event
    )
    mapper.fit(frames)
    return mapper

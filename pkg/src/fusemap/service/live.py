"""Live mapping sessions: simulator or dataset replay feeding the pipeline.

Three activities cooperate: the frame loop (producer + pipeline) runs in a
worker thread on a virtual clock, the API server reads consistent snapshots,
and commands are queued and applied between frames so they land at a defined
point in the event order.
"""

from __future__ import annotations

import queue
import threading
import time
from typing import Optional

from ..config import PipelineConfig
from ..dataset import Dataset
from ..errors import DatasetError
from ..frames import Calibration
from ..goals import GoalCommand, compute_goal
from ..mapfile import dumps_map
from ..runner import ArtifactMapper
from ..scenes import ScenePreset, default_calibration, get_scene_preset
from ..simulate import WaypointDriver, generate_scene, render_frame


class EventHub:
    """Fan-out of pipeline events to any number of subscribers."""

    def __init__(self):
        self._lock = threading.Lock()
        self._subscribers: list[queue.Queue] = []
        self._next_seq = 0

    def publish(self, event: dict) -> None:
        with self._lock:
            event = {"seq": self._next_seq, **event}
            self._next_seq += 1
            for q in self._subscribers:
                q.put(event)

    def subscribe(self) -> queue.Queue:
        q: queue.Queue = queue.Queue()
        with self._lock:
            self._subscribers.append(q)
        return q

    def unsubscribe(self, q: queue.Queue) -> None:
        with self._lock:
            if q in self._subscribers:
                self._subscribers.remove(q)


class _SessionBase:
    """Shared command handling and snapshot surface for live and replay."""

    def __init__(self, config: PipelineConfig, calib: Calibration, mode: str, run_id: str):
        self.config = config
        self.calib = calib
        self.hub = EventHub()
        self.mapper = ArtifactMapper(
            calib=calib, config=config, mode=mode, run_id=run_id,
            on_event=self.hub.publish,
        )
        self.commands: queue.Queue = queue.Queue()
        self.status = "idle"
        self.sim_time = 0.0
        self.frame_index = 0
        self.active_goal: Optional[GoalCommand] = None
        self.map_path: Optional[str] = None
        self._thread: Optional[threading.Thread] = None
        self._stop = threading.Event()
        self._pose = None

    # -- API surface -----------------------------------------------------

    def state(self) -> dict:
        pose = self._pose
        return {
            "status": self.status,
            "sim_time": self.sim_time,
            "frame_index": self.frame_index,
            "robot_pose": None
            if pose is None
            else {"x": pose.x, "y": pose.y, "z": pose.z, "yaw": pose.yaw},
            "goal": None if self.active_goal is None else self.active_goal.to_dict(),
            "class_filter": None
            if self.mapper.fuser_.class_filter is None
            else sorted(self.mapper.fuser_.class_filter),
            "counts": {
                "temporary": self.mapper.manager_.temporary_count,
                "stable": self.mapper.manager_.stable_count,
            },
        }

    def map_snapshot(self) -> dict:
        artifact_map = self.mapper.manager_.finalize(self.mapper.current_meta())
        return artifact_map.to_dict()

    def submit(self, command: dict) -> dict:
        """Validate a command and queue it for the frame loop."""
        action = command.get("action")
        if action == "goto":
            artifact_id = command.get("id")
            record = self._stable_record(artifact_id)
            if record is None:
                return {"ok": False, "error": "not_found"}
            self.commands.put(("goto", artifact_id))
            return {"ok": True, "action": "goto", "id": artifact_id}
        if action == "delete":
            artifact_id = command.get("id")
            if self._stable_record(artifact_id) is None:
                return {"ok": False, "error": "not_found"}
            self.commands.put(("delete", artifact_id))
            return {"ok": True, "action": "delete", "id": artifact_id}
        if action == "set_class_filter":
            classes = command.get("classes")
            if classes is not None and (
                not isinstance(classes, list) or not all(isinstance(c, str) for c in classes)
            ):
                return {"ok": False, "error": "protocol", "detail": "classes must be a list or null"}
            self.commands.put(("set_class_filter", classes))
            return {"ok": True, "action": "set_class_filter"}
        if action == "save":
            self.commands.put(("save", command.get("path")))
            return {"ok": True, "action": "save"}
        return {"ok": False, "error": "protocol", "detail": f"unknown action {action!r}"}

    def _stable_record(self, artifact_id):
        if not isinstance(artifact_id, int):
            return None
        for record in self.mapper.manager_.stable_records():
            if record.artifact_id == artifact_id:
                return record
        return None

    # -- frame loop ------------------------------------------------------

    def start(self) -> None:
        self.mapper._setup()
        self.status = "running"
        self._thread = threading.Thread(target=self._run, daemon=True)
        self._thread.start()

    def stop(self) -> None:
        self._stop.set()
        if self._thread is not None:
            self._thread.join(timeout=10)

    def join(self, timeout: Optional[float] = None) -> None:
        if self._thread is not None:
            self._thread.join(timeout)

    def _apply_commands(self) -> None:
        while True:
            try:
                kind, payload = self.commands.get_nowait()
            except queue.Empty:
                return
            if kind == "goto":
                record = self._stable_record(payload)
                if record is not None and self._pose is not None:
                    goal = compute_goal(
                        record.artifact_id, record.position, record.radius,
                        self._pose, margin=self.config.goal_margin,
                    )
                    self.active_goal = goal
                    self._on_goal(goal)
                    self.hub.publish({"type": "goal", **goal.to_dict()})
            elif kind == "delete":
                if self.mapper.manager_.delete(payload):
                    self.hub.publish({"type": "artifact_deleted", "id": payload})
            elif kind == "set_class_filter":
                self.mapper.fuser_.set_class_filter(payload)
                self.hub.publish(
                    {"type": "class_filter", "classes": None if payload is None else sorted(payload)}
                )
            elif kind == "save":
                path = payload or self.map_path
                if path:
                    artifact_map = self.mapper.manager_.finalize(self.mapper.current_meta())
                    with open(path, "w", encoding="utf-8") as fh:
                        fh.write(dumps_map(artifact_map))
                    self.hub.publish({"type": "map_saved", "path": str(path)})

    def _on_goal(self, goal: GoalCommand) -> None:
        pass

    def _run(self) -> None:
        raise NotImplementedError


class LiveSession(_SessionBase):
    """Virtual-clock simulator loop with a steerable robot.

    speed_factor scales simulated seconds per wall second; tests run fast.
    """

    def __init__(
        self,
        config: PipelineConfig,
        preset: Optional[ScenePreset] = None,
        mode: str = "fusion",
        run_id: str = "live",
        speed_factor: float = 10.0,
        calib: Optional[Calibration] = None,
        max_sim_time: Optional[float] = None,
    ):
        preset = preset or get_scene_preset(config.scene)
        calib = calib or default_calibration()
        super().__init__(config, calib, mode, run_id)
        self.preset = preset
        self.scene = generate_scene(preset.spec, seed=config.seed)
        self.driver = WaypointDriver(
            preset.waypoints, speed=config.speed, turn_rate=config.turn_rate
        )
        self.speed_factor = speed_factor
        self.max_sim_time = max_sim_time
        self.goal_reached: Optional[int] = None

    def truth_dicts(self) -> list:
        return self.scene.truth_dicts()

    def _on_goal(self, goal: GoalCommand) -> None:
        self.driver.retarget(goal.x, goal.y, goal.heading)
        self.goal_reached = None

    def _run(self) -> None:
        dt = 1.0 / self.config.rate
        while not self._stop.is_set():
            if self.max_sim_time is not None and self.sim_time > self.max_sim_time:
                break
            self._apply_commands()
            pose = self.driver.advance(dt)
            self._pose = pose
            frame = render_frame(
                self.scene, pose, self.config.sensors, self.calib,
                seed=[self.config.seed, self.frame_index],
                index=self.frame_index, timestamp=self.sim_time,
            )
            self.mapper.partial_fit(frame)
            if (
                self.active_goal is not None
                and self.driver.idle
                and self.goal_reached != self.active_goal.artifact_id
            ):
                self.goal_reached = self.active_goal.artifact_id
                self.hub.publish(
                    {"type": "goal_reached", "id": self.active_goal.artifact_id}
                )
            self.frame_index += 1
            self.sim_time += dt
            if self.speed_factor > 0:
                time.sleep(dt / self.speed_factor)
        self.status = "finished"
        self.hub.publish({"type": "run_finished", "frames": self.frame_index})


class ReplaySession(_SessionBase):
    """Streams a recorded dataset through the pipeline and the event API.

    Go To is rejected (recorded robots cannot be steered); delete, save and
    class-filter commands work as in live mode.
    """

    def __init__(
        self,
        dataset_path,
        config: PipelineConfig,
        mode: str = "fusion",
        run_id: str = "replay",
        speed_factor: float = 10.0,
    ):
        dataset = Dataset(dataset_path)
        super().__init__(config, dataset.calib, mode, run_id)
        self.dataset = dataset
        self.speed_factor = speed_factor

    def submit(self, command: dict) -> dict:
        if command.get("action") == "goto":
            return {"ok": False, "error": "protocol", "detail": "goto is not available in replay"}
        return super().submit(command)

    def _run(self) -> None:
        try:
            last_t = 0.0
            for frame in self.dataset:
                if self._stop.is_set():
                    break
                self._apply_commands()
                self._pose = frame.robot_pose
                self.mapper.partial_fit(frame)
                self.frame_index = frame.index + 1
                self.sim_time = frame.timestamp
                if self.speed_factor > 0:
                    time.sleep(max(0.0, (frame.timestamp - last_t)) / self.speed_factor)
                last_t = frame.timestamp
        except DatasetError as exc:
            self.status = "error"
            self.hub.publish({"type": "error", "detail": str(exc)})
            return
        self.status = "finished"
        self.hub.publish({"type": "run_finished", "frames": self.frame_index})

"""Waypoint trajectories: dataset generation sweeps and the live driver.

The robot translates at constant speed along straight segments with yaw
facing travel, and turns in place at waypoints at `turn_rate` (matching how
differential-drive robots corner; the sweep also pans the camera across the
surroundings).
"""

from __future__ import annotations

from typing import Iterator, Optional

import numpy as np

from ..frames import Calibration, RobotPose
from .scene import Scene
from .sensors import Frame, SensorModel, render_frame

DEFAULT_TURN_RATE = np.pi / 2  # rad/s


def _wrap_angle(a: float) -> float:
    return float(np.pi - (np.pi - a) % (2.0 * np.pi))


def parse_waypoints(waypoints) -> tuple[np.ndarray, list[bool]]:
    """Split (x, y) / (x, y, "scan") entries into positions and scan flags."""
    pts = []
    scans = []
    for wp in waypoints:
        entry = tuple(wp)
        if len(entry) not in (2, 3):
            raise ValueError("waypoints must be (x, y) or (x, y, 'scan') entries")
        pts.append((float(entry[0]), float(entry[1])))
        scans.append(len(entry) == 3 and entry[2] == "scan")
    if len(pts) < 2:
        raise ValueError("need at least 2 waypoints")
    return np.asarray(pts, dtype=float), scans


def waypoint_positions(waypoints) -> np.ndarray:
    return parse_waypoints(waypoints)[0]


def _timeline(waypoints, speed: float, turn_rate: Optional[float]):
    """Phases of (duration, kind, data): 'move' along a segment, 'turn' in
    place toward the next heading, or a full 'scan' rotation."""
    pts, scans = parse_waypoints(waypoints)
    phases = []
    yaw = 0.0
    have_heading = False

    def add_scan(at, current_yaw):
        if turn_rate is not None:
            phases.append((2.0 * np.pi / turn_rate, "turn", (at, current_yaw, 2.0 * np.pi)))

    if scans[0]:
        # Initial yaw faces the first segment; scan from there.
        d0 = pts[1] - pts[0]
        if np.linalg.norm(d0) > 0:
            yaw = float(np.arctan2(d0[1], d0[0]))
            have_heading = True
        add_scan(pts[0], yaw)
    for i in range(len(pts) - 1):
        a, b = pts[i], pts[i + 1]
        d = b - a
        seg_len = float(np.linalg.norm(d))
        if seg_len > 0.0:
            heading = float(np.arctan2(d[1], d[0]))
            if not have_heading:
                yaw = heading
                have_heading = True
            elif turn_rate is not None and heading != yaw:
                delta = _wrap_angle(heading - yaw)
                if abs(delta) > 1e-12:
                    phases.append((abs(delta) / turn_rate, "turn", (a, yaw, delta)))
                yaw = heading
            phases.append((seg_len / speed, "move", (a, b, heading)))
        if scans[i + 1]:
            add_scan(b, yaw)
    if not phases:
        phases.append((0.0, "hold", (pts[0], yaw)))
    return phases


def pose_at_time(
    waypoints, t: float, speed: float = 1.0, turn_rate: Optional[float] = DEFAULT_TURN_RATE
) -> RobotPose:
    """Pose after `t` seconds of driving the polyline."""
    phases = _timeline(waypoints, speed, turn_rate)
    remaining = max(0.0, float(t))
    for duration, kind, data in phases:
        if remaining > duration:
            remaining -= duration
            continue
        if kind == "move":
            a, b, heading = data
            frac = remaining / duration if duration > 0 else 1.0
            p = a + frac * (b - a)
            return RobotPose.from_xyyaw(float(p[0]), float(p[1]), heading)
        if kind == "turn":
            a, yaw0, delta = data
            frac = remaining / duration if duration > 0 else 1.0
            return RobotPose.from_xyyaw(float(a[0]), float(a[1]), _wrap_angle(yaw0 + frac * delta))
        p, yaw0 = data
        return RobotPose.from_xyyaw(float(p[0]), float(p[1]), yaw0)
    # Past the end: hold the final pose.
    duration, kind, data = phases[-1]
    if kind == "move":
        a, b, heading = data
        return RobotPose.from_xyyaw(float(b[0]), float(b[1]), heading)
    if kind == "turn":
        a, yaw0, delta = data
        return RobotPose.from_xyyaw(float(a[0]), float(a[1]), _wrap_angle(yaw0 + delta))
    p, yaw0 = data
    return RobotPose.from_xyyaw(float(p[0]), float(p[1]), yaw0)


def pose_at(waypoints, distance: float) -> RobotPose:
    """Pose after traveling `distance` along the polyline (no turn phases)."""
    return pose_at_time(waypoints, max(0.0, distance), speed=1.0, turn_rate=None)


def total_duration(waypoints, speed: float, turn_rate: Optional[float] = DEFAULT_TURN_RATE) -> float:
    return float(sum(d for d, _, _ in _timeline(waypoints, speed, turn_rate)))


def frame_count(
    waypoints, rate: float, speed: float, turn_rate: Optional[float] = DEFAULT_TURN_RATE
) -> int:
    duration = total_duration(waypoints, speed, turn_rate)
    return int(np.floor(duration * rate)) + 1


def run_trajectory(
    scene: Scene,
    waypoints,
    sensors: SensorModel,
    calib: Calibration,
    rate: float = 5.0,
    speed: float = 1.0,
    seed: int = 0,
    turn_rate: Optional[float] = DEFAULT_TURN_RATE,
) -> Iterator[Frame]:
    """Drive the polyline, emitting frames at `rate` Hz.

    Each frame's rng is derived from (seed, frame index), so the stream is
    reproducible and individual frames can be re-rendered in isolation.
    """
    n = frame_count(waypoints, rate, speed, turn_rate)
    for i in range(n):
        t = i / rate
        pose = pose_at_time(waypoints, t, speed, turn_rate)
        yield render_frame(
            scene, pose, sensors, calib, seed=[seed, i], index=i, timestamp=t
        )


class WaypointDriver:
    """Incremental waypoint follower for the live loop.

    Follows a queue of waypoints, turning in place before translating and
    honoring scan entries with a full rotation; Go To commands call
    `retarget` to divert toward a goal while mapping continues.
    """

    def __init__(self, waypoints, speed: float = 1.0, turn_rate: float = DEFAULT_TURN_RATE):
        pts, scans = parse_waypoints(waypoints)
        self.position = np.array(pts[0])
        self.queue: list[tuple] = []
        if scans[0]:
            self.queue.append(("scan", 2.0 * np.pi))
        for p, scan in zip(pts[1:], scans[1:]):
            self.queue.append(("move", np.array(p)))
            if scan:
                self.queue.append(("scan", 2.0 * np.pi))
        self.speed = speed
        self.turn_rate = turn_rate
        self.yaw = 0.0
        self.goal_heading: Optional[float] = None
        d = pts[1] - pts[0] if len(pts) > 1 else None
        if d is not None and np.linalg.norm(d) > 1e-9:
            self.yaw = float(np.arctan2(d[1], d[0]))

    def retarget(self, x: float, y: float, heading: Optional[float] = None) -> None:
        self.queue = [("move", np.array([x, y]))]
        self.goal_heading = heading

    @property
    def idle(self) -> bool:
        return not self.queue

    def advance(self, dt: float) -> RobotPose:
        time_left = dt
        while self.queue and time_left > 1e-12:
            kind, payload = self.queue[0]
            if kind == "scan":
                spin = self.turn_rate * time_left
                if spin < payload:
                    self.yaw = _wrap_angle(self.yaw + spin)
                    self.queue[0] = ("scan", payload - spin)
                    time_left = 0.0
                    break
                self.yaw = _wrap_angle(self.yaw + payload)
                time_left -= payload / self.turn_rate
                self.queue.pop(0)
                continue
            target = payload
            delta = target - self.position
            dist = float(np.linalg.norm(delta))
            if dist <= 1e-9:
                self.queue.pop(0)
                continue
            heading = float(np.arctan2(delta[1], delta[0]))
            misalign = _wrap_angle(heading - self.yaw)
            if abs(misalign) > 1e-9:
                turn_time = abs(misalign) / self.turn_rate
                if turn_time >= time_left:
                    self.yaw = _wrap_angle(self.yaw + np.sign(misalign) * self.turn_rate * time_left)
                    time_left = 0.0
                    break
                self.yaw = heading
                time_left -= turn_time
                continue
            step = min(self.speed * time_left, dist)
            self.position = self.position + delta / dist * step
            time_left -= step / self.speed
            if step >= dist - 1e-9:
                self.queue.pop(0)
        if self.idle and self.goal_heading is not None:
            self.yaw = self.goal_heading
        return RobotPose.from_xyyaw(float(self.position[0]), float(self.position[1]), self.yaw)

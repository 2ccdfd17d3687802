"""Standoff goal placement for Go To commands."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .frames import RobotPose


@dataclass(frozen=True)
class GoalCommand:
    artifact_id: int
    x: float
    y: float
    heading: float

    def to_dict(self) -> dict:
        return {
            "artifact_id": self.artifact_id,
            "x": self.x,
            "y": self.y,
            "heading": self.heading,
        }


def compute_goal(
    artifact_id: int,
    artifact_position,
    artifact_radius: float,
    robot_pose: RobotPose,
    margin: float = 0.5,
) -> GoalCommand:
    """Place the goal on the robot-to-artifact segment, `radius + margin`
    short of the centroid, heading facing the artifact.

    A robot already inside that standoff ring stays put and only corrects
    its heading.
    """
    target = np.asarray(artifact_position, dtype=float)[:2]
    robot = np.array([robot_pose.x, robot_pose.y])
    to_target = target - robot
    dist = float(np.linalg.norm(to_target))
    standoff = artifact_radius + margin
    if dist <= standoff or dist == 0.0:
        heading = float(np.arctan2(to_target[1], to_target[0])) if dist > 0 else robot_pose.yaw
        return GoalCommand(artifact_id, float(robot[0]), float(robot[1]), heading)
    direction = to_target / dist
    goal = target - direction * standoff
    heading = float(np.arctan2(direction[1], direction[0]))
    return GoalCommand(artifact_id, float(goal[0]), float(goal[1]), heading)

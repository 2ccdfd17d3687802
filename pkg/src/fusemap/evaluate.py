"""Scoring a produced artifact map against scene ground truth.

An artifact counts as correct when it sits within the real object's radius
with the right label and that object is not already claimed; extra artifacts
on a claimed object are duplications, mislabeled ones near an object are
wrong classifications, and everything else is a wrong localization.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .mapfile import ArtifactMap

CATEGORIES = ("correct", "wrong_localization", "duplication", "wrong_classification")

_TABLE_ROWS = (
    ("Correct detection", "correct"),
    ("Wrong localization", "wrong_localization"),
    ("Duplication", "duplication"),
    ("Wrong classification", "wrong_classification"),
)


@dataclass(frozen=True)
class TruthObject:
    object_id: int
    class_label: str
    center: np.ndarray
    radius: float

    @classmethod
    def from_dict(cls, d: dict) -> "TruthObject":
        c = d["center"]
        return cls(
            object_id=int(d["id"]),
            class_label=str(d["class"]),
            center=np.array([float(c["x"]), float(c["y"]), float(c["z"])]),
            radius=float(d["radius"]),
        )


@dataclass(frozen=True)
class DetectionOutcome:
    category: str
    artifact_id: int
    matched_truth_id: Optional[int]
    distance_error: float


@dataclass(frozen=True)
class Report:
    correct: int
    wrong_localization: int
    duplication: int
    wrong_classification: int
    total_objects: int

    @property
    def total_detections(self) -> int:
        return (
            self.correct
            + self.wrong_localization
            + self.duplication
            + self.wrong_classification
        )

    @property
    def correct_object_rate(self) -> float:
        return self.correct / self.total_objects if self.total_objects else 0.0

    @property
    def correct_detection_rate(self) -> float:
        return self.correct / self.total_detections if self.total_detections else 0.0

    def to_dict(self) -> dict:
        return {
            "counts": {
                "correct": self.correct,
                "wrong_localization": self.wrong_localization,
                "duplication": self.duplication,
                "wrong_classification": self.wrong_classification,
            },
            "total_detections": self.total_detections,
            "total_objects": self.total_objects,
            "correct_object_rate": self.correct_object_rate,
            "correct_detection_rate": self.correct_detection_rate,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_table(self) -> str:
        rows = [(label, getattr(self, attr)) for label, attr in _TABLE_ROWS]
        rows.append(("Total detections", self.total_detections))
        rows.append(("Total objects", self.total_objects))
        width = max(len(label) for label, _ in rows)
        lines = [f"{label:<{width}}  {value:>6}" for label, value in rows]
        lines.append(
            f"{'Correct objects':<{width}}  {self.correct_object_rate * 100:>5.1f}%"
        )
        lines.append(
            f"{'Correct detections':<{width}}  {self.correct_detection_rate * 100:>5.1f}%"
        )
        return "\n".join(lines)


def _distance(a: np.ndarray, b: np.ndarray, xy_only: bool) -> float:
    if xy_only:
        return float(np.hypot(a[0] - b[0], a[1] - b[1]))
    return float(np.linalg.norm(a - b))


def categorize(
    artifact_map: ArtifactMap, truth: list[TruthObject], xy_only: bool = False
) -> list[DetectionOutcome]:
    """Assign each stable artifact exactly one outcome category.

    Candidate (artifact, object) pairs are visited nearest first with id
    tie-breaks, so the result is independent of the artifact list order.
    """
    artifacts = sorted(artifact_map.artifacts, key=lambda a: a.artifact_id)
    dist = {
        (a.artifact_id, t.object_id): _distance(a.position, t.center, xy_only)
        for a in artifacts
        for t in truth
    }

    pairs = [
        (dist[(a.artifact_id, t.object_id)], a.artifact_id, t.object_id)
        for a in artifacts
        for t in truth
        if a.class_label == t.class_label and dist[(a.artifact_id, t.object_id)] < t.radius
    ]
    pairs.sort()
    matched_truth: set[int] = set()
    assigned: dict[int, int] = {}
    for d, artifact_id, truth_id in pairs:
        if truth_id in matched_truth or artifact_id in assigned:
            continue
        matched_truth.add(truth_id)
        assigned[artifact_id] = truth_id

    outcomes = []
    by_id = {t.object_id: t for t in truth}
    for a in artifacts:
        if a.artifact_id in assigned:
            tid = assigned[a.artifact_id]
            outcomes.append(
                DetectionOutcome("correct", a.artifact_id, tid, dist[(a.artifact_id, tid)])
            )
            continue
        same_class_hits = [
            t for t in truth
            if t.class_label == a.class_label and dist[(a.artifact_id, t.object_id)] < t.radius
        ]
        if same_class_hits:
            t = min(same_class_hits, key=lambda t: dist[(a.artifact_id, t.object_id)])
            outcomes.append(
                DetectionOutcome("duplication", a.artifact_id, t.object_id,
                                 dist[(a.artifact_id, t.object_id)])
            )
            continue
        other_hits = [
            t for t in truth if dist[(a.artifact_id, t.object_id)] < t.radius
        ]
        if other_hits:
            t = min(other_hits, key=lambda t: dist[(a.artifact_id, t.object_id)])
            outcomes.append(
                DetectionOutcome("wrong_classification", a.artifact_id, t.object_id,
                                 dist[(a.artifact_id, t.object_id)])
            )
            continue
        nearest = (
            min(dist[(a.artifact_id, t.object_id)] for t in truth) if truth else float("inf")
        )
        outcomes.append(DetectionOutcome("wrong_localization", a.artifact_id, None, nearest))
    return outcomes


def report(outcomes: list[DetectionOutcome], truth: list[TruthObject]) -> Report:
    counts = {c: 0 for c in CATEGORIES}
    for o in outcomes:
        counts[o.category] += 1
    return Report(
        correct=counts["correct"],
        wrong_localization=counts["wrong_localization"],
        duplication=counts["duplication"],
        wrong_classification=counts["wrong_classification"],
        total_objects=len(truth),
    )

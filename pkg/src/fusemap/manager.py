"""Artifact tracking: association, windowed stabilization and the stable map.

Two activities share the buffers at runtime (estimate consumer and
stabilizer); one coarse lock keeps association, window updates and the
temporary-to-stable promotion atomic.
"""

from __future__ import annotations

import math
import threading
from collections import deque
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .errors import ContractViolationError
from .fusion import ArtifactEstimate
from .mapfile import ArtifactMap, ArtifactRecord, MapMeta

DEFAULT_WINDOW = 10


class MovingAverageWindow:
    """Fixed-capacity window over 3D positions with mean and scatter.

    mean is the arithmetic average of the window; variance is the mean
    squared distance of window entries to that average (a scalar, in m^2).
    Oldest entries are evicted once the window is full.
    """

    def __init__(self, capacity: int = DEFAULT_WINDOW):
        if capacity < 1:
            raise ValueError("window capacity must be >= 1")
        self.capacity = capacity
        self._window: deque = deque(maxlen=capacity)
        self.mean = np.zeros(3)
        self.variance = 0.0

    def __len__(self) -> int:
        return len(self._window)

    @property
    def values(self) -> tuple:
        return tuple(np.array(v) for v in self._window)

    def push(self, value) -> None:
        self._window.append(np.asarray(value, dtype=float))
        pts = np.array(self._window)
        self.mean = pts.mean(axis=0)
        self.variance = float(np.sum((pts - self.mean) ** 2) / len(pts))


class ScalarWindow:
    """Same windowed averaging for scalar series (radius estimates)."""

    def __init__(self, capacity: int = DEFAULT_WINDOW):
        self.capacity = capacity
        self._window: deque = deque(maxlen=capacity)
        self.mean = 0.0

    def __len__(self) -> int:
        return len(self._window)

    def push(self, value: float) -> None:
        self._window.append(float(value))
        self.mean = sum(self._window) / len(self._window)


@dataclass
class TrackedArtifact:
    """A buffered artifact under observation, temporary until promoted."""

    artifact_id: int
    class_label: str
    filter: MovingAverageWindow
    radius_window: ScalarWindow
    view_angle: float
    observation_count: int = 0
    state: str = "temporary"
    frozen_position: Optional[np.ndarray] = None

    @property
    def position(self) -> np.ndarray:
        if self.state == "stable":
            return self.frozen_position
        return self.filter.mean

    @property
    def radius_mean(self) -> float:
        return self.radius_window.mean

    def snapshot(self) -> dict:
        pos = self.position
        return {
            "id": self.artifact_id,
            "class": self.class_label,
            "position": {"x": float(pos[0]), "y": float(pos[1]), "z": float(pos[2])},
            "radius": float(self.radius_mean),
            "view_angle": float(self.view_angle),
            "observations": int(self.observation_count),
            "state": self.state,
            "window_fill": len(self.filter),
            "variance": float(self.filter.variance),
        }


def update_filter(artifact: TrackedArtifact, estimate: ArtifactEstimate) -> TrackedArtifact:
    """Push one estimate into the artifact's windows; mutates and returns it."""
    if artifact.class_label != estimate.class_label:
        raise ContractViolationError(
            f"class mismatch: {artifact.class_label!r} vs {estimate.class_label!r}"
        )
    artifact.filter.push(estimate.position)
    artifact.radius_window.push(estimate.radius)
    artifact.view_angle = estimate.view_angle
    artifact.observation_count += 1
    return artifact


def check_stability(
    artifact: TrackedArtifact, use_stddev: bool = False
) -> bool:
    """Stable when the scatter stays under half the radius and the window is half full."""
    if artifact.state != "temporary":
        return False
    spread = math.sqrt(artifact.filter.variance) if use_stddev else artifact.filter.variance
    fill_ok = len(artifact.filter) >= math.ceil(artifact.filter.capacity / 2)
    return spread < artifact.radius_mean / 2.0 and fill_ok


class ArtifactManager:
    """Temporary and stable buffers with thread-safe association and promotion."""

    def __init__(
        self,
        window: int = DEFAULT_WINDOW,
        stability_use_stddev: bool = False,
    ):
        self.window = window
        self.stability_use_stddev = stability_use_stddev
        self._lock = threading.Lock()
        self._temporary: dict[int, TrackedArtifact] = {}
        self._stable: dict[int, TrackedArtifact] = {}
        self._next_id = 1

    def observe(self, estimate: ArtifactEstimate) -> tuple[int, str]:
        """Associate an estimate with the buffers.

        Returns (artifact id, event) where event is "new", "updated" or
        "stable_hit". A stable hit counts the observation but leaves the
        frozen position untouched.
        """
        with self._lock:
            match = self._find_match(estimate)
            if match is None:
                artifact = TrackedArtifact(
                    artifact_id=self._next_id,
                    class_label=estimate.class_label,
                    filter=MovingAverageWindow(self.window),
                    radius_window=ScalarWindow(self.window),
                    view_angle=estimate.view_angle,
                )
                self._next_id += 1
                update_filter(artifact, estimate)
                self._temporary[artifact.artifact_id] = artifact
                return artifact.artifact_id, "new"
            if match.state == "stable":
                match.observation_count += 1
                return match.artifact_id, "stable_hit"
            update_filter(match, estimate)
            return match.artifact_id, "updated"

    def _find_match(self, estimate: ArtifactEstimate) -> Optional[TrackedArtifact]:
        # Same class and closer than the tracked radius; nearest wins,
        # then the lowest id for determinism.
        best = None
        best_key = None
        for artifact in list(self._temporary.values()) + list(self._stable.values()):
            if artifact.class_label != estimate.class_label:
                continue
            dist = float(np.linalg.norm(estimate.position - artifact.position))
            if dist < artifact.radius_mean:
                key = (dist, artifact.artifact_id)
                if best_key is None or key < best_key:
                    best, best_key = artifact, key
        return best

    def promote(self, artifact_id: int) -> bool:
        """Move a temporary artifact to the stable buffer; idempotent."""
        with self._lock:
            return self._promote_locked(artifact_id)

    def _promote_locked(self, artifact_id: int) -> bool:
        if artifact_id in self._stable:
            return False
        artifact = self._temporary.pop(artifact_id, None)
        if artifact is None:
            return False
        artifact.state = "stable"
        artifact.frozen_position = np.array(artifact.filter.mean)
        self._stable[artifact_id] = artifact
        return True

    def stabilize_pass(self) -> list[int]:
        """Promote every temporary artifact that currently checks stable."""
        promoted = []
        with self._lock:
            for artifact_id in list(self._temporary.keys()):
                artifact = self._temporary[artifact_id]
                if check_stability(artifact, self.stability_use_stddev):
                    if self._promote_locked(artifact_id):
                        promoted.append(artifact_id)
        return promoted

    def delete(self, artifact_id: int) -> bool:
        """Remove a stable artifact (user curation)."""
        with self._lock:
            return self._stable.pop(artifact_id, None) is not None

    def snapshot(self) -> dict:
        """Consistent view of both buffers for the service API."""
        with self._lock:
            return {
                "temporary": [a.snapshot() for a in self._temporary.values()],
                "stable": [a.snapshot() for a in self._stable.values()],
            }

    def stable_records(self) -> list[ArtifactRecord]:
        with self._lock:
            return [
                ArtifactRecord(
                    artifact_id=a.artifact_id,
                    class_label=a.class_label,
                    position=np.array(a.position),
                    radius=float(a.radius_mean),
                    view_angle=float(a.view_angle),
                    observations=int(a.observation_count),
                )
                for a in self._stable.values()
            ]

    def finalize(self, meta: MapMeta) -> ArtifactMap:
        """End-of-run map: merge overlapping same-class stable artifacts."""
        return finalize_merge(ArtifactMap(meta=meta, artifacts=tuple(self.stable_records())))

    @property
    def temporary_count(self) -> int:
        with self._lock:
            return len(self._temporary)

    @property
    def stable_count(self) -> int:
        with self._lock:
            return len(self._stable)


def _circles_overlap(a: ArtifactRecord, b: ArtifactRecord) -> bool:
    d = math.hypot(a.position[0] - b.position[0], a.position[1] - b.position[1])
    return d < a.radius + b.radius


def _merge_pair(a: ArtifactRecord, b: ArtifactRecord) -> ArtifactRecord:
    # Observation-count-weighted centroid; radius covers both footprints but
    # is capped so chained merges cannot balloon.
    total = a.observations + b.observations
    position = (a.position * a.observations + b.position * b.observations) / total
    d = math.hypot(a.position[0] - b.position[0], a.position[1] - b.position[1])
    radius = min((d + a.radius + b.radius) / 2.0, 1.5 * max(a.radius, b.radius))
    keep, other = (a, b) if a.artifact_id <= b.artifact_id else (b, a)
    return ArtifactRecord(
        artifact_id=keep.artifact_id,
        class_label=keep.class_label,
        position=position,
        radius=radius,
        view_angle=keep.view_angle,
        observations=total,
    )


def finalize_merge(artifact_map: ArtifactMap) -> ArtifactMap:
    """Merge same-class artifacts whose XY footprint circles intersect.

    Repeats until no overlapping pair remains. Pairs are merged closest
    first with a position-based tie-break, so the result does not depend on
    the input ordering.
    """
    records = list(artifact_map.artifacts)
    while True:
        best = None
        best_key = None
        for i in range(len(records)):
            for j in range(i + 1, len(records)):
                a, b = records[i], records[j]
                if a.class_label != b.class_label or not _circles_overlap(a, b):
                    continue
                d = math.hypot(a.position[0] - b.position[0], a.position[1] - b.position[1])
                key = (d, *sorted((tuple(a.position), tuple(b.position))))
                if best_key is None or key < best_key:
                    best, best_key = (i, j), key
        if best is None:
            break
        i, j = best
        merged = _merge_pair(records[i], records[j])
        records = [r for k, r in enumerate(records) if k not in (i, j)]
        records.append(merged)
    records.sort(key=lambda r: r.artifact_id)
    return replace(artifact_map, artifacts=tuple(records))

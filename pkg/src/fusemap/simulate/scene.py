"""Synthetic scenes: class-labeled primitives placed in a planar arena."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..errors import PlacementError


@dataclass(frozen=True)
class SceneObject:
    """One placed object. dimensions depends on shape:

    sphere   -> (radius,)
    box      -> (dx, dy, dz), axis-aligned
    cylinder -> (radius, height), vertical axis
    center is the solid's 3D centroid; objects rest on the ground plane z=0.
    """

    object_id: int
    class_label: str
    shape: str
    center: np.ndarray
    dimensions: tuple

    def __post_init__(self):
        if self.shape not in ("sphere", "box", "cylinder"):
            raise ValueError(f"unknown shape {self.shape!r}")
        if any(d <= 0 for d in self.dimensions):
            raise ValueError("dimensions must be positive")
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))

    @property
    def footprint_radius(self) -> float:
        """Radius of the smallest XY circle containing the object."""
        if self.shape == "sphere":
            return self.dimensions[0]
        if self.shape == "box":
            return float(np.hypot(self.dimensions[0], self.dimensions[1]) / 2.0)
        return self.dimensions[0]

    @property
    def ground_truth_radius(self) -> float:
        """Circumscribed-sphere radius, the 'found' threshold for scoring."""
        if self.shape == "sphere":
            return self.dimensions[0]
        if self.shape == "box":
            return float(np.linalg.norm(self.dimensions) / 2.0)
        r, h = self.dimensions
        return float(np.hypot(r, h / 2.0))

    def truth_dict(self) -> dict:
        return {
            "id": self.object_id,
            "class": self.class_label,
            "center": {
                "x": float(self.center[0]),
                "y": float(self.center[1]),
                "z": float(self.center[2]),
            },
            "radius": self.ground_truth_radius,
        }


@dataclass(frozen=True)
class ObjectTemplate:
    """Sampling recipe for one object class; name defaults to the class and
    lets several size variants of one class coexist."""

    class_label: str
    shape: str
    dims_low: tuple
    dims_high: tuple
    name: str = ""

    def __post_init__(self):
        if not self.name:
            object.__setattr__(self, "name", self.class_label)


# Squat vases sit between lidar rings at range while staying an easy camera
# target; plants/couches/persons are tall enough to catch several rings.
OFFICE_TEMPLATES = (
    ObjectTemplate("vase", "cylinder", (0.16, 0.10), (0.20, 0.14)),
    ObjectTemplate("couch", "box", (1.6, 0.7, 0.9), (2.0, 0.9, 1.1)),
    ObjectTemplate("plant", "sphere", (0.30,), (0.45,)),
    ObjectTemplate("person", "cylinder", (0.22, 1.60), (0.28, 1.80)),
)


@dataclass(frozen=True)
class SceneSpec:
    """Arena bounds, per-class object counts and placement constraints.

    keepout_segments (a polyline the robot will drive) get a clearance so
    objects never block the path. placement_bands optionally pins a class's
    distance to that polyline, e.g. to keep small objects in the range where
    sensors disagree.
    """

    arena: tuple  # (xmin, xmax, ymin, ymax)
    counts: tuple  # ((class_label, count), ...)
    templates: tuple = OFFICE_TEMPLATES
    min_gap: float = 0.5
    keepout_segments: tuple = ()
    keepout_clearance: float = 1.2
    placement_bands: tuple = ()  # ((class_label, (min_dist, max_dist)), ...)
    band_anchors: tuple = ()  # when set, bands measure to the nearest anchor point
    class_gaps: tuple = ()  # (({class_a, class_b}, extra_gap), ...) beyond min_gap
    floor: bool = False
    max_attempts: int = 400

    def template(self, name: str) -> ObjectTemplate:
        for t in self.templates:
            if t.name == name:
                return t
        raise ValueError(f"no template named {name!r}")

    def band(self, class_label: str) -> Optional[tuple]:
        """(lo, hi, use_anchors) for the class, or None."""
        for entry in self.placement_bands:
            if entry[0] == class_label:
                lo, hi = entry[1]
                use_anchors = len(entry) > 2 and entry[2] == "anchors"
                return lo, hi, use_anchors
        return None


@dataclass(frozen=True)
class Scene:
    objects: tuple
    arena: tuple
    floor: bool = False  # ground plane z=0 over the arena

    @property
    def classes(self) -> tuple:
        return tuple(sorted({o.class_label for o in self.objects}))

    def truth_dicts(self) -> list:
        return [o.truth_dict() for o in self.objects]


def _segment_distance(p: np.ndarray, a: np.ndarray, b: np.ndarray) -> float:
    ab = b - a
    denom = float(ab @ ab)
    if denom == 0.0:
        return float(np.linalg.norm(p - a))
    t = float(np.clip((p - a) @ ab / denom, 0.0, 1.0))
    return float(np.linalg.norm(p - (a + t * ab)))


def _center_for(shape: str, x: float, y: float, dims: tuple) -> np.ndarray:
    if shape == "sphere":
        z = dims[0]
    elif shape == "box":
        z = dims[2] / 2.0
    else:
        z = dims[1] / 2.0
    return np.array([x, y, z])


def generate_scene(spec: SceneSpec, seed) -> Scene:
    """Place the requested objects without overlap, deterministically from seed."""
    rng = np.random.default_rng(seed)
    xmin, xmax, ymin, ymax = spec.arena
    segments = [(np.asarray(a, dtype=float), np.asarray(b, dtype=float)) for a, b in spec.keepout_segments]
    placed: list[SceneObject] = []
    object_id = 1
    for entry in spec.counts:
        template_name, count = entry[0], entry[1]
        template = spec.template(template_name)
        class_label = template.class_label
        if len(entry) > 2:  # per-group band override: (name, count, (lo, hi)[, "anchors"])
            band = (entry[2][0], entry[2][1], len(entry) > 3 and entry[3] == "anchors")
        else:
            band = spec.band(class_label)
        for _ in range(count):
            dims = tuple(
                float(rng.uniform(lo, hi))
                for lo, hi in zip(template.dims_low, template.dims_high)
            )
            probe = SceneObject(object_id, class_label, template.shape, (0, 0, 0), dims)
            footprint = probe.footprint_radius
            anchors = [np.asarray(p, dtype=float) for p in spec.band_anchors]
            for _ in range(spec.max_attempts):
                x = float(rng.uniform(xmin + footprint, xmax - footprint))
                y = float(rng.uniform(ymin + footprint, ymax - footprint))
                xy = np.array([x, y])
                if segments:
                    path_dist = min(_segment_distance(xy, a, b) for a, b in segments)
                    if path_dist < spec.keepout_clearance + footprint:
                        continue
                    if band is not None:
                        lo, hi, use_anchors = band
                        ref = (
                            min(float(np.linalg.norm(xy - p)) for p in anchors)
                            if use_anchors and anchors
                            else path_dist
                        )
                        if not (lo <= ref <= hi):
                            continue
                too_close = False
                for o in placed:
                    gap = spec.min_gap
                    for pair, extra in spec.class_gaps:
                        if {class_label, o.class_label} == set(pair):
                            gap = max(gap, extra)
                    if np.hypot(*(xy - o.center[:2])) < footprint + o.footprint_radius + gap:
                        too_close = True
                        break
                if too_close:
                    continue
                placed.append(
                    SceneObject(object_id, class_label, template.shape,
                                _center_for(template.shape, x, y, dims), dims)
                )
                object_id += 1
                break
            else:
                raise PlacementError(
                    f"could not place object {object_id} ({class_label}) "
                    f"after {spec.max_attempts} attempts"
                )
    return Scene(objects=tuple(placed), arena=spec.arena, floor=spec.floor)

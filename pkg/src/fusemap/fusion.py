"""Distance-gated camera-lidar fusion of per-detection centroids and radii.

The camera gives dense, accurate depth up close; the lidar stays precise far
out. Per detection, each sensor's masked cloud is filtered and reduced to a
centroid, then the two estimates are blended according to where the target
sits relative to the camera's accurate and maximum ranges.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, Optional

import numpy as np

from .clouds import (
    CAMERA_FILTER_DEFAULTS,
    LIDAR_FILTER_DEFAULTS,
    FilterParams,
    PointCloud,
    apply_filters,
    centroid,
    extent_radius,
)
from .errors import ContractViolationError, UndefinedAngleError
from .frames import (
    Calibration,
    CameraIntrinsics,
    Extrinsics,
    RobotPose,
    back_project_pixels,
    project_points,
    to_map_frame,
)

if TYPE_CHECKING:
    from .simulate.sensors import Frame


@dataclass(frozen=True)
class DetectionMask:
    """One instance-segmentation output: class label plus binary pixel mask."""

    class_label: str
    confidence: float
    mask: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.mask, dtype=bool)
        if m.ndim != 2:
            raise ValueError("mask must be a 2D raster")
        if not m.any():
            raise ValueError("mask must contain at least one object pixel")
        if not (0.0 <= self.confidence <= 1.0):
            raise ValueError("confidence must lie in [0, 1]")
        object.__setattr__(self, "mask", m)

    @property
    def pixel_count(self) -> int:
        return int(self.mask.sum())


@dataclass(frozen=True)
class FusionConfig:
    """Camera range gates driving the fusion rule.

    min_c / max_c bound what the depth camera can perceive at all; acc_c is
    the range within which camera depth alone is trusted. Between acc_c and
    max_c the camera and lidar estimates are blended linearly.
    """

    min_c: float = 0.3
    acc_c: float = 4.0
    max_c: float = 6.0

    def __post_init__(self):
        if not (0 < self.min_c < self.acc_c < self.max_c):
            raise ValueError(
                f"ranges must satisfy 0 < min_c < acc_c < max_c, "
                f"got ({self.min_c}, {self.acc_c}, {self.max_c})"
            )

    def to_dict(self) -> dict:
        return {"min_c": self.min_c, "acc_c": self.acc_c, "max_c": self.max_c}


@dataclass(frozen=True)
class ArtifactEstimate:
    """One fused detection: class, map-frame centroid, rough radius, approach angle."""

    class_label: str
    position: np.ndarray
    radius: float
    view_angle: float
    camera_distance: float
    sources: frozenset
    confidence: float = 1.0

    def __post_init__(self):
        if self.radius < 0:
            raise ValueError("radius must be non-negative")
        if not self.sources:
            raise ValueError("estimate needs at least one source sensor")


@dataclass(frozen=True)
class FusionDecision:
    """Outcome of the blending rule, kept for diagnostics and tests."""

    value: Optional[np.ndarray]
    camera_distance: Optional[float]
    camera_weight: Optional[float]
    branch: str


@dataclass(frozen=True)
class DroppedDetection:
    class_label: str
    reason: str


@dataclass(frozen=True)
class FrameEstimates:
    estimates: tuple
    dropped: tuple = ()


def fusion_weight(dist_c: float, cfg: FusionConfig) -> float:
    """Camera weight on the blending segment: 1 at acc_c, 0 at max_c, linear between."""
    if not (cfg.acc_c <= dist_c <= cfg.max_c):
        raise ContractViolationError(
            f"dist_c={dist_c} outside blend range [{cfg.acc_c}, {cfg.max_c}]"
        )
    xi = -(dist_c - cfg.acc_c) / (cfg.max_c - cfg.acc_c) + 1.0
    return float(min(1.0, max(0.0, xi)))


def _fuse(x_c, x_l, cfg: FusionConfig, dist_c: Optional[float]) -> FusionDecision:
    """Shared branch logic for centroid and radius fusion.

    Measures the target's distance from the camera (from the camera estimate
    when present, else from the lidar one) and picks the estimate: discard
    below min_c, camera alone up to acc_c, linear blend up to max_c, lidar
    alone beyond. With a single sensor available, it is used across its whole
    validity region (camera up to max_c, lidar from min_c out).
    """
    if x_c is None and x_l is None:
        return FusionDecision(None, None, None, "no_estimate")
    if dist_c is None:
        ref = x_c if x_c is not None else x_l
        dist_c = float(np.linalg.norm(ref))
    if dist_c < cfg.min_c:
        return FusionDecision(None, dist_c, None, "below_min")
    if x_l is None:
        if dist_c > cfg.max_c:
            return FusionDecision(None, dist_c, None, "beyond_max")
        return FusionDecision(x_c, dist_c, 1.0, "camera")
    if x_c is None:
        return FusionDecision(x_l, dist_c, 0.0, "lidar")
    if dist_c <= cfg.acc_c:
        return FusionDecision(x_c, dist_c, 1.0, "camera")
    if dist_c <= cfg.max_c:
        xi = fusion_weight(dist_c, cfg)
        return FusionDecision(xi * x_c + (1.0 - xi) * x_l, dist_c, xi, "blend")
    return FusionDecision(x_l, dist_c, 0.0, "lidar")


def fuse_centroid(
    x_c: Optional[np.ndarray],
    x_l: Optional[np.ndarray],
    cfg: FusionConfig,
    dist_c: Optional[float] = None,
) -> FusionDecision:
    """Fuse camera/lidar centroids, both expressed in the camera frame.

    dist_c overrides the camera distance (used by tests and by radius fusion,
    which reuses the distance measured on the centroids).
    """
    x_c = None if x_c is None else np.asarray(x_c, dtype=float)
    x_l = None if x_l is None else np.asarray(x_l, dtype=float)
    return _fuse(x_c, x_l, cfg, dist_c)


def fuse_radius(
    rho_c: Optional[float],
    rho_l: Optional[float],
    dist_c: float,
    cfg: FusionConfig,
) -> Optional[float]:
    """Fuse per-sensor radius estimates with the same rule as the centroids."""
    decision = _fuse(rho_c, rho_l, cfg, dist_c)
    return None if decision.value is None else float(decision.value)


def view_angle(artifact_in_robot, robot_pose: RobotPose) -> float:
    """Map-frame approach heading: robot yaw plus the bearing to the artifact.

    Normalized to (-pi, pi]. Undefined when the artifact sits exactly at the
    robot origin.
    """
    p = np.asarray(artifact_in_robot, dtype=float)
    x_r, y_r = float(p[0]), float(p[1])
    if x_r == 0.0 and y_r == 0.0:
        raise UndefinedAngleError("artifact coincides with the robot origin")
    r = robot_pose.rotation
    phi = np.arctan2(r[1, 0], r[0, 0]) + np.arctan2(y_r, x_r)
    return float(np.pi - (np.pi - phi) % (2.0 * np.pi))


def camera_object_cloud(
    depth_m: np.ndarray,
    mask: DetectionMask,
    intr: CameraIntrinsics,
    params: FilterParams,
) -> PointCloud:
    """Back-project the masked depth pixels and filter the resulting cloud.

    depth_m is a (height, width) float raster in meters; zero marks a missing
    measurement and is skipped.
    """
    depth_m = np.asarray(depth_m, dtype=float)
    if depth_m.shape != mask.mask.shape:
        raise ValueError(
            f"depth {depth_m.shape} and mask {mask.mask.shape} dimensions differ"
        )
    valid = mask.mask & (depth_m > 0)
    rows, cols = np.nonzero(valid)
    pts = back_project_pixels(cols.astype(float), rows.astype(float), depth_m[rows, cols], intr)
    return apply_filters(PointCloud(pts, "camera"), params)


def lidar_object_cloud(
    lidar: PointCloud,
    mask: DetectionMask,
    extr: Extrinsics,
    intr: CameraIntrinsics,
    params: FilterParams,
) -> PointCloud:
    """Keep lidar points whose image projection lands on the mask, then filter.

    extr maps the lidar frame into the camera frame. Projections are sampled
    at the nearest pixel; points rounding outside the raster count as missed.
    """
    uv, _, valid = project_points(lidar.points, extr, intr)
    cols = np.rint(uv[:, 0]).astype(int)
    rows = np.rint(uv[:, 1]).astype(int)
    in_raster = valid & (cols >= 0) & (cols < intr.width) & (rows >= 0) & (rows < intr.height)
    hit = np.zeros(len(lidar.points), dtype=bool)
    idx = np.nonzero(in_raster)[0]
    hit[idx] = mask.mask[rows[idx], cols[idx]]
    return apply_filters(PointCloud(lidar.points[hit], "lidar"), params)


class FrameFuser:
    """Turns one frame's masks + depth + lidar into map-frame artifact estimates.

    mode selects the sensors configuration: "camera", "lidar" or "fusion".
    The class allow-list can be swapped at runtime (None allows everything).
    """

    def __init__(
        self,
        calib: Calibration,
        fusion: FusionConfig = FusionConfig(),
        camera_filter: FilterParams = CAMERA_FILTER_DEFAULTS,
        lidar_filter: FilterParams = LIDAR_FILTER_DEFAULTS,
        mode: str = "fusion",
        class_filter: Optional[Iterable[str]] = None,
        min_confidence: float = 0.0,
    ):
        if mode not in ("camera", "lidar", "fusion"):
            raise ValueError(f"unknown mode {mode!r}")
        self.calib = calib
        self.fusion = fusion
        self.camera_filter = camera_filter
        self.lidar_filter = lidar_filter
        self.mode = mode
        self.class_filter = None if class_filter is None else frozenset(class_filter)
        self.min_confidence = min_confidence

    def set_class_filter(self, classes: Optional[Iterable[str]]) -> None:
        self.class_filter = None if classes is None else frozenset(classes)

    def process(self, frame: "Frame") -> FrameEstimates:
        """Estimate one artifact per mask that survives filtering and fusion.

        Never raises for a single bad detection; failures become dropped
        records so the frame as a whole always completes.
        """
        estimates = []
        dropped = []
        depth_m = frame.depth_meters()
        for mask in frame.masks:
            if self.class_filter is not None and mask.class_label not in self.class_filter:
                dropped.append(DroppedDetection(mask.class_label, "class_filtered"))
                continue
            if mask.confidence < self.min_confidence:
                dropped.append(DroppedDetection(mask.class_label, "low_confidence"))
                continue
            try:
                result = self._estimate_one(depth_m, mask, frame)
            except Exception as exc:  # noqa: BLE001 - per-mask isolation is the contract
                dropped.append(DroppedDetection(mask.class_label, f"error: {exc}"))
                continue
            if isinstance(result, DroppedDetection):
                dropped.append(result)
            else:
                estimates.append(result)
        return FrameEstimates(tuple(estimates), tuple(dropped))

    def _estimate_one(self, depth_m, mask: DetectionMask, frame: "Frame"):
        x_c = rho_c = None
        if self.mode in ("camera", "fusion"):
            cam_cloud = camera_object_cloud(depth_m, mask, self.calib.intrinsics, self.camera_filter)
            if len(cam_cloud):
                x_c = centroid(cam_cloud)
                rho_c = extent_radius(cam_cloud)

        x_l_cam = rho_l = None
        if self.mode in ("lidar", "fusion"):
            lid_cloud = lidar_object_cloud(
                frame.lidar_cloud, mask, self.calib.camera_from_lidar,
                self.calib.intrinsics, self.lidar_filter,
            )
            if len(lid_cloud):
                rho_l = extent_radius(lid_cloud)
                x_l_cam = self.calib.camera_from_lidar.apply(centroid(lid_cloud))

        decision = fuse_centroid(x_c, x_l_cam, self.fusion)
        if decision.value is None:
            return DroppedDetection(mask.class_label, decision.branch)
        radius = fuse_radius(rho_c, rho_l, decision.camera_distance, self.fusion)

        position = to_map_frame(decision.value, "camera", self.calib, frame.robot_pose)
        in_robot = self.calib.robot_from_camera.apply(decision.value)
        phi = view_angle(in_robot, frame.robot_pose)

        sources = set()
        if x_c is not None:
            sources.add("camera")
        if x_l_cam is not None:
            sources.add("lidar")
        return ArtifactEstimate(
            class_label=mask.class_label,
            position=position,
            radius=float(radius),
            view_angle=phi,
            camera_distance=float(decision.camera_distance),
            sources=frozenset(sources),
            confidence=mask.confidence,
        )

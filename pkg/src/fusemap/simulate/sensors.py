"""Analytic sensor simulation: per-pixel depth rendering and spinning lidar.

Ray casting is exact against the scene primitives so tests can compare
against closed-form intersections. Noise reproduces the qualitative contrast
between the two sensors: camera depth error grows quadratically with range
(and the camera sees nothing beyond its max range), lidar points get sparser
with range but keep a flat error.
"""

from __future__ import annotations

from dataclasses import dataclass
import numpy as np
from scipy import ndimage

from ..clouds import PointCloud
from ..frames import Calibration, RobotPose
from ..fusion import DetectionMask
from .scene import Scene, SceneObject

_EPS = 1e-9


@dataclass(frozen=True)
class CameraSensor:
    """Depth camera model: range gates, d^2 noise growth, dropout.

    The error splits into three components whose squares sum to one, so the
    marginal std stays noise_coeff * d^2: a per-object offset (stereo
    matching on a given surface reproduces the same wrong disparity), a
    frame-wide drift and an independent per-pixel part.
    """

    min_range: float = 0.3
    acc_range: float = 4.0
    max_range: float = 6.0
    far_limit: float = 12.0
    noise_coeff: float = 0.005
    object_bias_share: float = 0.7
    frame_share: float = 0.3
    dropout: float = 0.01

    def __post_init__(self):
        if self.noise_coeff < 0:
            raise ValueError("noise_coeff must be >= 0")
        if not (0 <= self.dropout <= 1):
            raise ValueError("dropout must be in [0, 1]")
        if self.object_bias_share < 0 or self.frame_share < 0:
            raise ValueError("noise shares must be >= 0")
        if self.object_bias_share**2 + self.frame_share**2 > 1:
            raise ValueError("noise shares must satisfy share_obj^2 + share_frame^2 <= 1")
        if self.far_limit < self.max_range:
            raise ValueError("far_limit must be >= max_range")

    @property
    def pixel_share(self) -> float:
        return float(np.sqrt(1.0 - self.object_bias_share**2 - self.frame_share**2))

    def to_dict(self) -> dict:
        return {
            "min_range": self.min_range,
            "acc_range": self.acc_range,
            "max_range": self.max_range,
            "far_limit": self.far_limit,
            "noise_coeff": self.noise_coeff,
            "object_bias_share": self.object_bias_share,
            "frame_share": self.frame_share,
            "dropout": self.dropout,
        }


@dataclass(frozen=True)
class LidarSensor:
    """Spinning multi-ring lidar: rings spread over the vertical FOV, one
    return per azimuth step, gaussian range noise."""

    rings: int = 16
    horizontal_resolution: float = np.deg2rad(0.4)
    vertical_fov: tuple = (np.deg2rad(-15.0), np.deg2rad(15.0))
    range_noise: float = 0.02
    max_range: float = 30.0

    def __post_init__(self):
        if self.rings < 1:
            raise ValueError("rings must be >= 1")
        if self.range_noise < 0:
            raise ValueError("range_noise must be >= 0")

    def ray_directions(self) -> np.ndarray:
        """Unit directions in the lidar frame (x forward, y left, z up)."""
        lo, hi = self.vertical_fov
        elevations = np.linspace(lo, hi, self.rings) if self.rings > 1 else np.array([(lo + hi) / 2])
        n_az = max(1, int(round(2 * np.pi / self.horizontal_resolution)))
        azimuths = np.arange(n_az) * (2 * np.pi / n_az)
        el, az = np.meshgrid(elevations, azimuths, indexing="ij")
        ce = np.cos(el.ravel())
        return np.stack(
            [ce * np.cos(az.ravel()), ce * np.sin(az.ravel()), np.sin(el.ravel())], axis=1
        )

    def to_dict(self) -> dict:
        return {
            "rings": self.rings,
            "horizontal_resolution_deg": float(np.rad2deg(self.horizontal_resolution)),
            "vertical_fov_deg": [float(np.rad2deg(v)) for v in self.vertical_fov],
            "range_noise": self.range_noise,
            "max_range": self.max_range,
        }


@dataclass(frozen=True)
class SensorModel:
    """Sensor suite plus mask corruption and the (default-off) pose noise
    emulating jerky robot motion: sensors render from the true pose while
    the frame reports a perturbed one, like an imperfect localizer."""

    camera: CameraSensor = CameraSensor()
    lidar: LidarSensor = LidarSensor()
    mask_erosion_px: int = 1
    label_swap_prob: float = 0.02
    pose_noise_xy: float = 0.0
    pose_noise_yaw: float = 0.0

    def to_dict(self) -> dict:
        return {
            "camera": self.camera.to_dict(),
            "lidar": self.lidar.to_dict(),
            "mask_erosion_px": self.mask_erosion_px,
            "label_swap_prob": self.label_swap_prob,
            "pose_noise_xy": self.pose_noise_xy,
            "pose_noise_yaw": self.pose_noise_yaw,
        }


@dataclass(frozen=True)
class Frame:
    """One time-step of sensor input. depth_image is uint16 millimeters with
    0 marking no return; lidar points are in the lidar frame."""

    index: int
    timestamp: float
    robot_pose: RobotPose
    depth_image: np.ndarray
    lidar_cloud: PointCloud
    masks: tuple

    def __post_init__(self):
        if self.depth_image.dtype != np.uint16:
            raise ValueError("depth_image must be uint16 millimeters")
        for m in self.masks:
            if m.mask.shape != self.depth_image.shape:
                raise ValueError("mask and depth image dimensions differ")

    def depth_meters(self) -> np.ndarray:
        return self.depth_image.astype(float) * 1e-3


# --- analytic ray casting -------------------------------------------------

def _finite_positive(t: np.ndarray) -> np.ndarray:
    return np.where(np.isfinite(t) & (t > _EPS), t, np.inf)


def _ray_sphere(origin, dirs, center, radius) -> np.ndarray:
    oc = origin - center
    a = np.einsum("ij,ij->i", dirs, dirs)
    b = 2.0 * dirs @ oc
    c = float(oc @ oc) - radius * radius
    disc = b * b - 4.0 * a * c
    sq = np.sqrt(np.maximum(disc, 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        t1 = (-b - sq) / (2.0 * a)
        t2 = (-b + sq) / (2.0 * a)
    t = np.where(t1 > _EPS, t1, t2)
    t[disc < 0] = np.inf
    return _finite_positive(t)


def _ray_box(origin, dirs, center, dims) -> np.ndarray:
    half = np.asarray(dims) / 2.0
    lo, hi = center - half, center + half
    # Avoid 0/0 in the slab test for rays parallel to a face.
    d = np.where(np.abs(dirs) < 1e-12, 1e-12, dirs)
    t1 = (lo - origin) / d
    t2 = (hi - origin) / d
    tnear = np.minimum(t1, t2).max(axis=1)
    tfar = np.maximum(t1, t2).min(axis=1)
    hit = (tfar >= tnear) & (tfar > _EPS)
    t = np.where(tnear > _EPS, tnear, tfar)
    t[~hit] = np.inf
    return _finite_positive(t)


def _ray_cylinder(origin, dirs, center, radius, height) -> np.ndarray:
    z0, z1 = center[2] - height / 2.0, center[2] + height / 2.0
    ox, oy, oz = origin - np.array([center[0], center[1], 0.0])
    dx, dy, dz = dirs[:, 0], dirs[:, 1], dirs[:, 2]

    a = dx * dx + dy * dy
    b = 2.0 * (ox * dx + oy * dy)
    c = ox * ox + oy * oy - radius * radius
    disc = b * b - 4.0 * a * c
    sq = np.sqrt(np.maximum(disc, 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        side = np.full(len(dirs), np.inf)
        for tc in ((-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)):
            z = oz + tc * dz
            ok = np.isfinite(tc) & (disc >= 0) & (tc > _EPS) & (z >= z0) & (z <= z1)
            side = np.where(ok & (tc < side), tc, side)

        best = side
        for z_cap in (z0, z1):
            tc = (z_cap - oz) / dz
            px = ox + tc * dx
            py = oy + tc * dy
            ok = np.isfinite(tc) & (tc > _EPS) & (px * px + py * py <= radius * radius)
            best = np.where(ok & (tc < best), tc, best)
    return _finite_positive(best)


def _object_hits(origin, dirs, obj: SceneObject) -> np.ndarray:
    if obj.shape == "sphere":
        return _ray_sphere(origin, dirs, obj.center, obj.dimensions[0])
    if obj.shape == "box":
        return _ray_box(origin, dirs, obj.center, obj.dimensions)
    return _ray_cylinder(origin, dirs, obj.center, obj.dimensions[0], obj.dimensions[1])


FLOOR_INDEX = -2


def _floor_hits(origin, dirs, arena) -> np.ndarray:
    """Hits on the z=0 ground rectangle spanned by the arena bounds."""
    dz = dirs[:, 2]
    with np.errstate(divide="ignore", invalid="ignore"):
        t = -origin[2] / dz
    x = origin[0] + t * dirs[:, 0]
    y = origin[1] + t * dirs[:, 1]
    xmin, xmax, ymin, ymax = arena
    ok = (dz < 0) & (x >= xmin) & (x <= xmax) & (y >= ymin) & (y <= ymax)
    return np.where(ok, t, np.inf)


def cast_rays(origin: np.ndarray, dirs: np.ndarray, scene: Scene):
    """Nearest-hit parameter t per ray plus the index of the object hit
    (-1 = miss, FLOOR_INDEX = ground plane)."""
    t_best = np.full(len(dirs), np.inf)
    idx_best = np.full(len(dirs), -1, dtype=np.int64)
    if scene.floor:
        t = _floor_hits(origin, dirs, scene.arena)
        hit = np.isfinite(t)
        t_best = np.where(hit, t, t_best)
        idx_best = np.where(hit, FLOOR_INDEX, idx_best)
    for i, obj in enumerate(scene.objects):
        t = _object_hits(origin, dirs, obj)
        closer = t < t_best
        t_best = np.where(closer, t, t_best)
        idx_best = np.where(closer, i, idx_best)
    return t_best, idx_best


def _bounding_radius(obj: SceneObject) -> float:
    if obj.shape == "sphere":
        return obj.dimensions[0]
    if obj.shape == "box":
        return float(np.linalg.norm(obj.dimensions) / 2.0)
    return float(np.hypot(obj.dimensions[0], obj.dimensions[1] / 2.0))


def _pixel_window(obj: SceneObject, cam_from_map, intr):
    """Conservative pixel bounding box of the object, or None when it cannot
    intersect the view frustum."""
    c = cam_from_map.apply(obj.center)
    r = _bounding_radius(obj)
    if c[2] + r <= _EPS:
        return None
    if c[2] <= r:  # camera inside or beside the bounding sphere
        return 0, intr.height, 0, intr.width
    near_z = c[2] - r
    u_lo = intr.fx * (c[0] - r) / near_z + intr.px
    u_hi = intr.fx * (c[0] + r) / near_z + intr.px
    v_lo = intr.fy * (c[1] - r) / near_z + intr.py
    v_hi = intr.fy * (c[1] + r) / near_z + intr.py
    col0 = max(0, int(np.floor(u_lo)))
    col1 = min(intr.width, int(np.ceil(u_hi)) + 1)
    row0 = max(0, int(np.floor(v_lo)))
    row1 = min(intr.height, int(np.ceil(v_hi)) + 1)
    if col0 >= col1 or row0 >= row1:
        return None
    return row0, row1, col0, col1


def cast_camera(map_from_camera, intr, scene: Scene):
    """Camera-resolution nearest-hit cast with per-object pixel-window culling.

    Returns (depth, hit index) as (height, width) rasters; depth is the
    camera-frame z of the hit (the ray grid uses z = 1 directions).
    """
    dirs_cam = _camera_rays(intr).reshape(intr.height, intr.width, 3)
    dirs_map = dirs_cam @ map_from_camera.rotation.T
    origin = map_from_camera.translation
    cam_from_map = map_from_camera.inverse()

    t_best = np.full((intr.height, intr.width), np.inf)
    idx_best = np.full((intr.height, intr.width), -1, dtype=np.int64)
    if scene.floor:
        flat = _camera_rays(intr)
        t = _floor_hits(origin, flat @ map_from_camera.rotation.T, scene.arena)
        hit = np.isfinite(t).reshape(intr.height, intr.width)
        t_best[hit] = t.reshape(intr.height, intr.width)[hit]
        idx_best[hit] = FLOOR_INDEX
    for i, obj in enumerate(scene.objects):
        window = _pixel_window(obj, cam_from_map, intr)
        if window is None:
            continue
        r0, r1, c0, c1 = window
        sub = dirs_map[r0:r1, c0:c1].reshape(-1, 3)
        t = _object_hits(origin, sub, obj).reshape(r1 - r0, c1 - c0)
        view_t = t_best[r0:r1, c0:c1]
        view_i = idx_best[r0:r1, c0:c1]
        closer = t < view_t
        view_t[closer] = t[closer]
        view_i[closer] = i
    return t_best, idx_best


# --- frame rendering --------------------------------------------------------

def _object_depth_bias(object_id: int) -> float:
    """Reproducible standard-normal depth offset for one object."""
    return float(np.random.default_rng([int(object_id), 77]).standard_normal())


def _camera_rays(intr) -> np.ndarray:
    us, vs = np.meshgrid(np.arange(intr.width, dtype=float),
                         np.arange(intr.height, dtype=float))
    # z component 1 makes the ray parameter equal the camera z-depth.
    return np.stack(
        [(us.ravel() - intr.px) / intr.fx, (vs.ravel() - intr.py) / intr.fy,
         np.ones(intr.width * intr.height)], axis=1
    )


def render_frame(
    scene: Scene,
    robot_pose: RobotPose,
    sensors: SensorModel,
    calib: Calibration,
    seed,
    index: int = 0,
    timestamp: float = 0.0,
) -> Frame:
    """Render one frame: depth raster, lidar cloud and segmentation masks.

    Pure given (scene, pose, seed): the rng is derived from the seed alone,
    so frames can be rendered out of order or in parallel.
    """
    rng = np.random.default_rng(seed)
    cam = sensors.camera
    intr = calib.intrinsics

    map_from_robot = robot_pose.as_extrinsics()
    map_from_camera = map_from_robot.compose(calib.robot_from_camera)
    map_from_lidar = map_from_robot.compose(calib.robot_from_lidar)

    # Depth image: cast through every pixel, then gate, perturb and quantize.
    depth, hit_idx = cast_camera(map_from_camera, intr, scene)
    depth = depth.ravel()
    # The sensor keeps returning (increasingly noisy) depth beyond its
    # reliable max range, up to a hard cutoff; range policy is the fusion
    # rule's job, not the renderer's.
    visible = np.isfinite(depth)
    in_range = visible & (depth >= cam.min_range) & (depth <= cam.far_limit)
    measured = np.where(in_range, depth, 0.0)
    if cam.noise_coeff > 0:
        sigma = cam.noise_coeff * measured**2
        # Per-object offsets depend only on the object, so the same surface
        # is mis-ranged the same way in every frame of a run.
        per_pixel_g = np.zeros(len(measured))
        if scene.objects:
            object_g = np.array(
                [_object_depth_bias(obj.object_id) for obj in scene.objects]
            )
            flat_idx = hit_idx.ravel()
            on_object = flat_idx >= 0
            per_pixel_g[on_object] = object_g[flat_idx[on_object]]
        shared = rng.standard_normal()
        pixel = rng.standard_normal(len(measured))
        noise = sigma * (
            cam.object_bias_share * per_pixel_g
            + cam.frame_share * shared
            + cam.pixel_share * pixel
        )
        measured = np.where(in_range, np.maximum(measured + noise, 1e-3), 0.0)
    if cam.dropout > 0:
        drop = rng.random(len(measured)) < cam.dropout
        measured = np.where(drop, 0.0, measured)
    depth_mm = np.clip(np.rint(measured * 1000.0), 0, 65535).astype(np.uint16)
    depth_image = depth_mm.reshape(intr.height, intr.width)

    # Masks: exact silhouettes from the same cast, then optional corruption.
    masks = _build_masks(hit_idx, scene, sensors, rng)

    # Lidar: one return per hit ray, range noise, points in the lidar frame.
    dirs_lidar = sensors.lidar.ray_directions()
    dirs_lmap = dirs_lidar @ map_from_lidar.rotation.T
    ranges, _ = cast_rays(map_from_lidar.translation, dirs_lmap, scene)
    hit = np.isfinite(ranges) & (ranges <= sensors.lidar.max_range)
    ranges_hit = ranges[hit]
    if sensors.lidar.range_noise > 0 and len(ranges_hit):
        ranges_hit = ranges_hit + rng.normal(0.0, sensors.lidar.range_noise, len(ranges_hit))
    lidar_points = dirs_lidar[hit] * ranges_hit[:, None]

    if sensors.pose_noise_xy > 0 or sensors.pose_noise_yaw > 0:
        robot_pose = RobotPose.from_xyyaw(
            robot_pose.x + rng.normal(0.0, sensors.pose_noise_xy),
            robot_pose.y + rng.normal(0.0, sensors.pose_noise_xy),
            robot_pose.yaw + rng.normal(0.0, sensors.pose_noise_yaw),
            z=robot_pose.z,
        )

    return Frame(
        index=index,
        timestamp=timestamp,
        robot_pose=robot_pose,
        depth_image=depth_image,
        lidar_cloud=PointCloud(lidar_points, "lidar"),
        masks=masks,
    )


def _build_masks(hit_idx: np.ndarray, scene: Scene, sensors: SensorModel, rng) -> tuple:
    masks = []
    classes = scene.classes
    for i, obj in enumerate(scene.objects):
        raster = hit_idx == i
        if not raster.any():
            continue
        if sensors.mask_erosion_px > 0:
            raster = ndimage.binary_erosion(raster, iterations=sensors.mask_erosion_px)
            if not raster.any():
                continue
        label = obj.class_label
        if len(classes) > 1 and rng.random() < sensors.label_swap_prob:
            others = [c for c in classes if c != label]
            label = others[int(rng.integers(len(others)))]
        # Segmentation confidence tracks apparent size: tiny far-away
        # silhouettes come out weak, like real instance segmentation.
        area_term = 1.0 - np.exp(-raster.sum() / 500.0)
        confidence = float(np.clip(area_term * rng.uniform(0.9, 1.0), 0.01, 1.0))
        masks.append(DetectionMask(class_label=label, confidence=confidence, mask=raster))
    return tuple(masks)

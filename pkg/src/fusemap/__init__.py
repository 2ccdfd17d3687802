"""Camera-lidar fusion semantic mapping.

Depth-camera and lidar observations of segmented objects are fused into
class-labeled, position-stabilized map artifacts. The package also ships a
deterministic scene simulator, an evaluation harness for the
single-sensor-vs-fusion comparison, and a live console service.
"""

from .clouds import (
    FilterParams,
    PointCloud,
    RadiusOutlierFilter,
    VoxelGridFilter,
    centroid,
    extent_radius,
)
from .config import PipelineConfig, config_from_dict, load_config
from .evaluate import Report, TruthObject, categorize, report
from .frames import (
    Calibration,
    CameraIntrinsics,
    Extrinsics,
    RobotPose,
    back_project,
    load_calibration,
    project_to_image,
    save_calibration,
    to_map_frame,
)
from .fusion import (
    ArtifactEstimate,
    DetectionMask,
    FrameFuser,
    FusionConfig,
    fuse_centroid,
    fuse_radius,
    fusion_weight,
    view_angle,
)
from .goals import GoalCommand, compute_goal
from .manager import ArtifactManager, MovingAverageWindow, check_stability, finalize_merge
from .mapfile import ArtifactMap, ArtifactRecord, MapMeta, load_map, save_map
from .runner import ArtifactMapper, run_mapping

__version__ = "0.1.0"

__all__ = [
    "ArtifactEstimate",
    "ArtifactManager",
    "ArtifactMap",
    "ArtifactMapper",
    "ArtifactRecord",
    "Calibration",
    "CameraIntrinsics",
    "DetectionMask",
    "Extrinsics",
    "FilterParams",
    "FrameFuser",
    "FusionConfig",
    "GoalCommand",
    "MapMeta",
    "MovingAverageWindow",
    "PipelineConfig",
    "PointCloud",
    "RadiusOutlierFilter",
    "Report",
    "RobotPose",
    "TruthObject",
    "VoxelGridFilter",
    "back_project",
    "categorize",
    "centroid",
    "check_stability",
    "compute_goal",
    "config_from_dict",
    "extent_radius",
    "finalize_merge",
    "fuse_centroid",
    "fuse_radius",
    "fusion_weight",
    "load_calibration",
    "load_config",
    "load_map",
    "project_to_image",
    "report",
    "run_mapping",
    "save_calibration",
    "save_map",
    "to_map_frame",
    "view_angle",
]

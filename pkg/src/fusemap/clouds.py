"""Point-cloud hygiene: voxel-grid downsampling and radius outlier removal.

Both filters are sklearn-style transformers over (N, 3) float arrays so they
compose with `sklearn.pipeline.Pipeline`; `PointCloud` adds the frame tag the
mapping pipeline carries alongside the raw coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.spatial import cKDTree
from sklearn.base import BaseEstimator, TransformerMixin

from .errors import EmptyCloudError
from .validation import as_points, check_frame, check_positive


@dataclass(frozen=True)
class PointCloud:
    """An (N, 3) array of points expressed in a single tagged frame."""

    points: np.ndarray
    frame: str

    def __post_init__(self):
        object.__setattr__(self, "points", as_points(self.points))
        check_frame(self.frame)

    def __len__(self) -> int:
        return len(self.points)

    def with_points(self, points: np.ndarray) -> "PointCloud":
        return replace(self, points=points)


@dataclass(frozen=True)
class FilterParams:
    """Per-sensor filter settings.

    The outlier filter keeps a point iff at least
    max(min_neighbors_floor, floor(min_neighbor_fraction * N)) other points
    lie within neighbor_radius; the requirement scales with cloud density.
    voxel_leaf None disables downsampling (lidar clouds are already sparse).
    """

    voxel_leaf: float | None = 0.05
    neighbor_radius: float = 0.25
    min_neighbor_fraction: float = 0.05
    min_neighbors_floor: int = 5

    def __post_init__(self):
        if self.voxel_leaf is not None:
            check_positive(self.voxel_leaf, "voxel_leaf")
        check_positive(self.neighbor_radius, "neighbor_radius")
        if not (0 < self.min_neighbor_fraction <= 1):
            raise ValueError("min_neighbor_fraction must be in (0, 1]")
        if self.min_neighbors_floor < 1:
            raise ValueError("min_neighbors_floor must be >= 1")

    def to_dict(self) -> dict:
        return {
            "voxel_leaf": self.voxel_leaf,
            "neighbor_radius": self.neighbor_radius,
            "min_neighbor_fraction": self.min_neighbor_fraction,
            "min_neighbors_floor": self.min_neighbors_floor,
        }


CAMERA_FILTER_DEFAULTS = FilterParams(
    voxel_leaf=0.05, neighbor_radius=0.25, min_neighbor_fraction=0.05, min_neighbors_floor=5
)
LIDAR_FILTER_DEFAULTS = FilterParams(
    voxel_leaf=None, neighbor_radius=0.25, min_neighbor_fraction=0.10, min_neighbors_floor=2
)


class VoxelGridFilter(BaseEstimator, TransformerMixin):
    """Replace all points inside each cube of side `leaf_size` by their centroid.

    The grid is anchored at the origin with half-open cells
    [i*leaf, (i+1)*leaf); output rows are ordered by cell index, so the
    result is deterministic and applying the filter twice is the identity
    (a cell's centroid stays inside its cell by convexity).
    """

    def __init__(self, leaf_size: float = 0.05):
        self.leaf_size = leaf_size

    def fit(self, X, y=None):
        check_positive(self.leaf_size, "leaf_size")
        return self

    def transform(self, X) -> np.ndarray:
        check_positive(self.leaf_size, "leaf_size")
        pts = as_points(X)
        if len(pts) == 0:
            return pts
        cells = np.floor(pts / self.leaf_size).astype(np.int64)
        keys, inverse = np.unique(cells, axis=0, return_inverse=True)
        sums = np.zeros((len(keys), 3))
        np.add.at(sums, inverse, pts)
        counts = np.bincount(inverse, minlength=len(keys)).astype(float)
        return sums / counts[:, None]


class RadiusOutlierFilter(BaseEstimator, TransformerMixin):
    """Drop points with too few neighbors inside a ball.

    A point survives iff at least k other points lie within `radius` of it,
    with k = max(min_count, floor(min_fraction * N)) for an N-point input.
    """

    def __init__(self, radius: float = 0.25, min_fraction: float = 0.05, min_count: int = 5):
        self.radius = radius
        self.min_fraction = min_fraction
        self.min_count = min_count

    @classmethod
    def from_params(cls, params: FilterParams) -> "RadiusOutlierFilter":
        return cls(
            radius=params.neighbor_radius,
            min_fraction=params.min_neighbor_fraction,
            min_count=params.min_neighbors_floor,
        )

    def fit(self, X, y=None):
        check_positive(self.radius, "radius")
        return self

    def transform(self, X) -> np.ndarray:
        check_positive(self.radius, "radius")
        pts = as_points(X)
        n = len(pts)
        if n == 0:
            return pts
        required = max(self.min_count, int(np.floor(self.min_fraction * n)))
        tree = cKDTree(pts)
        # Ball counts include the query point itself.
        neighbor_counts = tree.query_ball_point(pts, r=self.radius, return_length=True)
        return pts[neighbor_counts - 1 >= required]


def apply_filters(cloud: PointCloud, params: FilterParams) -> PointCloud:
    """Voxel-downsample (when enabled) then radius-filter a cloud."""
    pts = cloud.points
    if params.voxel_leaf is not None:
        pts = VoxelGridFilter(params.voxel_leaf).transform(pts)
    pts = RadiusOutlierFilter.from_params(params).transform(pts)
    return cloud.with_points(pts)


def centroid(points) -> np.ndarray:
    pts = _non_empty(points)
    return pts.mean(axis=0)


def extent_radius(points) -> float:
    """Mean of the two largest per-axis extents (max - min) of the cloud."""
    pts = _non_empty(points)
    extents = pts.max(axis=0) - pts.min(axis=0)
    two_largest = np.sort(extents)[-2:]
    return float(two_largest.mean())


def _non_empty(points) -> np.ndarray:
    pts = points.points if isinstance(points, PointCloud) else as_points(points)
    if len(pts) == 0:
        raise EmptyCloudError("operation requires a non-empty cloud")
    return pts

import numpy as np
import pytest

from fusemap.frames import Calibration, CameraIntrinsics, Extrinsics


@pytest.fixture
def simple_intrinsics():
    # Wide image so off-axis pixel examples stay in bounds.
    return CameraIntrinsics(fx=100.0, fy=100.0, px=50.0, py=50.0, width=400, height=300)


@pytest.fixture
def identity_calibration(simple_intrinsics):
    return Calibration(
        intrinsics=simple_intrinsics,
        camera_from_lidar=Extrinsics.identity(),
        robot_from_camera=Extrinsics.identity(),
        robot_from_lidar=Extrinsics.identity(),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_rotation(rng) -> np.ndarray:
    """Uniform-ish random rotation via QR with positive diagonal."""
    q, r = np.linalg.qr(rng.standard_normal((3, 3)))
    q = q @ np.diag(np.sign(np.diag(r)))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q

"""Projection math: hand-computed pixel/point pairs and round-trip identities."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fusemap.errors import FrameMismatchError, InvalidDepthError
from fusemap.frames import (
    Calibration,
    CameraIntrinsics,
    Extrinsics,
    RobotPose,
    back_project,
    load_calibration,
    project_to_image,
    project_points,
    save_calibration,
    to_map_frame,
)

from conftest import random_rotation


class TestBackProject:
    def test_principal_point_lies_on_optical_axis(self, simple_intrinsics):
        p = back_project(50.0, 50.0, 3.0, simple_intrinsics)
        assert np.allclose(p, [0.0, 0.0, 3.0])

    def test_off_axis_pixel(self, simple_intrinsics):
        # (u - px)/fx * z = (150 - 50)/100 * 2 = 2.
        p = back_project(150.0, 50.0, 2.0, simple_intrinsics)
        assert np.allclose(p, [2.0, 0.0, 2.0])

    def test_zero_depth_rejected(self, simple_intrinsics):
        with pytest.raises(InvalidDepthError):
            back_project(50.0, 50.0, 0.0, simple_intrinsics)

    def test_negative_depth_rejected(self, simple_intrinsics):
        with pytest.raises(InvalidDepthError):
            back_project(50.0, 50.0, -1.0, simple_intrinsics)


class TestProjectToImage:
    def test_optical_axis_hits_principal_point(self, simple_intrinsics):
        result = project_to_image(np.array([0.0, 0.0, 2.0]), Extrinsics.identity(), simple_intrinsics)
        assert result is not None
        u, v, depth = result
        assert (u, v, depth) == (50.0, 50.0, 2.0)

    def test_inverse_of_back_project_example(self, simple_intrinsics):
        result = project_to_image(np.array([2.0, 0.0, 2.0]), Extrinsics.identity(), simple_intrinsics)
        assert result is not None
        u, v, depth = result
        assert np.allclose([u, v, depth], [150.0, 50.0, 2.0])

    def test_behind_image_plane_absent(self, simple_intrinsics):
        assert project_to_image(np.array([0.0, 0.0, -1.0]), Extrinsics.identity(), simple_intrinsics) is None

    def test_outside_bounds_absent(self, simple_intrinsics):
        # Projects to u = 100*10/1 + 50, far beyond a 400px-wide image.
        assert project_to_image(np.array([10.0, 0.0, 1.0]), Extrinsics.identity(), simple_intrinsics) is None

    def test_vectorized_matches_scalar(self, simple_intrinsics, rng):
        pts = rng.uniform(-3, 3, size=(200, 3))
        extr = Extrinsics(random_rotation(rng), rng.uniform(-1, 1, 3))
        uv, depth, valid = project_points(pts, extr, simple_intrinsics)
        for i, p in enumerate(pts):
            single = project_to_image(p, extr, simple_intrinsics)
            if single is None:
                assert not valid[i]
            else:
                assert valid[i]
                assert np.allclose([uv[i, 0], uv[i, 1], depth[i]], single)

    def test_in_view_coordinates_inside_bounds(self, simple_intrinsics, rng):
        pts = rng.uniform(-5, 5, size=(500, 3))
        uv, _, valid = project_points(pts, Extrinsics.identity(), simple_intrinsics)
        assert np.all(uv[valid, 0] >= 0) and np.all(uv[valid, 0] < simple_intrinsics.width)
        assert np.all(uv[valid, 1] >= 0) and np.all(uv[valid, 1] < simple_intrinsics.height)


class TestRoundTrip:
    def test_many_random_in_view_points(self, simple_intrinsics, rng):
        n = 10_000
        u = rng.uniform(0, simple_intrinsics.width - 1e-9, n)
        v = rng.uniform(0, simple_intrinsics.height - 1e-9, n)
        z = rng.uniform(0.1, 50.0, n)
        for i in range(0, n, 997):  # scalar spot checks along the batch
            p = back_project(u[i], v[i], z[i], simple_intrinsics)
            back = project_to_image(p, Extrinsics.identity(), simple_intrinsics)
            assert back is not None
        x = (u - simple_intrinsics.px) / simple_intrinsics.fx * z
        y = (v - simple_intrinsics.py) / simple_intrinsics.fy * z
        pts = np.stack([x, y, z], axis=1)
        uv, depth, valid = project_points(pts, Extrinsics.identity(), simple_intrinsics)
        assert valid.all()
        rel = np.abs(uv[:, 0] - u) / np.maximum(np.abs(u), 1.0)
        assert rel.max() < 1e-9
        rel = np.abs(uv[:, 1] - v) / np.maximum(np.abs(v), 1.0)
        assert rel.max() < 1e-9
        assert (np.abs(depth - z) / z).max() < 1e-9


class TestToMapFrame:
    def test_identity_chain_is_identity(self, identity_calibration):
        pose = RobotPose.from_xyyaw(0.0, 0.0, 0.0)
        p = np.array([1.0, 2.0, 3.0])
        assert np.allclose(to_map_frame(p, "camera", identity_calibration, pose), p)

    def test_pure_translation(self, identity_calibration):
        pose = RobotPose.from_xyyaw(1.0, 2.0, 0.0)
        out = to_map_frame(np.zeros(3), "lidar", identity_calibration, pose)
        assert np.allclose(out, [1.0, 2.0, 0.0])

    def test_preserves_pairwise_distances(self, simple_intrinsics, rng):
        calib = Calibration(
            intrinsics=simple_intrinsics,
            camera_from_lidar=Extrinsics(random_rotation(rng), rng.uniform(-1, 1, 3)),
            robot_from_camera=Extrinsics(random_rotation(rng), rng.uniform(-1, 1, 3)),
            robot_from_lidar=Extrinsics(random_rotation(rng), rng.uniform(-1, 1, 3)),
        )
        pose = RobotPose(3.0, -2.0, 0.1, random_rotation(rng))
        p = rng.uniform(-10, 10, (50, 3))
        q = rng.uniform(-10, 10, (50, 3))
        tp = to_map_frame(p, "camera", calib, pose)
        tq = to_map_frame(q, "camera", calib, pose)
        before = np.linalg.norm(p - q, axis=1)
        after = np.linalg.norm(tp - tq, axis=1)
        assert np.abs(after - before).max() / before.max() < 1e-9

    def test_unknown_frame_rejected(self, identity_calibration):
        pose = RobotPose.from_xyyaw(0.0, 0.0, 0.0)
        with pytest.raises(FrameMismatchError):
            to_map_frame(np.zeros(3), "sonar", identity_calibration, pose)
        with pytest.raises(FrameMismatchError):
            to_map_frame(np.zeros(3), "map", identity_calibration, pose)


class TestTypes:
    def test_intrinsics_validation(self):
        with pytest.raises(ValueError):
            CameraIntrinsics(fx=-1, fy=1, px=0, py=0, width=10, height=10)
        with pytest.raises(ValueError):
            CameraIntrinsics(fx=1, fy=1, px=20, py=0, width=10, height=10)

    def test_extrinsics_rejects_non_orthonormal(self):
        with pytest.raises(ValueError):
            Extrinsics(np.eye(3) * 1.001, np.zeros(3))

    def test_extrinsics_rejects_reflection(self):
        r = np.diag([1.0, 1.0, -1.0])
        with pytest.raises(ValueError):
            Extrinsics(r, np.zeros(3))

    def test_compose_against_sequential_apply(self, rng):
        a = Extrinsics(random_rotation(rng), rng.uniform(-1, 1, 3))
        b = Extrinsics(random_rotation(rng), rng.uniform(-1, 1, 3))
        p = rng.uniform(-5, 5, 3)
        assert np.allclose(a.compose(b).apply(p), a.apply(b.apply(p)))

    def test_inverse_round_trip(self, rng):
        a = Extrinsics(random_rotation(rng), rng.uniform(-1, 1, 3))
        p = rng.uniform(-5, 5, 3)
        assert np.allclose(a.inverse().apply(a.apply(p)), p)


# Pixels a hair inside the image: exact-boundary pixels can re-project one
# ulp off-image, which the strict in-bounds check rightly rejects.
@settings(max_examples=50, deadline=None)
@given(
    u=st.floats(0.001, 398.999), v=st.floats(0.001, 298.999),
    z=st.floats(0.01, 100, allow_nan=False, allow_infinity=False),
)
def test_round_trip_property(u, v, z):
    intr = CameraIntrinsics(fx=100.0, fy=100.0, px=50.0, py=50.0, width=400, height=300)
    p = back_project(u, v, z, intr)
    back = project_to_image(p, Extrinsics.identity(), intr)
    assert back is not None
    bu, bv, bz = back
    assert abs(bu - u) <= 1e-9 * max(1.0, abs(u))
    assert abs(bv - v) <= 1e-9 * max(1.0, abs(v))
    assert abs(bz - z) <= 1e-9 * z


def test_calibration_file_round_trip(tmp_path, simple_intrinsics, rng):
    calib = Calibration(
        intrinsics=simple_intrinsics,
        camera_from_lidar=Extrinsics(random_rotation(rng), rng.uniform(-1, 1, 3)),
        robot_from_camera=Extrinsics(random_rotation(rng), rng.uniform(-1, 1, 3)),
        robot_from_lidar=Extrinsics(random_rotation(rng), rng.uniform(-1, 1, 3)),
    )
    path = tmp_path / "calib.json"
    save_calibration(calib, path)
    loaded = load_calibration(path)
    assert loaded.intrinsics == calib.intrinsics
    for name in ("camera_from_lidar", "robot_from_camera", "robot_from_lidar"):
        assert np.allclose(getattr(loaded, name).rotation, getattr(calib, name).rotation)
        assert np.allclose(getattr(loaded, name).translation, getattr(calib, name).translation)

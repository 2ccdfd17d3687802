"""Recorded-dataset directory layout: PGM rasters, CSV lidar, JSON metadata.

Layout:
    dataset/
      calib.json
      scene_truth.json
      frames/000001/depth.pgm     16-bit binary PGM, millimeters
                    lidar.csv     x,y,z meters per line
                    pose.json     timestamp + position + row-major rotation
                    masks.json    [{class, confidence, file}]
                    mask_000.pgm  8-bit binary PGM, >127 = object

Floats are written with repr so a read-back reproduces the values bit-exact.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from .clouds import PointCloud
from .errors import DatasetError
from .frames import Calibration, RobotPose, load_calibration, save_calibration
from .fusion import DetectionMask
from .simulate.sensors import Frame


def _write_pgm(path: Path, raster: np.ndarray, maxval: int) -> None:
    dtype = ">u2" if maxval > 255 else "u1"
    header = f"P5\n{raster.shape[1]} {raster.shape[0]}\n{maxval}\n"
    path.write_bytes(header.encode("ascii") + raster.astype(dtype).tobytes())


def _read_pgm(path: Path) -> tuple[np.ndarray, int]:
    data = path.read_bytes()
    if not data.startswith(b"P5"):
        raise DatasetError(f"{path}: not a binary PGM")
    fields: list[bytes] = []
    pos = 2
    while len(fields) < 3:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos : pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        fields.append(data[start:pos])
    pos += 1  # single whitespace after maxval
    width, height, maxval = (int(f) for f in fields)
    dtype = ">u2" if maxval > 255 else "u1"
    count = width * height
    itemsize = 2 if maxval > 255 else 1
    if len(data) - pos < count * itemsize:
        raise DatasetError(f"{path}: truncated raster")
    raster = np.frombuffer(data, dtype=dtype, count=count, offset=pos)
    return raster.reshape(height, width).astype(np.uint16 if maxval > 255 else np.uint8), maxval


def _frame_dir(root: Path, index: int) -> Path:
    return root / "frames" / f"{index + 1:06d}"


def write_frame(root: Path, frame: Frame) -> None:
    d = _frame_dir(root, frame.index)
    d.mkdir(parents=True, exist_ok=True)
    _write_pgm(d / "depth.pgm", frame.depth_image, 65535)
    lines = [
        f"{x!r},{y!r},{z!r}" for x, y, z in frame.lidar_cloud.points.tolist()
    ]
    (d / "lidar.csv").write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")
    pose = {"timestamp": frame.timestamp, **frame.robot_pose.to_dict()}
    (d / "pose.json").write_text(json.dumps(pose), encoding="utf-8")
    mask_entries = []
    for i, mask in enumerate(frame.masks):
        name = f"mask_{i:03d}.pgm"
        _write_pgm(d / name, np.where(mask.mask, 255, 0).astype(np.uint8), 255)
        mask_entries.append(
            {"class": mask.class_label, "confidence": mask.confidence, "file": name}
        )
    (d / "masks.json").write_text(json.dumps(mask_entries), encoding="utf-8")


def read_frame(root: Path, directory: Path) -> Frame:
    try:
        depth, _ = _read_pgm(directory / "depth.pgm")
        text = (directory / "lidar.csv").read_text(encoding="utf-8")
        rows = [
            [float(v) for v in line.split(",")]
            for line in text.splitlines()
            if line.strip()
        ]
        points = np.array(rows, dtype=float).reshape(-1, 3)
        pose_raw = json.loads((directory / "pose.json").read_text(encoding="utf-8"))
        pose = RobotPose.from_dict(pose_raw)
        masks = []
        for entry in json.loads((directory / "masks.json").read_text(encoding="utf-8")):
            raster, _ = _read_pgm(directory / entry["file"])
            masks.append(
                DetectionMask(
                    class_label=entry["class"],
                    confidence=float(entry["confidence"]),
                    mask=raster > 127,
                )
            )
    except DatasetError:
        raise
    except (OSError, KeyError, ValueError) as exc:
        raise DatasetError(f"broken frame at {directory}: {exc}") from exc
    return Frame(
        index=int(directory.name) - 1,
        timestamp=float(pose_raw["timestamp"]),
        robot_pose=pose,
        depth_image=depth.astype(np.uint16),
        lidar_cloud=PointCloud(points, "lidar"),
        masks=tuple(masks),
    )


def write_dataset(
    path,
    frames: Iterable[Frame],
    calib: Calibration,
    truth: list[dict],
) -> int:
    """Write a full dataset; returns the number of frames written."""
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    save_calibration(calib, root / "calib.json")
    (root / "scene_truth.json").write_text(
        json.dumps({"objects": truth}, indent=2), encoding="utf-8"
    )
    count = 0
    for frame in frames:
        write_frame(root, frame)
        count += 1
    return count


class Dataset:
    """Lazy reader over a dataset directory; frames stream in index order."""

    def __init__(self, path):
        self.root = Path(path)
        if not self.root.is_dir():
            raise DatasetError(f"dataset directory {self.root} does not exist")
        try:
            self.calib = load_calibration(self.root / "calib.json")
        except (OSError, ValueError, KeyError) as exc:
            raise DatasetError(f"unreadable calib.json: {exc}") from exc
        truth_path = self.root / "scene_truth.json"
        self.truth: list[dict] = []
        if truth_path.exists():
            self.truth = json.loads(truth_path.read_text(encoding="utf-8"))["objects"]
        frames_dir = self.root / "frames"
        self._frame_dirs = (
            sorted(p for p in frames_dir.iterdir() if p.is_dir()) if frames_dir.is_dir() else []
        )

    def __len__(self) -> int:
        return len(self._frame_dirs)

    def __iter__(self) -> Iterator[Frame]:
        last_t = None
        for d in self._frame_dirs:
            frame = read_frame(self.root, d)
            if last_t is not None and frame.timestamp < last_t:
                raise DatasetError(f"timestamps not monotone at {d}")
            last_t = frame.timestamp
            yield frame

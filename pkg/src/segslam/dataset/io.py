"""On-disk dataset directories.

Layout::

    <root>/
        scene.yaml            generating scene spec (simulated datasets)
        camera.cfg            key=value intrinsics and tracking thresholds
        classes.csv           class_id,name,moveable
        frames.txt            index timestamp
        groundtruth.txt       TUM rows, camera-to-world
        features/000000.txt   u v raw_depth descriptor_hex landmark_id
        depth/000000.pgm      16-bit raw depth grid
        masks/000000.pgm      16-bit label image, value = instance_id + 1
        masks/000000.txt      instance_id class_id confidence
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Sequence

import numpy as np
import pandas as pd

from ..evaluation import Trajectory, read_tum, write_tum
from ..exceptions import DatasetError, InvalidSpec, ValidationError
from ..segmentation import ClassTable, FrameSegmentation
from ..simulator import GroundTruthBundle, SceneSpec, dump_scene_spec, load_scene_spec
from ..tracking import NO_LANDMARK, FrameObservation
from .base import FrameDataset
from .keyvalue import read_camera_file, write_camera_file
from .pgm import read_pgm, write_pgm

logger = logging.getLogger(__name__)

FEATURE_COLUMNS = ["u", "v", "raw_depth", "descriptor", "landmark_id"]
MASK_COLUMNS = ["instance_id", "class_id", "confidence"]


def frame_name(index: int, suffix: str) -> str:
    return f"{index:06d}{suffix}"


# ----------------------------------------------------------------------
# Features
# ----------------------------------------------------------------------
def write_features(path: Path, obs: FrameObservation) -> None:
    frame = pd.DataFrame(
        {
            "u": obs.pixels[:, 0],
            "v": obs.pixels[:, 1],
            "raw_depth": obs.raw_depth,
            "descriptor": [row.tobytes().hex() for row in obs.descriptors],
            "landmark_id": obs.landmark_ids,
        },
        columns=FEATURE_COLUMNS,
    )
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(
        path, sep=" ", header=False, index=False, float_format="%.17g", lineterminator="\n"
    )


def read_features(path: Path, descriptor_bytes: int) -> pd.DataFrame:
    """Read a feature file into a frame with :data:`FEATURE_COLUMNS`.

    Raises:
        DatasetError: If the file is missing or malformed.
    """

    if not path.exists():
        raise DatasetError(f"feature file not found: {path}")
    try:
        frame = pd.read_csv(
            path,
            sep=r"\s+",
            header=None,
            names=FEATURE_COLUMNS,
            dtype={"descriptor": str},
            float_precision="round_trip",
        )
    except pd.errors.EmptyDataError:
        frame = pd.DataFrame(columns=FEATURE_COLUMNS)
    except (pd.errors.ParserError, ValueError) as exc:
        raise DatasetError(f"malformed feature file {path}: {exc}") from exc
    if frame[["u", "v", "raw_depth"]].isna().any().any():
        raise DatasetError(f"feature file {path} has missing columns")
    bad = [d for d in frame["descriptor"] if not isinstance(d, str) or len(d) != 2 * descriptor_bytes]
    if bad:
        raise DatasetError(
            f"feature file {path}: descriptors must be {descriptor_bytes} hex-encoded bytes"
        )
    return frame


def _descriptor_array(hex_values: Sequence[str], descriptor_bytes: int) -> np.ndarray:
    if not len(hex_values):
        return np.empty((0, descriptor_bytes), dtype=np.uint8)
    try:
        raw = b"".join(bytes.fromhex(value) for value in hex_values)
    except ValueError as exc:
        raise DatasetError(f"invalid descriptor hex: {exc}") from exc
    return np.frombuffer(raw, dtype=np.uint8).reshape(len(hex_values), descriptor_bytes)


# ----------------------------------------------------------------------
# Masks
# ----------------------------------------------------------------------
def write_mask_files(directory: Path, seg: FrameSegmentation) -> None:
    """Write one frame's label image and its instance table."""

    write_pgm(directory / frame_name(seg.frame_index, ".pgm"), seg.label_image())
    table = pd.DataFrame(
        [(r.instance_id, r.class_id, r.confidence) for r in seg.regions],
        columns=MASK_COLUMNS,
    )
    table.to_csv(
        directory / frame_name(seg.frame_index, ".txt"),
        sep=" ",
        header=False,
        index=False,
        float_format="%.6f",
        lineterminator="\n",
    )


def write_mask_directory(directory: Path, segmentations: Sequence[FrameSegmentation]) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    for seg in segmentations:
        write_mask_files(directory, seg)
    logger.info("Wrote %d mask frames to %s", len(segmentations), directory)


def read_mask_files(
    directory: Path, frame_index: int, class_table: ClassTable
) -> FrameSegmentation:
    """Read one frame's masks; moveable flags come from ``class_table``.

    Raises:
        DatasetError: If a file is missing or the two files disagree.
    """

    labels = read_pgm(directory / frame_name(frame_index, ".pgm"))
    table_path = directory / frame_name(frame_index, ".txt")
    if not table_path.exists():
        raise DatasetError(f"mask table not found: {table_path}")
    try:
        table = pd.read_csv(table_path, sep=r"\s+", header=None, names=MASK_COLUMNS)
    except pd.errors.EmptyDataError:
        table = pd.DataFrame(columns=MASK_COLUMNS)
    table["confidence"] = table["confidence"].fillna(1.0)

    classes = {int(r.instance_id): int(r.class_id) for r in table.itertuples()}
    confidences = {int(r.instance_id): float(r.confidence) for r in table.itertuples()}
    try:
        seg = FrameSegmentation.from_label_image(frame_index, labels, classes)
        regions = [
            region.with_attributes(
                confidence=confidences[region.instance_id],
                moveable=class_table.is_moveable(region.class_id)
                if region.class_id in class_table
                else False,
            )
            for region in seg.regions
        ]
    except ValidationError as exc:
        raise DatasetError(f"{table_path}: {exc}") from exc
    return seg.with_regions(regions)


def read_mask_directory(
    directory: Path, n_frames: int, class_table: ClassTable
) -> list[FrameSegmentation]:
    if not directory.is_dir():
        raise DatasetError(f"mask directory not found: {directory}")
    return [read_mask_files(directory, k, class_table) for k in range(n_frames)]


# ----------------------------------------------------------------------
# Datasets
# ----------------------------------------------------------------------
class DatasetDirectory(FrameDataset):
    """A dataset read lazily from a directory in the layout above."""

    def __init__(self, root: Path) -> None:
        if not root.is_dir():
            raise DatasetError(f"dataset directory not found: {root}")
        camera_file = read_camera_file(root / "camera.cfg")
        classes_path = root / "classes.csv"
        class_table = (
            ClassTable.from_csv(classes_path) if classes_path.exists() else ClassTable.coco_default()
        )
        super().__init__(
            camera_file.camera,
            class_table,
            tracking_overrides=camera_file.tracking_overrides,
            descriptor_bytes=camera_file.descriptor_bytes,
        )
        self.root = root
        self._timestamps = self._read_frames(root / "frames.txt")
        gt_path = root / "groundtruth.txt"
        self._groundtruth = read_tum(gt_path) if gt_path.exists() else None
        scene_path = root / "scene.yaml"
        self.scene: SceneSpec | None = None
        if scene_path.exists():
            try:
                self.scene = load_scene_spec(scene_path)
            except InvalidSpec as exc:
                logger.warning("Ignoring unreadable scene spec %s: %s", scene_path, exc)
        logger.info("Opened dataset %s with %d frames", root, len(self._timestamps))

    @staticmethod
    def _read_frames(path: Path) -> np.ndarray:
        if not path.exists():
            raise DatasetError(f"frame list not found: {path}")
        try:
            frame = pd.read_csv(
                path,
                sep=r"\s+",
                header=None,
                names=["index", "timestamp"],
                float_precision="round_trip",
            )
        except pd.errors.EmptyDataError as exc:
            raise DatasetError(f"frame list {path} is empty") from exc
        if list(frame["index"]) != list(range(len(frame))):
            raise DatasetError(f"frame list {path} must number frames 0..n-1")
        return frame["timestamp"].to_numpy(dtype=np.float64)

    def __len__(self) -> int:
        return int(self._timestamps.size)

    @property
    def timestamps(self) -> np.ndarray:
        return self._timestamps.copy()

    @property
    def groundtruth(self) -> Trajectory | None:
        return self._groundtruth

    def observation(self, index: int) -> FrameObservation:
        features = read_features(
            self.root / "features" / frame_name(index, ".txt"), self.descriptor_bytes
        )
        depth_grid = read_pgm(self.root / "depth" / frame_name(index, ".pgm"))
        if depth_grid.shape != self.camera.shape:
            raise DatasetError(
                f"frame {index}: depth grid {depth_grid.shape} does not match camera {self.camera.shape}"
            )
        landmark_ids = features["landmark_id"].fillna(NO_LANDMARK).to_numpy(dtype=np.int64)
        try:
            return FrameObservation(
                frame_index=index,
                timestamp=float(self._timestamps[index]),
                pixels=features[["u", "v"]].to_numpy(dtype=np.float64).reshape(-1, 2),
                raw_depth=features["raw_depth"].to_numpy(dtype=np.float64),
                descriptors=_descriptor_array(list(features["descriptor"]), self.descriptor_bytes),
                depth_grid=depth_grid,
                landmark_ids=landmark_ids,
            )
        except ValidationError as exc:
            raise DatasetError(f"frame {index}: {exc}") from exc

    def ground_truth_segmentation(self, index: int) -> FrameSegmentation | None:
        masks = self.root / "masks"
        if not (masks / frame_name(index, ".pgm")).exists():
            return None
        return read_mask_files(masks, index, self.class_table)


class BundleDataset(FrameDataset):
    """A simulated bundle served from memory."""

    def __init__(self, bundle: GroundTruthBundle) -> None:
        super().__init__(
            bundle.camera, bundle.class_table, descriptor_bytes=bundle.spec.descriptor_bytes
        )
        self.bundle = bundle
        self.scene: SceneSpec | None = bundle.spec
        self._groundtruth = bundle.trajectory()

    def __len__(self) -> int:
        return len(self.bundle)

    @property
    def timestamps(self) -> np.ndarray:
        return self.bundle.timestamps

    @property
    def groundtruth(self) -> Trajectory | None:
        return self._groundtruth

    def observation(self, index: int) -> FrameObservation:
        return self.bundle.frames[index].observation

    def ground_truth_segmentation(self, index: int) -> FrameSegmentation | None:
        return self.bundle.frames[index].segmentation


def write_dataset(bundle: GroundTruthBundle, root: Path) -> Path:
    """Write a generated bundle as a dataset directory."""

    root.mkdir(parents=True, exist_ok=True)
    dump_scene_spec(bundle.spec, root / "scene.yaml")
    write_camera_file(
        root / "camera.cfg", bundle.camera, descriptor_bytes=bundle.spec.descriptor_bytes
    )
    bundle.class_table.to_csv(root / "classes.csv")
    pd.DataFrame({"index": range(len(bundle)), "timestamp": bundle.timestamps}).to_csv(
        root / "frames.txt",
        sep=" ",
        header=False,
        index=False,
        float_format="%.17g",
        lineterminator="\n",
    )
    write_tum(bundle.trajectory(), root / "groundtruth.txt")
    for frame in bundle.frames:
        obs = frame.observation
        write_features(root / "features" / frame_name(obs.frame_index, ".txt"), obs)
        write_pgm(root / "depth" / frame_name(obs.frame_index, ".pgm"), obs.depth_grid)
        (root / "masks").mkdir(parents=True, exist_ok=True)
        write_mask_files(root / "masks", frame.segmentation)
    logger.info("Wrote dataset with %d frames to %s", len(bundle), root)
    return root


def load_dataset(root: Path) -> DatasetDirectory:
    """Open a dataset directory.

    Raises:
        DatasetError: If required files are missing or malformed.
        ConfigurationError: If ``camera.cfg`` is invalid.
    """

    return DatasetDirectory(root)

"""Dataset directories, PGM images and ``camera.cfg`` files."""

from .base import FrameDataset
from .io import (
    BundleDataset,
    DatasetDirectory,
    load_dataset,
    read_features,
    read_mask_directory,
    read_mask_files,
    write_dataset,
    write_features,
    write_mask_directory,
    write_mask_files,
)
from .keyvalue import (
    CameraFile,
    camera_file_from_text,
    parse_key_values,
    read_camera_file,
    write_camera_file,
)
from .pgm import read_pgm, write_pgm

__all__ = [
    "BundleDataset",
    "CameraFile",
    "DatasetDirectory",
    "FrameDataset",
    "camera_file_from_text",
    "load_dataset",
    "parse_key_values",
    "read_camera_file",
    "read_features",
    "read_mask_directory",
    "read_mask_files",
    "read_pgm",
    "write_camera_file",
    "write_dataset",
    "write_features",
    "write_mask_directory",
    "write_mask_files",
    "write_pgm",
]

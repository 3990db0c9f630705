"""16-bit grayscale PGM images (depth grids and instance label images)."""

from __future__ import annotations

import logging
from pathlib import Path

import numpy as np
from numpy.typing import ArrayLike, NDArray
from PIL import Image, UnidentifiedImageError

from ..exceptions import DatasetError

logger = logging.getLogger(__name__)


def write_pgm(path: Path, image: ArrayLike) -> None:
    """Write a 2-D array of values in ``0..65535`` as a binary 16-bit PGM."""

    grid = np.asarray(image)
    if grid.ndim != 2:
        raise DatasetError(f"PGM image must be 2-D, got shape {grid.shape}")
    if grid.size and (grid.min() < 0 or grid.max() > np.iinfo(np.uint16).max):
        raise DatasetError(f"PGM values out of 16-bit range in {path}")
    path.parent.mkdir(parents=True, exist_ok=True)
    # Mode "I" is stored as P5 with maxval 65535.
    Image.fromarray(grid.astype(np.int32)).save(path, format="PPM")


def read_pgm(path: Path) -> NDArray[np.uint16]:
    """Read a binary or plain PGM into a ``uint16`` array.

    Raises:
        DatasetError: If the file is missing or not a grayscale PGM.
    """

    if not path.exists():
        raise DatasetError(f"image not found: {path}")
    try:
        with Image.open(path) as image:
            if image.mode not in ("L", "I", "I;16", "I;16B"):
                raise DatasetError(f"{path} is not a grayscale PGM (mode {image.mode})")
            grid = np.asarray(image)
    except (UnidentifiedImageError, OSError) as exc:
        raise DatasetError(f"cannot read image {path}: {exc}") from exc
    return grid.astype(np.uint16)

"""Binary mask morphology on padded grids."""

from __future__ import annotations

import numpy as np
from numpy.typing import NDArray
from scipy import ndimage


def close_mask(mask: NDArray[np.bool_], size: int = 3) -> NDArray[np.bool_]:
    """One-iteration closing with a ``size x size`` square.

    The grid is zero-padded first so pixels on the image border are not eroded.
    """

    pad = size
    padded = np.pad(np.asarray(mask, dtype=bool), pad)
    closed = ndimage.binary_closing(padded, structure=np.ones((size, size), bool))
    return closed[pad:-pad, pad:-pad] | mask


def dilate_mask(mask: NDArray[np.bool_], size: int = 5) -> NDArray[np.bool_]:
    """One-iteration dilation with a ``size x size`` square."""

    return ndimage.binary_dilation(
        np.asarray(mask, dtype=bool), structure=np.ones((size, size), bool)
    )

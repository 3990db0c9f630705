"""Map landmarks and their provenance labels."""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

import numpy as np
from numpy.typing import NDArray

from ..exceptions import ValidationError

NO_CLASS = -1


class Provenance(IntEnum):
    """Where a map point came from."""

    BACKGROUND = 0
    STATIC_INSTANCE = 1


@dataclass(frozen=True, eq=False)
class MapPoint:
    """A world-frame landmark.

    ``instance_class`` is the class id of the static instance the point was
    observed on, and ``None`` for background points.
    """

    position: NDArray[np.float64]
    descriptor: bytes
    provenance: Provenance
    instance_class: int | None = None
    observation_count: int = 1

    def __post_init__(self) -> None:
        position = np.array(self.position, dtype=np.float64).reshape(3)
        if not np.isfinite(position).all():
            raise ValidationError("map point position must be finite")
        if self.observation_count < 1:
            raise ValidationError("observation_count must be >= 1")
        provenance = Provenance(self.provenance)
        if provenance is Provenance.BACKGROUND and self.instance_class is not None:
            raise ValidationError("background points carry no instance class")
        if provenance is Provenance.STATIC_INSTANCE and self.instance_class is None:
            raise ValidationError("static-instance points need an instance class")
        position.flags.writeable = False
        object.__setattr__(self, "position", position)
        object.__setattr__(self, "provenance", provenance)
        object.__setattr__(self, "descriptor", bytes(self.descriptor))
        object.__setattr__(self, "observation_count", int(self.observation_count))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MapPoint):
            return NotImplemented
        return (
            bool(np.array_equal(self.position, other.position))
            and self.descriptor == other.descriptor
            and self.provenance == other.provenance
            and self.instance_class == other.instance_class
            and self.observation_count == other.observation_count
        )

    __hash__ = None  # type: ignore[assignment]

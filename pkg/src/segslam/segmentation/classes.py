"""Class table and the moveable-object shortlist."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

import pandas as pd

from ..exceptions import DatasetError, UnknownClass, ValidationError
from .regions import FrameSegmentation

logger = logging.getLogger(__name__)

# 80-category detection vocabulary, indexed from 0.
COCO_CLASS_NAMES: tuple[str, ...] = (
    "person", "bicycle", "car", "motorcycle", "airplane", "bus", "train",
    "truck", "boat", "traffic light", "fire hydrant", "stop sign",
    "parking meter", "bench", "bird", "cat", "dog", "horse", "sheep", "cow",
    "elephant", "bear", "zebra", "giraffe", "backpack", "umbrella", "handbag",
    "tie", "suitcase", "frisbee", "skis", "snowboard", "sports ball", "kite",
    "baseball bat", "baseball glove", "skateboard", "surfboard",
    "tennis racket", "bottle", "wine glass", "cup", "fork", "knife", "spoon",
    "bowl", "banana", "apple", "sandwich", "orange", "broccoli", "carrot",
    "hot dog", "pizza", "donut", "cake", "chair", "couch", "potted plant",
    "bed", "dining table", "toilet", "tv", "laptop", "mouse", "remote",
    "keyboard", "cell phone", "microwave", "oven", "toaster", "sink",
    "refrigerator", "book", "clock", "vase", "scissors", "teddy bear",
    "hair drier", "toothbrush",
)  # fmt: skip

# Categories assumed to stay where they are between visits.
FIXED_CLASS_NAMES = frozenset(
    {
        "traffic light",
        "fire hydrant",
        "stop sign",
        "parking meter",
        "bench",
        "couch",
        "potted plant",
        "bed",
        "dining table",
        "toilet",
        "tv",
        "microwave",
        "oven",
        "sink",
        "refrigerator",
        "clock",
    }
)

_TRUE_VALUES = {"1", "true", "yes", "y", "t"}
_FALSE_VALUES = {"0", "false", "no", "n", "f"}


@dataclass(frozen=True)
class ClassEntry:
    class_id: int
    name: str
    moveable: bool


class ClassTable:
    """Mapping ``class_id -> (name, moveable)``."""

    def __init__(self, entries: Iterable[ClassEntry]) -> None:
        self._entries: dict[int, ClassEntry] = {}
        for entry in entries:
            if entry.class_id in self._entries:
                raise ValidationError(f"duplicate class_id {entry.class_id}")
            self._entries[entry.class_id] = entry

    # ------------------------------------------------------------------
    # Constructors
    # ------------------------------------------------------------------
    @classmethod
    def coco_default(cls) -> ClassTable:
        """Detection vocabulary with persons, vehicles and small objects moveable."""

        return cls(
            ClassEntry(index, name, name not in FIXED_CLASS_NAMES)
            for index, name in enumerate(COCO_CLASS_NAMES)
        )

    @classmethod
    def from_csv(cls, path: Path) -> ClassTable:
        """Read a ``class_id,name,moveable`` file.

        Raises:
            DatasetError: If the file is missing or malformed.
        """

        if not path.exists():
            raise DatasetError(f"class table not found: {path}")
        try:
            frame = pd.read_csv(
                path, comment="#", dtype={"class_id": int, "name": str, "moveable": str}
            )
        except (ValueError, pd.errors.ParserError) as exc:
            raise DatasetError(f"malformed class table {path}: {exc}") from exc

        missing = {"class_id", "name", "moveable"} - set(frame.columns)
        if missing:
            raise DatasetError(f"class table {path} missing columns {sorted(missing)}")

        entries = []
        for row in frame.itertuples(index=False):
            flag = str(row.moveable).strip().lower()
            if flag in _TRUE_VALUES:
                moveable = True
            elif flag in _FALSE_VALUES:
                moveable = False
            else:
                raise DatasetError(f"invalid moveable flag {row.moveable!r} in {path}")
            entries.append(ClassEntry(int(row.class_id), str(row.name), moveable))
        logger.debug("Loaded %d classes from %s", len(entries), path)
        return cls(entries)

    # ------------------------------------------------------------------
    # Public API
    # ------------------------------------------------------------------
    def to_csv(self, path: Path) -> None:
        frame = pd.DataFrame(
            [
                {"class_id": e.class_id, "name": e.name, "moveable": int(e.moveable)}
                for e in self
            ],
            columns=["class_id", "name", "moveable"],
        )
        frame.to_csv(path, index=False)

    def is_moveable(self, class_id: int) -> bool:
        return self[class_id].moveable

    def name(self, class_id: int) -> str:
        return self[class_id].name

    def __getitem__(self, class_id: int) -> ClassEntry:
        try:
            return self._entries[class_id]
        except KeyError as exc:
            raise UnknownClass(f"class_id {class_id} not in class table") from exc

    def __contains__(self, class_id: object) -> bool:
        return class_id in self._entries

    def __iter__(self) -> Iterator[ClassEntry]:
        return iter(sorted(self._entries.values(), key=lambda e: e.class_id))

    def __len__(self) -> int:
        return len(self._entries)


def shortlist_moveable(seg: FrameSegmentation, table: ClassTable) -> FrameSegmentation:
    """Set each region's moveable flag from the class table.

    Raises:
        UnknownClass: If a region's class is not in the table.
    """

    flagged = [
        region.with_attributes(moveable=table.is_moveable(region.class_id))
        for region in seg.regions
    ]
    return seg.with_regions(flagged)

"""Per-frame stage timing in milliseconds."""

from __future__ import annotations

import time
from contextlib import contextmanager
from typing import Iterator

import pandas as pd

STAGES = ("coarse", "refine", "fine", "total")


class StageTimer:
    """Accumulates wall-clock milliseconds per stage for each frame."""

    def __init__(self) -> None:
        self._rows: list[dict[str, float]] = []
        self._current: dict[str, float] | None = None

    def start_frame(self, frame_index: int) -> None:
        self._current = {"frame": float(frame_index), **{s: 0.0 for s in STAGES}}
        self._rows.append(self._current)

    @contextmanager
    def stage(self, name: str) -> Iterator[None]:
        if self._current is None:
            raise RuntimeError("start_frame must be called before timing a stage")
        start = time.perf_counter()
        try:
            yield
        finally:
            self._current[name] += (time.perf_counter() - start) * 1000.0

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(self._rows, columns=["frame", *STAGES])
        return frame.astype({"frame": int})

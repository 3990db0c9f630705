"""Versioned little-endian binary map files.

Layout (version 1)::

    header    magic b"SSLM" | version u16 | kind u8 | reserved u8 | count u32
    point     x f64 | y f64 | z f64 | provenance u8 | instance_class i32
              | descriptor_length u16 | descriptor bytes | observation_count u32
    keyframes count u32, then per keyframe: frame_index i32 | R (9 x f64,
              row-major) | T (3 x f64)

``kind`` is 0 for a tracking map and 1 for a long-term map; ``instance_class``
is -1 for background points.
"""

from __future__ import annotations

import io
import logging
import struct
from pathlib import Path
from typing import BinaryIO

import numpy as np

from ..exceptions import MapFormatError, ValidationError
from ..geometry import Pose
from .maps import LandmarkMap, LongTermMap, TrackingMap

logger = logging.getLogger(__name__)

MAGIC = b"SSLM"
FORMAT_VERSION = 1
KIND_TRACKING = 0
KIND_LONG_TERM = 1

_HEADER = struct.Struct("<4sHBBI")
_POINT_HEAD = struct.Struct("<3dBiH")
_POINT_TAIL = struct.Struct("<I")
_COUNT = struct.Struct("<I")
_KEYFRAME = struct.Struct("<i12d")


def write_map(landmark_map: LandmarkMap, stream: BinaryIO) -> None:
    """Serialize a tracking or long-term map to a binary stream."""

    kind = KIND_LONG_TERM if isinstance(landmark_map, LongTermMap) else KIND_TRACKING
    stream.write(_HEADER.pack(MAGIC, FORMAT_VERSION, kind, 0, len(landmark_map)))
    for i in range(len(landmark_map)):
        x, y, z = (float(c) for c in landmark_map.positions[i])
        descriptor = landmark_map.descriptors[i].tobytes()
        stream.write(
            _POINT_HEAD.pack(
                x,
                y,
                z,
                int(landmark_map.provenance[i]),
                int(landmark_map.instance_classes[i]),
                len(descriptor),
            )
        )
        stream.write(descriptor)
        stream.write(_POINT_TAIL.pack(int(landmark_map.observation_counts[i])))

    keyframes = landmark_map.keyframe_poses if isinstance(landmark_map, TrackingMap) else ()
    stream.write(_COUNT.pack(len(keyframes)))
    for frame_index, pose in keyframes:
        values = [*pose.rotation.reshape(-1).tolist(), *pose.translation.tolist()]
        stream.write(_KEYFRAME.pack(int(frame_index), *values))


def _read_exact(stream: BinaryIO, size: int) -> bytes:
    data = stream.read(size)
    if len(data) != size:
        raise MapFormatError(f"truncated map file: wanted {size} bytes, got {len(data)}")
    return data


def read_map(stream: BinaryIO) -> TrackingMap | LongTermMap:
    """Parse a map written by :func:`write_map`.

    Raises:
        MapFormatError: On bad magic, unknown version or kind, or truncation.
    """

    magic, version, kind, _reserved, count = _HEADER.unpack(
        _read_exact(stream, _HEADER.size)
    )
    if magic != MAGIC:
        raise MapFormatError(f"bad magic {magic!r}")
    if version != FORMAT_VERSION:
        raise MapFormatError(f"unsupported map version {version}")
    if kind not in (KIND_TRACKING, KIND_LONG_TERM):
        raise MapFormatError(f"unknown map kind {kind}")

    positions = np.empty((count, 3))
    provenance = np.empty(count, dtype=np.uint8)
    classes = np.empty(count, dtype=np.int32)
    counts = np.empty(count, dtype=np.uint32)
    descriptors: list[bytes] = []
    for i in range(count):
        x, y, z, prov, cls_id, length = _POINT_HEAD.unpack(
            _read_exact(stream, _POINT_HEAD.size)
        )
        descriptors.append(_read_exact(stream, length))
        (counts[i],) = _POINT_TAIL.unpack(_read_exact(stream, _POINT_TAIL.size))
        positions[i] = (x, y, z)
        provenance[i] = prov
        classes[i] = cls_id

    lengths = {len(d) for d in descriptors}
    if len(lengths) > 1:
        raise MapFormatError(f"mixed descriptor lengths {sorted(lengths)}")
    descriptor_length = lengths.pop() if lengths else 32
    descriptor_array = (
        np.frombuffer(b"".join(descriptors), dtype=np.uint8).reshape(count, descriptor_length)
        if count
        else np.empty((0, descriptor_length), dtype=np.uint8)
    )

    (n_keyframes,) = _COUNT.unpack(_read_exact(stream, _COUNT.size))
    keyframes = []
    for _ in range(n_keyframes):
        frame_index, *values = _KEYFRAME.unpack(_read_exact(stream, _KEYFRAME.size))
        try:
            pose = Pose(np.array(values[:9]).reshape(3, 3), np.array(values[9:]))
        except ValidationError as exc:
            raise MapFormatError(f"invalid keyframe pose: {exc}") from exc
        keyframes.append((int(frame_index), pose))

    arrays = dict(
        positions=positions,
        descriptors=descriptor_array,
        provenance=provenance,
        instance_classes=classes,
        observation_counts=counts,
    )
    try:
        if kind == KIND_LONG_TERM:
            if keyframes:
                raise MapFormatError("long-term map carries keyframes")
            return LongTermMap(**arrays)
        return TrackingMap(**arrays, keyframe_poses=tuple(keyframes))
    except ValidationError as exc:
        raise MapFormatError(f"invalid map contents: {exc}") from exc


def map_to_bytes(landmark_map: LandmarkMap) -> bytes:
    buffer = io.BytesIO()
    write_map(landmark_map, buffer)
    return buffer.getvalue()


def map_from_bytes(data: bytes) -> TrackingMap | LongTermMap:
    return read_map(io.BytesIO(data))


def save_map(landmark_map: LandmarkMap, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("wb") as fh:
        write_map(landmark_map, fh)
    logger.info("Wrote %d map points to %s", len(landmark_map), path)


def load_map(path: Path) -> TrackingMap | LongTermMap:
    """Read a map file.

    Raises:
        MapFormatError: If the file is missing or malformed.
    """

    if not path.exists():
        raise MapFormatError(f"map file not found: {path}")
    with path.open("rb") as fh:
        landmark_map = read_map(fh)
    logger.info("Loaded %d map points from %s", len(landmark_map), path)
    return landmark_map

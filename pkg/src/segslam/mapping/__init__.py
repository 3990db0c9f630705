"""Tracking map, long-term map, relocalization and map persistence."""

from .config import MappingConfig
from .map_point import NO_CLASS, MapPoint, Provenance
from .maps import (
    DEFAULT_MERGE_RADIUS,
    LandmarkMap,
    LongTermMap,
    TrackingMap,
    update_long_term_map,
    update_tracking_map,
)
from .relocalization import descriptor_matches, relocalize, relocalize_estimate
from .serialization import (
    load_map,
    map_from_bytes,
    map_to_bytes,
    read_map,
    save_map,
    write_map,
)

__all__ = [
    "DEFAULT_MERGE_RADIUS",
    "NO_CLASS",
    "LandmarkMap",
    "LongTermMap",
    "MapPoint",
    "MappingConfig",
    "Provenance",
    "TrackingMap",
    "descriptor_matches",
    "load_map",
    "map_from_bytes",
    "map_to_bytes",
    "read_map",
    "relocalize",
    "relocalize_estimate",
    "save_map",
    "update_long_term_map",
    "update_tracking_map",
    "write_map",
]

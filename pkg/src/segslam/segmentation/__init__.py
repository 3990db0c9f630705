"""Instance masks, moveable shortlist, region matching and mask refinement."""

from .classes import ClassEntry, ClassTable, shortlist_moveable
from .corruption import CorruptionConfig, corrupt
from .morphology import close_mask, dilate_mask
from .refinement import is_overgrown, project_region, refine, resolve_overlaps
from .regions import FrameSegmentation, MotionState, SegmentedRegion
from .similarity import RegionMatch, SimilarityWeights, find_match, region_similarity

__all__ = [
    "ClassEntry",
    "ClassTable",
    "CorruptionConfig",
    "FrameSegmentation",
    "MotionState",
    "RegionMatch",
    "SegmentedRegion",
    "SimilarityWeights",
    "close_mask",
    "corrupt",
    "dilate_mask",
    "find_match",
    "is_overgrown",
    "project_region",
    "refine",
    "region_similarity",
    "resolve_overlaps",
    "shortlist_moveable",
]

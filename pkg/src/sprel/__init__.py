"""Spatial-relation caption datasets and text-to-image spatial evaluation.

Builds synthetic spatial captions from COCO-style object annotations
(triplet universe, natural-occurrence filtering, main/unseen splits,
augmented training samples) and scores generated images from detector
outputs (object accuracy, visor, conditional visor) with report tooling.
"""

from .geometry import (
    BBox,
    OPPOSITE,
    OPPOSITE_PAIRS,
    RELATION_ORDER,
    Relation,
    RelationConfig,
    centroid,
    crop,
    flip_h,
    holds,
    iou,
    valid_relations,
)
from .ingest import ImageAnnotations, IngestPolicy, ObjectInstance, load_annotations
from .metrics import Detection, DetectionSet, EvalConfig, EvalReport, aggregate, object_accuracy, visor
from .splits import ObjectPartition, SplitManifest, build_main_split, build_unseen_split
from .triplets import (
    CaptionRecord,
    SpatialTriplet,
    TripletTable,
    build_universe,
    extract_image_triplets,
    natural_filter,
    parse_caption,
    verbalize,
)
from .vocab import COCO80

__version__ = "0.1.0"

__all__ = [
    "BBox",
    "CaptionRecord",
    "COCO80",
    "Detection",
    "DetectionSet",
    "EvalConfig",
    "EvalReport",
    "ImageAnnotations",
    "IngestPolicy",
    "ObjectInstance",
    "ObjectPartition",
    "OPPOSITE",
    "OPPOSITE_PAIRS",
    "Relation",
    "RelationConfig",
    "RELATION_ORDER",
    "SpatialTriplet",
    "SplitManifest",
    "TripletTable",
    "aggregate",
    "build_main_split",
    "build_universe",
    "build_unseen_split",
    "centroid",
    "crop",
    "extract_image_triplets",
    "flip_h",
    "holds",
    "iou",
    "load_annotations",
    "natural_filter",
    "object_accuracy",
    "parse_caption",
    "valid_relations",
    "verbalize",
    "visor",
]

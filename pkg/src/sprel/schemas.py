"""JSON Schemas for the wire formats shared with external producers."""

from __future__ import annotations

from .geometry import Relation

_BBOX = {
    "type": "array",
    "items": {"type": "number", "minimum": 0},
    "minItems": 4,
    "maxItems": 4,
}

# One line of the detections file: detector outputs for one generated image.
DETECTIONS_LINE = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "$id": "sprel/detections-line.schema.json",
    "title": "Detections line",
    "type": "object",
    "required": ["caption_id", "image_index", "detections"],
    "properties": {
        "caption_id": {"type": "string", "minLength": 1},
        "image_index": {"type": "integer", "minimum": 0},
        "width": {"type": "number", "exclusiveMinimum": 0},
        "height": {"type": "number", "exclusiveMinimum": 0},
        "detections": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["label", "score", "bbox"],
                "properties": {
                    "label": {"type": "string", "minLength": 1},
                    "score": {"type": "number", "minimum": 0, "maximum": 1},
                    "bbox": _BBOX,
                },
                "additionalProperties": False,
            },
        },
    },
    "additionalProperties": False,
}

# One line of the caption manifest consumed by detectors and scorers.
CAPTION_LINE = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "$id": "sprel/caption-line.schema.json",
    "title": "Caption manifest line",
    "type": "object",
    "required": ["caption_id", "subject", "relation", "object", "text"],
    "properties": {
        "caption_id": {"type": "string", "minLength": 1},
        "subject": {"type": "string", "minLength": 1},
        "relation": {"enum": [r.value for r in Relation]},
        "object": {"type": "string", "minLength": 1},
        "text": {"type": "string", "minLength": 1},
    },
    "additionalProperties": False,
}

ALL = {
    "detections-line": DETECTIONS_LINE,
    "caption-line": CAPTION_LINE,
}

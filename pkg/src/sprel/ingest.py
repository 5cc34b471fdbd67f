"""Parse COCO-style instance annotations into validated image records."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, replace

from .errors import ParseError, SchemaError
from .geometry import BBox
from .manifest import provenance, read_jsonl, write_jsonl


@dataclass(frozen=True)
class ObjectInstance:
    label: str
    bbox: BBox
    instance_id: int


@dataclass(frozen=True)
class ImageAnnotations:
    """One image's size and its annotated object instances."""

    image_id: int | str
    width: float
    height: float
    objects: tuple[ObjectInstance, ...] = ()

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise SchemaError(f"image {self.image_id}: non-positive dimensions")
        ids = [o.instance_id for o in self.objects]
        if len(set(ids)) != len(ids):
            raise SchemaError(f"image {self.image_id}: duplicate instance ids")


@dataclass(frozen=True)
class IngestPolicy:
    """What to do with annotations that are not clean single-object boxes."""

    include_crowd: bool = False
    clamp_to_image: bool = True


@dataclass
class IngestStats:
    images: int = 0
    annotations: int = 0
    retained: int = 0
    dropped_crowd: int = 0
    dropped_zero_area: int = 0
    dropped_out_of_bounds: int = 0
    clamped: int = 0

    def as_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class _RawImage:
    width: float
    height: float
    objects: list = field(default_factory=list)


def load_annotations(
    path: str | os.PathLike,
    vocabulary: tuple[str, ...] | None = None,
    policy: IngestPolicy = IngestPolicy(),
) -> tuple[list[ImageAnnotations], IngestStats]:
    """Load a COCO instances file (2017 schema) into per-image records.

    Boxes arrive as (x, y, width, height) and are converted to corner form.
    Crowd, zero-area, and out-of-bounds instances are dropped per policy and
    counted in the returned stats. Output is sorted by image id, objects by
    instance id, so downstream seeded sampling is reproducible regardless of
    input record order.
    """
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: not valid JSON: {exc}") from exc
    for key in ("images", "annotations", "categories"):
        if key not in doc:
            raise SchemaError(f"{path}: missing top-level '{key}' section")

    categories: dict[int, str] = {}
    for cat in doc["categories"]:
        categories[cat["id"]] = cat["name"]
    if vocabulary is not None:
        vocab = set(vocabulary)
        unknown = sorted(set(categories.values()) - vocab)
        if unknown:
            raise SchemaError(f"{path}: categories outside the vocabulary: {unknown}")

    images: dict[int | str, _RawImage] = {}
    for rec in doc["images"]:
        image_id = rec["id"]
        if image_id in images:
            raise SchemaError(f"{path}: duplicate image id {image_id}")
        images[image_id] = _RawImage(width=rec["width"], height=rec["height"])

    stats = IngestStats(images=len(images))
    for idx, ann in enumerate(doc["annotations"]):
        stats.annotations += 1
        try:
            image_id = ann["image_id"]
            category_id = ann["category_id"]
            x, y, w, h = ann["bbox"]
            instance_id = ann["id"]
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"{path}: annotation record {idx}: {exc}") from exc
        if image_id not in images:
            raise SchemaError(f"{path}: annotation {instance_id} references unknown image {image_id}")
        if category_id not in categories:
            raise SchemaError(f"{path}: annotation {instance_id} references unknown category {category_id}")

        if ann.get("iscrowd", 0) and not policy.include_crowd:
            stats.dropped_crowd += 1
            continue
        if w <= 0 or h <= 0:
            stats.dropped_zero_area += 1
            continue

        img = images[image_id]
        x0, y0, x1, y1 = x, y, x + w, y + h
        if x0 < 0 or y0 < 0 or x1 > img.width or y1 > img.height:
            if not policy.clamp_to_image:
                stats.dropped_out_of_bounds += 1
                continue
            cx0 = min(max(x0, 0.0), img.width)
            cy0 = min(max(y0, 0.0), img.height)
            cx1 = min(max(x1, 0.0), img.width)
            cy1 = min(max(y1, 0.0), img.height)
            if cx1 - cx0 <= 0 or cy1 - cy0 <= 0:
                stats.dropped_out_of_bounds += 1
                continue
            stats.clamped += 1
            x0, y0, x1, y1 = cx0, cy0, cx1, cy1

        img.objects.append(
            ObjectInstance(label=categories[category_id], bbox=BBox(x0, y0, x1, y1), instance_id=instance_id)
        )
        stats.retained += 1

    out = []
    for image_id in sorted(images, key=lambda i: (isinstance(i, str), i)):
        raw = images[image_id]
        objects = tuple(sorted(raw.objects, key=lambda o: o.instance_id))
        out.append(ImageAnnotations(image_id=image_id, width=raw.width, height=raw.height, objects=objects))
    return out, stats


def write_snapshot(images: list[ImageAnnotations], path: str | os.PathLike) -> int:
    """Write the normalized one-image-per-line snapshot."""
    header = provenance("annotation-snapshot", extra={"images": len(images)})
    return write_jsonl(path, (_image_record(img) for img in images), header=header)


def _image_record(img: ImageAnnotations) -> dict:
    return {
        "image_id": img.image_id,
        "width": img.width,
        "height": img.height,
        "objects": [
            {"instance_id": o.instance_id, "label": o.label, "bbox": o.bbox.as_list()}
            for o in img.objects
        ],
    }


def read_snapshot(path: str | os.PathLike) -> list[ImageAnnotations]:
    images = []
    for rec in read_jsonl(path):
        try:
            objects = tuple(
                ObjectInstance(label=o["label"], bbox=BBox(*o["bbox"]), instance_id=o["instance_id"])
                for o in rec["objects"]
            )
            images.append(
                ImageAnnotations(
                    image_id=rec["image_id"], width=rec["width"], height=rec["height"], objects=objects
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"{path}: bad snapshot record: {exc}") from exc
    return images


def load_corpus(
    path: str | os.PathLike,
    vocabulary: tuple[str, ...] | None = None,
    policy: IngestPolicy = IngestPolicy(),
) -> tuple[list[ImageAnnotations], IngestStats | None]:
    """Load either a COCO instances file or a normalized snapshot.

    Snapshots are detected by their line-delimited records; anything else is
    parsed as the COCO schema. Snapshot loads return no ingest stats (the
    records were validated when the snapshot was written).
    """
    with open(path, encoding="utf-8") as fh:
        first = fh.readline().strip()
    is_snapshot = False
    if first:
        try:
            rec = json.loads(first)
            is_snapshot = isinstance(rec, dict) and ("image_id" in rec or "__provenance__" in rec)
        except json.JSONDecodeError:
            is_snapshot = False
    if is_snapshot:
        return read_snapshot(path), None
    images, stats = load_annotations(path, vocabulary=vocabulary, policy=policy)
    return images, stats


def restrict_labels(img: ImageAnnotations, allowed: frozenset[str]) -> ImageAnnotations:
    """Image with only the instances whose label is allowed."""
    return replace(img, objects=tuple(o for o in img.objects if o.label in allowed))

"""On-the-fly training caption sampling with relation-consistent augmentation.

Augmentations transform boxes, never pixels: the manifest records the flip
and crop window so the training stack can replay the exact transform on the
image. Every emitted triplet holds on the post-augmentation boxes by
construction, and manifests are byte-identical under a fixed seed.
"""

from __future__ import annotations

import itertools
import math
import os
import random
from dataclasses import dataclass, replace
from typing import Iterable, Iterator

from .errors import NotEnoughObjects, SchemaError
from .geometry import BBox, DEFAULT_CONFIG, Relation, RelationConfig, crop, flip_h, holds, valid_relations
from .ingest import ImageAnnotations, ObjectInstance
from .manifest import read_jsonl, write_jsonl
from .triplets import SpatialTriplet, verbalize

_IMAGE_RETRY_BUDGET = 50
_PAIR_RETRY_BUDGET = 50


@dataclass(frozen=True)
class SamplerConfig:
    k: int = 2
    max_iter: int = 10
    crop_scale_range: tuple[float, float] | None = (0.5, 1.0)
    flip_probability: float = 0.5
    allowed_objects: frozenset[str] | None = None
    min_visible_area: float = 0.0
    seed: int = 0
    relation_config: RelationConfig = DEFAULT_CONFIG

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.crop_scale_range is not None:
            lo, hi = self.crop_scale_range
            if not (0 < lo <= hi <= 1):
                raise ValueError("crop scale fractions must satisfy 0 < lo <= hi <= 1")
        if not (0 <= self.flip_probability <= 1):
            raise ValueError("flip_probability must be in [0, 1]")
        if self.min_visible_area < 0:
            raise ValueError("min_visible_area must be >= 0")


@dataclass(frozen=True)
class AugmentationRecord:
    flipped: bool
    crop_window: BBox | None  # in post-flip image coordinates


@dataclass(frozen=True)
class TrainingSample:
    image_id: int | str
    text: str
    triplets: tuple[SpatialTriplet, ...]
    pair_ids: tuple[tuple[int, int], ...]  # (subject, object) instance ids per triplet
    flipped: bool
    crop_window: BBox | None
    seed: int

    def as_dict(self) -> dict:
        return {
            "image_id": self.image_id,
            "text": self.text,
            "triplets": [
                {**t.as_dict(), "subject_id": sid, "object_id": oid}
                for t, (sid, oid) in zip(self.triplets, self.pair_ids)
            ],
            "flip": self.flipped,
            "crop": self.crop_window.as_list() if self.crop_window else None,
            "seed": self.seed,
        }


def _eligible(obj: ObjectInstance, cfg: SamplerConfig) -> bool:
    if cfg.allowed_objects is not None and obj.label not in cfg.allowed_objects:
        return False
    return obj.bbox.area > cfg.min_visible_area


def apply_record(img: ImageAnnotations, record: AugmentationRecord) -> ImageAnnotations:
    """Replay a recorded augmentation on an unaugmented image."""
    out = img
    if record.flipped:
        out = replace(
            out,
            objects=tuple(
                replace(o, bbox=flip_h(o.bbox, out.width)) for o in out.objects
            ),
        )
    if record.crop_window is not None:
        window = record.crop_window
        survivors = []
        for o in out.objects:
            clipped = crop(o.bbox, window)
            if clipped is not None:
                survivors.append(replace(o, bbox=clipped))
        out = replace(
            out,
            width=window.width,
            height=window.height,
            objects=tuple(survivors),
        )
    return out


def augment(
    img: ImageAnnotations, cfg: SamplerConfig, rng: random.Random
) -> tuple[ImageAnnotations, AugmentationRecord]:
    """Random flip then random crop, redrawing the crop while it leaves
    fewer than two eligible objects; falls back to the uncropped image
    after max_iter failed draws."""
    if sum(1 for o in img.objects if _eligible(o, cfg)) < 2:
        raise NotEnoughObjects(f"image {img.image_id} has fewer than 2 eligible objects")

    flipped = rng.random() < cfg.flip_probability
    base = apply_record(img, AugmentationRecord(flipped=flipped, crop_window=None))

    if cfg.crop_scale_range is not None:
        lo, hi = cfg.crop_scale_range
        for _ in range(cfg.max_iter):
            fraction = rng.uniform(lo, hi)
            w = base.width * math.sqrt(fraction)
            h = base.height * math.sqrt(fraction)
            x0 = rng.uniform(0, base.width - w)
            y0 = rng.uniform(0, base.height - h)
            window = BBox(x0, y0, x0 + w, y0 + h)
            cropped = apply_record(base, AugmentationRecord(flipped=False, crop_window=window))
            if sum(1 for o in cropped.objects if _eligible(o, cfg)) >= 2:
                return cropped, AugmentationRecord(flipped=flipped, crop_window=window)

    return base, AugmentationRecord(flipped=flipped, crop_window=None)


def _relation_sort_key(r: Relation) -> str:
    return r.value


def _draw_pair_caption(
    img: ImageAnnotations,
    cfg: SamplerConfig,
    rng: random.Random,
    used_pairs: set[tuple[int, int]],
) -> tuple[SpatialTriplet, str, tuple[int, int]]:
    eligible = [o for o in img.objects if _eligible(o, cfg)]
    pairs = [
        (s, o)
        for s, o in itertools.permutations(eligible, 2)
        if s.label != o.label and (s.instance_id, o.instance_id) not in used_pairs
    ]
    if not pairs:
        raise NotEnoughObjects(f"image {img.image_id} has no unused distinct-label pair")
    for _ in range(_PAIR_RETRY_BUDGET):
        s, o = pairs[rng.randrange(len(pairs))]
        relations = sorted(
            valid_relations(s.bbox, o.bbox, cfg.relation_config), key=_relation_sort_key
        )
        if not relations:  # impossible at tolerance 0; guard for exotic configs
            continue
        relation = relations[rng.randrange(len(relations))]
        triplet = SpatialTriplet(s.label, relation, o.label)
        return triplet, verbalize(triplet), (s.instance_id, o.instance_id)
    raise NotEnoughObjects(f"image {img.image_id}: no pair with a valid relation")


def sample_caption(
    img: ImageAnnotations, cfg: SamplerConfig, rng: random.Random
) -> tuple[SpatialTriplet, str]:
    """One caption from an (augmented) image: uniform ordered pair, then a
    uniform choice among the relations that hold for it."""
    triplet, text, _ = _draw_pair_caption(img, cfg, rng, used_pairs=set())
    return triplet, text


def draw_sample(
    corpus: list[ImageAnnotations], cfg: SamplerConfig, sample_seed: int
) -> TrainingSample:
    """One training sample, fully determined by (corpus, cfg, sample_seed)."""
    rng = random.Random(sample_seed)
    for _ in range(_IMAGE_RETRY_BUDGET):
        img = corpus[rng.randrange(len(corpus))]
        try:
            augmented, record = augment(img, cfg, rng)
            used: set[tuple[int, int]] = set()
            triplets = []
            texts = []
            pair_ids = []
            for _ in range(cfg.k):
                triplet, text, pair = _draw_pair_caption(augmented, cfg, rng, used)
                used.add(pair)
                triplets.append(triplet)
                texts.append(text)
                pair_ids.append(pair)
        except NotEnoughObjects:
            continue
        return TrainingSample(
            image_id=img.image_id,
            text=" ".join(texts),
            triplets=tuple(triplets),
            pair_ids=tuple(pair_ids),
            flipped=record.flipped,
            crop_window=record.crop_window,
            seed=sample_seed,
        )
    raise NotEnoughObjects(
        f"gave up after {_IMAGE_RETRY_BUDGET} images; corpus cannot supply k={cfg.k} captions"
    )


def sample_training_batch(
    corpus: list[ImageAnnotations], cfg: SamplerConfig, n: int
) -> Iterator[TrainingSample]:
    """n independent training samples; per-sample seeds derive from cfg.seed
    so any single manifest line can be replayed in isolation."""
    if not corpus:
        raise NotEnoughObjects("empty corpus")
    master = random.Random(cfg.seed)
    for _ in range(n):
        yield draw_sample(corpus, cfg, master.getrandbits(48))


def write_training_manifest(
    samples: Iterable[TrainingSample], path: str | os.PathLike, header: dict | None = None
) -> int:
    return write_jsonl(path, (s.as_dict() for s in samples), header=header)


def verify_manifest_record(
    rec: dict,
    corpus_by_id: dict[int | str, ImageAnnotations],
    cfg: RelationConfig = DEFAULT_CONFIG,
) -> list[str]:
    """Replay a manifest line's augmentation and re-check every triplet with
    the relation predicates. Returns a list of violation descriptions."""
    problems = []
    img = corpus_by_id.get(rec["image_id"])
    if img is None:
        return [f"unknown image {rec['image_id']}"]
    window = BBox(*rec["crop"]) if rec.get("crop") else None
    replayed = apply_record(img, AugmentationRecord(flipped=rec["flip"], crop_window=window))
    boxes = {o.instance_id: o for o in replayed.objects}
    for entry in rec["triplets"]:
        try:
            relation = Relation(entry["relation"])
        except ValueError:
            problems.append(f"unknown relation {entry['relation']!r}")
            continue
        subject = boxes.get(entry["subject_id"])
        obj = boxes.get(entry["object_id"])
        if subject is None or obj is None:
            problems.append(f"instance pair {entry['subject_id']},{entry['object_id']} missing after replay")
            continue
        if subject.label != entry["subject"] or obj.label != entry["object"]:
            problems.append(f"label mismatch for pair {entry['subject_id']},{entry['object_id']}")
            continue
        if not holds(relation, subject.bbox, obj.bbox, cfg):
            problems.append(
                f"{entry['subject']} {relation} {entry['object']} fails on replayed boxes"
            )
    return problems


def read_training_manifest(path: str | os.PathLike) -> list[dict]:
    records = []
    for rec in read_jsonl(path):
        for key in ("image_id", "text", "triplets", "flip", "seed"):
            if key not in rec:
                raise SchemaError(f"{path}: training record missing {key!r}")
        records.append(rec)
    return records

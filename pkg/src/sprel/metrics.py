"""Scoring of detector outputs against spatial captions.

Three per-image binary outcomes drive everything:

* object accuracy — both requested labels detected at or above the score
  threshold;
* visor — object accuracy and the relation predicate holds on the paired
  detection boxes;
* conditional visor — visor restricted to images that pass object accuracy.

Aggregates are kept as integer counts; percentages are derived views, so
``visor% = visor_cond% * oa% / 100`` holds exactly in rational terms.
"""

from __future__ import annotations

import hashlib
import os
from collections import defaultdict
from dataclasses import dataclass

from .errors import SchemaError, ValidationError
from .geometry import (
    BBox,
    DEFAULT_CONFIG,
    OPPOSITE_PAIRS,
    Relation,
    RelationConfig,
    holds,
)
from .manifest import read_jsonl, write_jsonl
from .triplets import CaptionRecord, SpatialTriplet

PAIRING_MODES = ("best_score", "any_pair")


@dataclass(frozen=True)
class Detection:
    label: str
    score: float
    bbox: BBox

    def __post_init__(self):
        if not (0 <= self.score <= 1):
            raise SchemaError(f"detection score {self.score} outside [0, 1]")


@dataclass(frozen=True)
class DetectionSet:
    caption_id: str
    image_index: int
    detections: tuple[Detection, ...] = ()


@dataclass(frozen=True)
class EvalConfig:
    score_threshold: float = 0.1
    images_per_caption: int = 4
    pairing_mode: str = "best_score"
    relation_config: RelationConfig = DEFAULT_CONFIG

    def __post_init__(self):
        if not (0 <= self.score_threshold <= 1):
            raise ValueError("score_threshold must be in [0, 1]")
        if self.images_per_caption < 1:
            raise ValueError("images_per_caption must be >= 1")
        if self.pairing_mode not in PAIRING_MODES:
            raise ValueError(f"pairing_mode must be one of {PAIRING_MODES}")

    def as_dict(self) -> dict:
        return {
            "score_threshold": self.score_threshold,
            "images_per_caption": self.images_per_caption,
            "pairing_mode": self.pairing_mode,
            "containment_tolerance": self.relation_config.containment_tolerance,
        }


def _detections_for(d: DetectionSet, label: str, threshold: float) -> list[Detection]:
    # Scores exactly at the threshold count as present.
    return [det for det in d.detections if det.label == label and det.score >= threshold]


def object_accuracy(d: DetectionSet, t: SpatialTriplet, cfg: EvalConfig) -> int:
    """1 iff both the subject and the object label are detected."""
    subj = _detections_for(d, t.subject_label, cfg.score_threshold)
    obj = _detections_for(d, t.object_label, cfg.score_threshold)
    return 1 if subj and obj else 0


def visor(d: DetectionSet, t: SpatialTriplet, cfg: EvalConfig) -> int:
    """1 iff both objects are detected and the relation holds between them.

    With multiple detections per label, best_score pairing evaluates the
    highest-scoring box of each label; any_pair accepts any subject/object
    detection combination that satisfies the relation.
    """
    subj = _detections_for(d, t.subject_label, cfg.score_threshold)
    obj = _detections_for(d, t.object_label, cfg.score_threshold)
    if not subj or not obj:
        return 0
    if cfg.pairing_mode == "best_score":
        best_s = max(subj, key=lambda det: det.score)
        best_o = max(obj, key=lambda det: det.score)
        ok = holds(t.relation, best_s.bbox, best_o.bbox, cfg.relation_config)
        return 1 if ok else 0
    for s in subj:
        for o in obj:
            if holds(t.relation, s.bbox, o.bbox, cfg.relation_config):
                return 1
    return 0


@dataclass
class MetricCounts:
    """Pooled integer counts behind every aggregate row."""

    n_images: int = 0
    n_oa: int = 0
    n_visor: int = 0

    def add(self, oa: int, vis: int) -> None:
        self.n_images += 1
        self.n_oa += oa
        self.n_visor += vis

    def merge(self, other: "MetricCounts") -> None:
        self.n_images += other.n_images
        self.n_oa += other.n_oa
        self.n_visor += other.n_visor

    @property
    def oa_percent(self) -> float | None:
        if self.n_images == 0:
            return None
        return 100.0 * self.n_oa / self.n_images

    @property
    def visor_percent(self) -> float | None:
        if self.n_images == 0:
            return None
        return 100.0 * self.n_visor / self.n_images

    @property
    def visor_cond_percent(self) -> float | None:
        # Absent (not 0) when no image passed object accuracy.
        if self.n_oa == 0:
            return None
        return 100.0 * self.n_visor / self.n_oa

    def as_dict(self) -> dict:
        return {
            "n_images": self.n_images,
            "n_oa": self.n_oa,
            "n_visor": self.n_visor,
            "oa": self.oa_percent,
            "visor": self.visor_percent,
            "visor_cond": self.visor_cond_percent,
        }

    @classmethod
    def from_dict(cls, rec: dict) -> "MetricCounts":
        return cls(n_images=rec["n_images"], n_oa=rec["n_oa"], n_visor=rec["n_visor"])


@dataclass
class EvalReport:
    config: EvalConfig
    overall: MetricCounts
    per_relation: dict[Relation, MetricCounts]
    per_triplet: dict[SpatialTriplet, MetricCounts]
    caption_count: int
    caption_digest: str

    def pair_rows(self) -> list[dict]:
        """Conditional-visor comparison for each opposite relation pair."""
        rows = []
        for first, second in OPPOSITE_PAIRS:
            a = self.per_relation.get(first)
            b = self.per_relation.get(second)
            va = a.visor_cond_percent if a else None
            vb = b.visor_cond_percent if b else None
            rows.append(
                {
                    "first": first.value,
                    "second": second.value,
                    "visor_cond_first": va,
                    "visor_cond_second": vb,
                    "delta": (va - vb) if va is not None and vb is not None else None,
                }
            )
        return rows

    def as_dict(self) -> dict:
        return {
            "config": self.config.as_dict(),
            "caption_count": self.caption_count,
            "caption_digest": self.caption_digest,
            "overall": self.overall.as_dict(),
            "per_relation": {
                r.value: c.as_dict()
                for r, c in sorted(self.per_relation.items(), key=lambda kv: kv[0].value)
            },
            "per_pair": self.pair_rows(),
            "per_triplet": [
                {**t.as_dict(), **c.as_dict()}
                for t, c in sorted(self.per_triplet.items(), key=lambda kv: kv[0])
            ],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "EvalReport":
        try:
            cfg_doc = doc["config"]
            config = EvalConfig(
                score_threshold=cfg_doc["score_threshold"],
                images_per_caption=cfg_doc["images_per_caption"],
                pairing_mode=cfg_doc["pairing_mode"],
                relation_config=RelationConfig(cfg_doc.get("containment_tolerance", 0.0)),
            )
            return cls(
                config=config,
                overall=MetricCounts.from_dict(doc["overall"]),
                per_relation={
                    Relation(r): MetricCounts.from_dict(c)
                    for r, c in doc["per_relation"].items()
                },
                per_triplet={
                    SpatialTriplet.from_dict(rec): MetricCounts.from_dict(rec)
                    for rec in doc["per_triplet"]
                },
                caption_count=doc["caption_count"],
                caption_digest=doc["caption_digest"],
            )
        except KeyError as exc:
            raise SchemaError(f"evaluation report missing field: {exc}") from exc


def caption_set_digest(captions: list[CaptionRecord]) -> str:
    blob = "\n".join(sorted(c.caption_id for c in captions))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


def aggregate(
    detection_sets: list[DetectionSet],
    captions: list[CaptionRecord],
    cfg: EvalConfig = EvalConfig(),
) -> EvalReport:
    """Score a full run and pool counts overall, per relation, and per triplet.

    Every caption must come with exactly images_per_caption detection sets;
    anything missing, extra, or unknown fails validation up front.
    """
    by_caption: dict[str, list[DetectionSet]] = defaultdict(list)
    for ds in detection_sets:
        by_caption[ds.caption_id].append(ds)

    caption_ids = {c.caption_id for c in captions}
    unknown = sorted(set(by_caption) - caption_ids)
    if unknown:
        raise ValidationError(f"detections reference unknown caption ids: {unknown[:20]}")
    bad_counts = {}
    for c in captions:
        sets = by_caption.get(c.caption_id, [])
        indices = sorted(ds.image_index for ds in sets)
        if len(sets) != cfg.images_per_caption or indices != list(range(cfg.images_per_caption)):
            bad_counts[c.caption_id] = len(sets)
    if bad_counts:
        listing = ", ".join(f"{cid}({n})" for cid, n in sorted(bad_counts.items())[:20])
        raise ValidationError(
            f"{len(bad_counts)} captions without exactly "
            f"{cfg.images_per_caption} detection sets: {listing}"
        )

    overall = MetricCounts()
    per_relation: dict[Relation, MetricCounts] = defaultdict(MetricCounts)
    per_triplet: dict[SpatialTriplet, MetricCounts] = defaultdict(MetricCounts)
    for c in captions:
        for ds in sorted(by_caption[c.caption_id], key=lambda d: d.image_index):
            oa = object_accuracy(ds, c.triplet, cfg)
            vis = visor(ds, c.triplet, cfg) if oa else 0
            overall.add(oa, vis)
            per_relation[c.triplet.relation].add(oa, vis)
            per_triplet[c.triplet].add(oa, vis)

    return EvalReport(
        config=cfg,
        overall=overall,
        per_relation=dict(per_relation),
        per_triplet=dict(per_triplet),
        caption_count=len(captions),
        caption_digest=caption_set_digest(captions),
    )


def read_detections(path: str | os.PathLike) -> list[DetectionSet]:
    """Read the line-delimited detections contract.

    Records carrying explicit ``width``/``height`` fields are interpreted as
    normalized [0,1] coordinates and converted to pixels on the way in.
    """
    seen: set[tuple[str, int]] = set()
    out = []
    for rec in read_jsonl(path):
        try:
            caption_id = str(rec["caption_id"])
            image_index = int(rec["image_index"])
            width = rec.get("width")
            height = rec.get("height")
            detections = []
            for d in rec["detections"]:
                x0, y0, x1, y1 = d["bbox"]
                if width is not None and height is not None:
                    x0, x1 = x0 * width, x1 * width
                    y0, y1 = y0 * height, y1 * height
                detections.append(
                    Detection(label=d["label"], score=float(d["score"]), bbox=BBox(x0, y0, x1, y1))
                )
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"{path}: bad detection record: {exc}") from exc
        key = (caption_id, image_index)
        if key in seen:
            raise SchemaError(f"{path}: duplicate detection set for {key}")
        seen.add(key)
        out.append(DetectionSet(caption_id, image_index, tuple(detections)))
    return out


def write_detections(sets: list[DetectionSet], path: str | os.PathLike, header: dict | None = None) -> int:
    records = (
        {
            "caption_id": ds.caption_id,
            "image_index": ds.image_index,
            "detections": [
                {"label": d.label, "score": d.score, "bbox": d.bbox.as_list()}
                for d in ds.detections
            ],
        }
        for ds in sets
    )
    return write_jsonl(path, records, header=header)

"""Synthetic detection generator with planted correctness rates.

Produces a detections file in the shared contract without running any
detector: per image, both requested objects appear with probability
``oa_rate``; given that, the requested relation holds with probability
``relation_rate``. Used for end-to-end pipeline dry runs and calibration
tests of the scoring path.
"""

from __future__ import annotations

import random

from .geometry import BBox, Relation, holds
from .metrics import Detection, DetectionSet
from .triplets import CaptionRecord, SpatialTriplet

# Canonical box pairs: for every relation one (subject, object) pair that
# satisfies it and one that violates it. All pairs live in a 100x100 canvas.
_SAT: dict[Relation, tuple[BBox, BBox]] = {
    Relation.LEFT_OF: (BBox(0, 0, 20, 20), BBox(40, 0, 60, 20)),
    Relation.RIGHT_OF: (BBox(40, 0, 60, 20), BBox(0, 0, 20, 20)),
    Relation.ABOVE: (BBox(0, 0, 20, 20), BBox(0, 40, 20, 60)),
    Relation.BELOW: (BBox(0, 40, 20, 60), BBox(0, 0, 20, 20)),
    Relation.OVERLAPPING: (BBox(0, 0, 30, 30), BBox(15, 15, 45, 45)),
    Relation.SEPARATED: (BBox(0, 0, 20, 20), BBox(50, 50, 70, 70)),
    Relation.SURROUNDING: (BBox(0, 0, 60, 60), BBox(20, 20, 40, 40)),
    Relation.INSIDE: (BBox(20, 20, 40, 40), BBox(0, 0, 60, 60)),
    Relation.TALLER: (BBox(0, 0, 20, 60), BBox(40, 0, 60, 20)),
    Relation.SHORTER: (BBox(0, 0, 20, 20), BBox(40, 0, 60, 60)),
    Relation.WIDER: (BBox(0, 0, 60, 20), BBox(0, 40, 20, 60)),
    Relation.NARROWER: (BBox(0, 0, 20, 20), BBox(0, 40, 60, 60)),
    Relation.LARGER: (BBox(0, 0, 50, 50), BBox(60, 0, 80, 20)),
    Relation.SMALLER: (BBox(0, 0, 20, 20), BBox(30, 0, 80, 50)),
}


def _violating(relation: Relation) -> tuple[BBox, BBox]:
    # Swapping the satisfying pair violates every non-symmetric relation;
    # the two symmetric topological ones swap with each other instead.
    if relation is Relation.OVERLAPPING:
        return _SAT[Relation.SEPARATED]
    if relation is Relation.SEPARATED:
        return _SAT[Relation.OVERLAPPING]
    s, o = _SAT[relation]
    return o, s


for _r, (_s, _o) in _SAT.items():
    assert holds(_r, _s, _o), f"satisfying pair broken for {_r}"
    _vs, _vo = _violating(_r)
    assert not holds(_r, _vs, _vo), f"violating pair broken for {_r}"


def plant_detections(t: SpatialTriplet, correct: bool) -> tuple[Detection, Detection]:
    s, o = _SAT[t.relation] if correct else _violating(t.relation)
    return (
        Detection(label=t.subject_label, score=0.9, bbox=s),
        Detection(label=t.object_label, score=0.8, bbox=o),
    )


def generate(
    captions: list[CaptionRecord],
    oa_rate: float,
    relation_rate: float,
    images_per_caption: int,
    seed: int,
) -> list[DetectionSet]:
    """Planted detection sets for every (caption, image index)."""
    if not (0 <= oa_rate <= 1 and 0 <= relation_rate <= 1):
        raise ValueError("rates must be in [0, 1]")
    rng = random.Random(seed)
    out = []
    for c in captions:
        for index in range(images_per_caption):
            if rng.random() < oa_rate:
                dets = plant_detections(c.triplet, correct=rng.random() < relation_rate)
            else:
                # Miss one or both objects so object accuracy is 0.
                keep_subject = rng.random() < 0.5
                if keep_subject:
                    dets = (Detection(c.triplet.subject_label, 0.9, _SAT[c.triplet.relation][0]),)
                else:
                    dets = ()
            out.append(DetectionSet(caption_id=c.caption_id, image_index=index, detections=tuple(dets)))
    return out

"""Bounding-box arithmetic, spatial relation predicates, and box transforms.

Coordinates follow the image convention: x grows rightward, y grows
downward, boxes are axis-aligned with top-left (x0, y0) and bottom-right
(x1, y1) corners in pixels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum


class Relation(str, Enum):
    """The 14 unambiguous spatial relations between two boxes."""

    LEFT_OF = "left_of"
    RIGHT_OF = "right_of"
    ABOVE = "above"
    BELOW = "below"
    OVERLAPPING = "overlapping"
    SEPARATED = "separated"
    SURROUNDING = "surrounding"
    INSIDE = "inside"
    TALLER = "taller"
    SHORTER = "shorter"
    WIDER = "wider"
    NARROWER = "narrower"
    LARGER = "larger"
    SMALLER = "smaller"

    def __str__(self) -> str:  # so f-strings print the wire value
        return self.value


PROJECTIVE = frozenset(
    {Relation.LEFT_OF, Relation.RIGHT_OF, Relation.ABOVE, Relation.BELOW}
)
TOPOLOGICAL = frozenset(
    {Relation.OVERLAPPING, Relation.SEPARATED, Relation.SURROUNDING, Relation.INSIDE}
)
SCALE = frozenset(
    {
        Relation.TALLER,
        Relation.SHORTER,
        Relation.WIDER,
        Relation.NARROWER,
        Relation.LARGER,
        Relation.SMALLER,
    }
)

# Display/report order: projective, topological, scale.
RELATION_ORDER: tuple[Relation, ...] = (
    Relation.LEFT_OF,
    Relation.RIGHT_OF,
    Relation.ABOVE,
    Relation.BELOW,
    Relation.OVERLAPPING,
    Relation.SEPARATED,
    Relation.SURROUNDING,
    Relation.INSIDE,
    Relation.TALLER,
    Relation.SHORTER,
    Relation.WIDER,
    Relation.NARROWER,
    Relation.LARGER,
    Relation.SMALLER,
)

# Each relation paired with its mirrored-meaning counterpart.
OPPOSITE: dict[Relation, Relation] = {
    Relation.LEFT_OF: Relation.RIGHT_OF,
    Relation.RIGHT_OF: Relation.LEFT_OF,
    Relation.ABOVE: Relation.BELOW,
    Relation.BELOW: Relation.ABOVE,
    Relation.OVERLAPPING: Relation.SEPARATED,
    Relation.SEPARATED: Relation.OVERLAPPING,
    Relation.SURROUNDING: Relation.INSIDE,
    Relation.INSIDE: Relation.SURROUNDING,
    Relation.TALLER: Relation.SHORTER,
    Relation.SHORTER: Relation.TALLER,
    Relation.WIDER: Relation.NARROWER,
    Relation.NARROWER: Relation.WIDER,
    Relation.LARGER: Relation.SMALLER,
    Relation.SMALLER: Relation.LARGER,
}

# Canonical (first, second) orientation of the seven opposite pairs.
OPPOSITE_PAIRS: tuple[tuple[Relation, Relation], ...] = (
    (Relation.LEFT_OF, Relation.RIGHT_OF),
    (Relation.ABOVE, Relation.BELOW),
    (Relation.OVERLAPPING, Relation.SEPARATED),
    (Relation.SURROUNDING, Relation.INSIDE),
    (Relation.TALLER, Relation.SHORTER),
    (Relation.WIDER, Relation.NARROWER),
    (Relation.LARGER, Relation.SMALLER),
)


def relation_type(r: Relation) -> str:
    if r in PROJECTIVE:
        return "projective"
    if r in TOPOLOGICAL:
        return "topological"
    return "scale"


@dataclass(frozen=True)
class BBox:
    """Axis-aligned box; corners in pixel coordinates, x1 >= x0 and y1 >= y0."""

    x0: float
    y0: float
    x1: float
    y1: float

    def __post_init__(self):
        coords = (self.x0, self.y0, self.x1, self.y1)
        if not all(math.isfinite(c) for c in coords):
            raise ValueError(f"box coordinates must be finite, got {coords}")
        if min(coords) < 0:
            raise ValueError(f"box coordinates must be >= 0, got {coords}")
        if self.x1 < self.x0 or self.y1 < self.y0:
            raise ValueError(f"box corners out of order: {coords}")

    @property
    def width(self) -> float:
        return self.x1 - self.x0

    @property
    def height(self) -> float:
        return self.y1 - self.y0

    @property
    def area(self) -> float:
        return self.width * self.height

    def as_list(self) -> list[float]:
        return [self.x0, self.y0, self.x1, self.y1]


@dataclass(frozen=True)
class RelationConfig:
    """Knobs for the relation predicates.

    containment_tolerance widens the container box by that many pixels on
    every side before the surrounding/inside check (closed intervals).
    """

    containment_tolerance: float = 0.0

    def __post_init__(self):
        if self.containment_tolerance < 0:
            raise ValueError("containment_tolerance must be >= 0")


DEFAULT_CONFIG = RelationConfig()


def centroid(b: BBox) -> tuple[float, float]:
    """Center point of a box."""
    return ((b.x0 + b.x1) / 2, (b.y0 + b.y1) / 2)


def iou(a: BBox, b: BBox) -> float:
    """Intersection over union; 0 when disjoint or when the union has no area."""
    iw = min(a.x1, b.x1) - max(a.x0, b.x0)
    ih = min(a.y1, b.y1) - max(a.y0, b.y0)
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    union = a.area + b.area - inter
    if union <= 0:
        return 0.0
    return inter / union


def _contains(outer: BBox, inner: BBox, tol: float) -> bool:
    # inner lies within outer expanded by tol on all sides (closed intervals).
    return (
        outer.x0 - tol <= inner.x0
        and outer.x1 + tol >= inner.x1
        and outer.y0 - tol <= inner.y0
        and outer.y1 + tol >= inner.y1
    )


def holds(r: Relation, bb_s: BBox, bb_o: BBox, cfg: RelationConfig = DEFAULT_CONFIG) -> bool:
    """Whether relation ``r`` holds between subject box and object box.

    Projective relations compare centroid coordinates (strict inequality,
    y downward so "above" means a smaller y). Scale relations compare
    height, width, or area. Overlapping/separated split on IoU > 0.
    Surrounding/inside are containment with the configured tolerance.
    """
    if r is Relation.LEFT_OF:
        return (bb_s.x0 + bb_s.x1) < (bb_o.x0 + bb_o.x1)
    if r is Relation.RIGHT_OF:
        return (bb_s.x0 + bb_s.x1) > (bb_o.x0 + bb_o.x1)
    if r is Relation.ABOVE:
        return (bb_s.y0 + bb_s.y1) < (bb_o.y0 + bb_o.y1)
    if r is Relation.BELOW:
        return (bb_s.y0 + bb_s.y1) > (bb_o.y0 + bb_o.y1)
    if r is Relation.TALLER:
        return bb_s.height > bb_o.height
    if r is Relation.SHORTER:
        return bb_s.height < bb_o.height
    if r is Relation.WIDER:
        return bb_s.width > bb_o.width
    if r is Relation.NARROWER:
        return bb_s.width < bb_o.width
    if r is Relation.LARGER:
        return bb_s.area > bb_o.area
    if r is Relation.SMALLER:
        return bb_s.area < bb_o.area
    if r is Relation.OVERLAPPING:
        return iou(bb_s, bb_o) > 0
    if r is Relation.SEPARATED:
        return iou(bb_s, bb_o) == 0
    if r is Relation.SURROUNDING:
        return _contains(bb_s, bb_o, cfg.containment_tolerance)
    if r is Relation.INSIDE:
        return _contains(bb_o, bb_s, cfg.containment_tolerance)
    raise ValueError(f"unknown relation {r!r}")


def valid_relations(
    bb_s: BBox, bb_o: BBox, cfg: RelationConfig = DEFAULT_CONFIG
) -> frozenset[Relation]:
    """All relations holding between the two boxes, computed in one pass."""
    out = []
    sx = bb_s.x0 + bb_s.x1
    ox = bb_o.x0 + bb_o.x1
    if sx < ox:
        out.append(Relation.LEFT_OF)
    elif sx > ox:
        out.append(Relation.RIGHT_OF)
    sy = bb_s.y0 + bb_s.y1
    oy = bb_o.y0 + bb_o.y1
    if sy < oy:
        out.append(Relation.ABOVE)
    elif sy > oy:
        out.append(Relation.BELOW)
    sh, oh = bb_s.height, bb_o.height
    if sh > oh:
        out.append(Relation.TALLER)
    elif sh < oh:
        out.append(Relation.SHORTER)
    sw, ow = bb_s.width, bb_o.width
    if sw > ow:
        out.append(Relation.WIDER)
    elif sw < ow:
        out.append(Relation.NARROWER)
    sa, oa = sh * sw, oh * ow
    if sa > oa:
        out.append(Relation.LARGER)
    elif sa < oa:
        out.append(Relation.SMALLER)
    if iou(bb_s, bb_o) > 0:
        out.append(Relation.OVERLAPPING)
    else:
        out.append(Relation.SEPARATED)
    tol = cfg.containment_tolerance
    if _contains(bb_s, bb_o, tol):
        out.append(Relation.SURROUNDING)
    if _contains(bb_o, bb_s, tol):
        out.append(Relation.INSIDE)
    return frozenset(out)


def flip_h(b: BBox, image_width: float) -> BBox:
    """Reflect a box across the vertical axis of an image of the given width."""
    if b.x1 > image_width:
        raise ValueError(f"box {b.as_list()} exceeds image width {image_width}")
    return BBox(image_width - b.x1, b.y0, image_width - b.x0, b.y1)


def crop(b: BBox, window: BBox) -> BBox | None:
    """Clip a box to a crop window and translate into window coordinates.

    Returns None when the intersection has zero area.
    """
    ix0 = max(b.x0, window.x0)
    iy0 = max(b.y0, window.y0)
    ix1 = min(b.x1, window.x1)
    iy1 = min(b.y1, window.y1)
    if ix1 <= ix0 or iy1 <= iy0:
        return None
    return BBox(ix0 - window.x0, iy0 - window.y0, ix1 - window.x0, iy1 - window.y0)

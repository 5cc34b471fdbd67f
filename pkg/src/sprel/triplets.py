"""Spatial triplet universe, per-image extraction, frequency tables, captions.

A triplet is the ordered ⟨subject label, relation, object label⟩. The
frequency unit is one count per ordered instance pair per image: an image
with three cups left of one cat contributes 3 to ⟨cup, left_of, cat⟩.
"""

from __future__ import annotations

import difflib
import itertools
import os
import re
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

from .errors import ParseError, SchemaError
from .geometry import DEFAULT_CONFIG, Relation, RelationConfig, valid_relations
from .ingest import ImageAnnotations
from .manifest import read_jsonl, write_jsonl
from .vocab import with_article


@dataclass(frozen=True, order=True)
class SpatialTriplet:
    subject_label: str
    relation: Relation
    object_label: str

    def __post_init__(self):
        if self.subject_label == self.object_label:
            raise SchemaError(f"triplet subject and object must differ: {self.subject_label!r}")

    def as_dict(self) -> dict:
        return {
            "subject": self.subject_label,
            "relation": self.relation.value,
            "object": self.object_label,
        }

    @classmethod
    def from_dict(cls, rec: Mapping) -> "SpatialTriplet":
        try:
            return cls(rec["subject"], Relation(rec["relation"]), rec["object"])
        except (KeyError, ValueError) as exc:
            raise SchemaError(f"bad triplet record {dict(rec)!r}: {exc}") from exc


def _sort_key(t: SpatialTriplet) -> tuple[str, str, str]:
    return (t.subject_label, t.relation.value, t.object_label)


class TripletTable:
    """Occurrence counts per triplet, mergeable across images and workers."""

    def __init__(self, counts: Mapping[SpatialTriplet, int] | None = None):
        self._counts: Counter[SpatialTriplet] = Counter()
        if counts:
            for t, c in counts.items():
                if c < 0:
                    raise ValueError(f"negative count for {t}")
                if c:
                    self._counts[t] = c

    def __len__(self) -> int:
        return len(self._counts)

    def __contains__(self, t: SpatialTriplet) -> bool:
        return t in self._counts

    def __eq__(self, other) -> bool:
        return isinstance(other, TripletTable) and self._counts == other._counts

    def count(self, t: SpatialTriplet) -> int:
        return self._counts.get(t, 0)

    def items(self) -> Iterator[tuple[SpatialTriplet, int]]:
        return iter(self._counts.items())

    def triplets(self) -> set[SpatialTriplet]:
        return set(self._counts)

    def labels(self) -> set[str]:
        out = set()
        for t in self._counts:
            out.add(t.subject_label)
            out.add(t.object_label)
        return out

    def total(self) -> int:
        return sum(self._counts.values())

    def add(self, t: SpatialTriplet, n: int = 1) -> None:
        self._counts[t] += n

    def merge(self, other: "TripletTable") -> "TripletTable":
        self._counts.update(other._counts)
        return self

    def sorted_items(self) -> list[tuple[SpatialTriplet, int]]:
        return sorted(self._counts.items(), key=lambda kv: _sort_key(kv[0]))

    def write_jsonl(self, path: str | os.PathLike, header: dict | None = None) -> int:
        records = ({**t.as_dict(), "count": c} for t, c in self.sorted_items())
        return write_jsonl(path, records, header=header)

    @classmethod
    def read_jsonl(cls, path: str | os.PathLike) -> "TripletTable":
        table = cls()
        for rec in read_jsonl(path):
            table.add(SpatialTriplet.from_dict(rec), int(rec.get("count", 1)))
        return table


def build_universe(vocabulary: Iterable[str]) -> set[SpatialTriplet]:
    """All ordered distinct-label pairs crossed with the 14 relations."""
    labels = list(vocabulary)
    if len(set(labels)) != len(labels):
        raise SchemaError("vocabulary contains duplicate labels")
    return {
        SpatialTriplet(a, r, b)
        for a, b in itertools.permutations(labels, 2)
        for r in Relation
    }


def extract_image_triplets(
    img: ImageAnnotations, cfg: RelationConfig = DEFAULT_CONFIG
) -> TripletTable:
    """Triplet counts instantiated by one image's ordered instance pairs.

    Pairs of instances sharing a label are skipped: a label-level triplet
    needs distinct subject and object labels.
    """
    table = TripletTable()
    objects = img.objects
    for s, o in itertools.permutations(objects, 2):
        if s.label == o.label:
            continue
        for r in valid_relations(s.bbox, o.bbox, cfg):
            table.add(SpatialTriplet(s.label, r, o.label))
    return table


def natural_filter(
    universe: set[SpatialTriplet],
    corpus: Iterable[ImageAnnotations],
    cfg: RelationConfig = DEFAULT_CONFIG,
) -> TripletTable:
    """Corpus-wide triplet frequency table, restricted to the universe.

    The set of keys is the naturally-occurring triplet set; the counts feed
    the frequency analyses downstream.
    """
    merged = TripletTable()
    for img in corpus:
        merged.merge(extract_image_triplets(img, cfg))
    kept = {t: c for t, c in merged.items() if t in universe}
    return TripletTable(kept)


def _extract_chunk(args: tuple[list[ImageAnnotations], RelationConfig]) -> Counter:
    images, cfg = args
    merged = TripletTable()
    for img in images:
        merged.merge(extract_image_triplets(img, cfg))
    return merged._counts


def natural_filter_parallel(
    universe: set[SpatialTriplet],
    corpus: list[ImageAnnotations],
    cfg: RelationConfig = DEFAULT_CONFIG,
    workers: int = 1,
) -> TripletTable:
    """natural_filter over a worker pool; the count merge is commutative, so
    the result is identical to the single-process path."""
    if workers <= 1 or len(corpus) < 2 * workers:
        return natural_filter(universe, corpus, cfg)
    from concurrent.futures import ProcessPoolExecutor

    chunk_size = max(1, len(corpus) // (workers * 8))
    chunks = [
        (corpus[i : i + chunk_size], cfg) for i in range(0, len(corpus), chunk_size)
    ]
    merged = TripletTable()
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for counts in pool.map(_extract_chunk, chunks):
            merged.merge(TripletTable(counts))
    kept = {t: c for t, c in merged.items() if t in universe}
    return TripletTable(kept)


# Caption templates. {A} is the subject slot, {B} the object slot.
TEMPLATES: dict[Relation, str] = {
    Relation.LEFT_OF: "{A} to the left of {B}.",
    Relation.RIGHT_OF: "{A} to the right of {B}.",
    Relation.ABOVE: "{A} above {B}.",
    Relation.BELOW: "{A} below {B}.",
    Relation.OVERLAPPING: "{A} overlapping {B}.",
    Relation.SEPARATED: "{A} and {B} separated.",
    Relation.SURROUNDING: "{A} surrounding {B}.",
    Relation.INSIDE: "{A} inside of {B}.",
    Relation.TALLER: "{A} taller than {B}.",
    Relation.SHORTER: "{A} shorter than {B}.",
    Relation.WIDER: "{A} wider than {B}.",
    Relation.NARROWER: "{A} narrower than {B}.",
    Relation.LARGER: "{A} larger than {B}.",
    Relation.SMALLER: "{A} smaller than {B}.",
}


def verbalize(t: SpatialTriplet, articles: bool = True) -> str:
    """Render a triplet as its caption sentence.

    With articles (the default) labels get an indefinite article chosen by
    the vowel-initial heuristic; the sentence is capitalized and ends with
    a period either way.
    """
    a = with_article(t.subject_label) if articles else t.subject_label
    b = with_article(t.object_label) if articles else t.object_label
    text = TEMPLATES[t.relation].format(A=a, B=b)
    return text[0].upper() + text[1:]


_PARSE_PATTERNS: list[tuple[Relation, re.Pattern]] = [
    (
        r,
        re.compile(
            "^"
            + re.escape(template).replace(r"\{A\}", "(?P<A>.+?)").replace(r"\{B\}", "(?P<B>.+?)")
            + "$"
        ),
    )
    for r, template in TEMPLATES.items()
]

_ARTICLE = re.compile(r"^(?:a|an)\s+", re.IGNORECASE)


def _slot_to_label(slot: str) -> str:
    stripped = _ARTICLE.sub("", slot)
    if stripped != slot:
        return stripped
    # Bare-label caption: only the leading sentence capital needs undoing.
    return slot[0].lower() + slot[1:]


def parse_caption(text: str) -> SpatialTriplet:
    """Invert :func:`verbalize`; raises ParseError naming the nearest template."""
    for relation, pattern in _PARSE_PATTERNS:
        m = pattern.match(text)
        if m:
            return SpatialTriplet(
                _slot_to_label(m.group("A")), relation, _slot_to_label(m.group("B"))
            )
    skeletons = {tpl.format(A="X", B="Y"): tpl for tpl in TEMPLATES.values()}
    near = difflib.get_close_matches(text, list(skeletons), n=1, cutoff=0.0)
    nearest = skeletons[near[0]] if near else "?"
    raise ParseError(f"caption {text!r} matches no relation template (nearest: {nearest!r})")


@dataclass(frozen=True)
class CaptionRecord:
    caption_id: str
    triplet: SpatialTriplet
    text: str

    def as_dict(self) -> dict:
        return {"caption_id": self.caption_id, **self.triplet.as_dict(), "text": self.text}

    @classmethod
    def from_dict(cls, rec: Mapping) -> "CaptionRecord":
        triplet = SpatialTriplet.from_dict(rec)
        try:
            return cls(caption_id=str(rec["caption_id"]), triplet=triplet, text=rec["text"])
        except KeyError as exc:
            raise SchemaError(f"caption record missing field: {exc}") from exc


def make_captions(
    triplets: Iterable[SpatialTriplet], articles: bool = True, id_prefix: str = "c"
) -> list[CaptionRecord]:
    """Deterministic caption manifest: ids follow the given triplet order."""
    records = []
    for i, t in enumerate(triplets):
        records.append(CaptionRecord(f"{id_prefix}{i:06d}", t, verbalize(t, articles=articles)))
    return records


def write_captions(records: list[CaptionRecord], path: str | os.PathLike, header: dict | None = None) -> int:
    return write_jsonl(path, (r.as_dict() for r in records), header=header)


def read_captions(path: str | os.PathLike) -> list[CaptionRecord]:
    records = [CaptionRecord.from_dict(rec) for rec in read_jsonl(path)]
    seen = Counter(r.caption_id for r in records)
    dupes = sorted(cid for cid, n in seen.items() if n > 1)
    if dupes:
        raise SchemaError(f"duplicate caption ids: {dupes[:10]}")
    return records

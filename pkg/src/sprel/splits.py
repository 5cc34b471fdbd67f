"""Main and unseen evaluation splits over the naturally-occurring triplets."""

from __future__ import annotations

import os
import random
from dataclasses import dataclass

from .errors import SchemaError, ValidationError
from .manifest import provenance, read_json, write_json
from .triplets import SpatialTriplet, TripletTable, _sort_key
from .vocab import COCO80

DEFAULT_VAL_SIZE = 2500


@dataclass(frozen=True)
class ObjectPartition:
    train_objects: tuple[str, ...]
    val_objects: tuple[str, ...]
    test_objects: tuple[str, ...]

    @classmethod
    def identity(cls, vocabulary: tuple[str, ...]) -> "ObjectPartition":
        """No object-level restriction: every group is the full vocabulary."""
        v = tuple(vocabulary)
        return cls(v, v, v)

    def validate_disjoint(self, vocabulary: tuple[str, ...]) -> None:
        train, val, test = map(set, (self.train_objects, self.val_objects, self.test_objects))
        if train & val or train & test or val & test:
            raise SchemaError("partition groups overlap")
        if train | val | test != set(vocabulary):
            raise SchemaError("partition does not cover the vocabulary exactly")

    def as_dict(self) -> dict:
        return {
            "train_objects": list(self.train_objects),
            "val_objects": list(self.val_objects),
            "test_objects": list(self.test_objects),
        }

    @classmethod
    def from_dict(cls, rec: dict) -> "ObjectPartition":
        try:
            return cls(
                tuple(rec["train_objects"]),
                tuple(rec["val_objects"]),
                tuple(rec["test_objects"]),
            )
        except KeyError as exc:
            raise SchemaError(f"partition document missing field: {exc}") from exc


# Canonical 45/5/30 object partition used by the published unseen split.
UNSEEN_PARTITION = ObjectPartition(
    train_objects=(
        "person", "car", "motorcycle", "airplane", "train", "boat",
        "fire hydrant", "bench", "bird", "elephant", "bear", "giraffe",
        "handbag", "tie", "snowboard", "baseball bat", "baseball glove",
        "surfboard", "cup", "knife", "spoon", "apple", "sandwich", "orange",
        "broccoli", "carrot", "pizza", "donut", "chair", "couch",
        "potted plant", "bed", "dining table", "toilet", "laptop", "mouse",
        "remote", "keyboard", "oven", "sink", "book", "clock", "teddy bear",
        "hair drier", "toothbrush",
    ),
    val_objects=("umbrella", "cake", "tv", "refrigerator", "vase"),
    test_objects=(
        "bicycle", "bus", "truck", "traffic light", "stop sign",
        "parking meter", "cat", "dog", "horse", "sheep", "cow", "zebra",
        "backpack", "suitcase", "frisbee", "skis", "sports ball", "kite",
        "skateboard", "tennis racket", "bottle", "wine glass", "fork",
        "bowl", "banana", "hot dog", "cell phone", "microwave", "toaster",
        "scissors",
    ),
)


@dataclass(frozen=True)
class SplitManifest:
    split_kind: str  # "main" | "unseen"
    partition: ObjectPartition
    test_triplets: tuple[SpatialTriplet, ...]
    val_triplets: tuple[SpatialTriplet, ...]
    seed: int
    # label-level count of natural triplets within the train objects; training
    # samples are drawn on the fly, so no per-image caption count exists here
    train_triplet_count: int | None = None

    def as_dict(self) -> dict:
        counts: dict = {
            "test_triplets": len(self.test_triplets),
            "val_triplets": len(self.val_triplets),
        }
        if self.train_triplet_count is not None:
            counts["train_triplets_label_level"] = self.train_triplet_count
        doc = {
            "split_kind": self.split_kind,
            "seed": self.seed,
            "partition": self.partition.as_dict(),
            "counts": counts,
            "test_triplets": [t.as_dict() for t in self.test_triplets],
            "val_triplets": [t.as_dict() for t in self.val_triplets],
        }
        return doc

    def save(self, path: str | os.PathLike) -> None:
        write_json(path, self.as_dict(), header=provenance("split-manifest", seed=self.seed))

    @classmethod
    def load(cls, path: str | os.PathLike) -> "SplitManifest":
        doc = read_json(path)
        try:
            return cls(
                split_kind=doc["split_kind"],
                partition=ObjectPartition.from_dict(doc["partition"]),
                test_triplets=tuple(SpatialTriplet.from_dict(r) for r in doc["test_triplets"]),
                val_triplets=tuple(SpatialTriplet.from_dict(r) for r in doc["val_triplets"]),
                seed=doc["seed"],
                train_triplet_count=doc.get("counts", {}).get("train_triplets_label_level"),
            )
        except KeyError as exc:
            raise SchemaError(f"split manifest missing field: {exc}") from exc


def count_candidate_val_triplets(n_train: int, n_val: int) -> int:
    """Upper bound on unseen-val triplets: ordered train-val pairs both ways
    plus ordered val-val pairs, times the 14 relations."""
    if n_train < 0 or n_val < 0:
        raise ValueError("object counts must be >= 0")
    return (2 * n_train * n_val + n_val * (n_val - 1)) * 14


def build_main_split(
    natural: TripletTable,
    seed: int,
    val_size: int = DEFAULT_VAL_SIZE,
    vocabulary: tuple[str, ...] | None = None,
) -> SplitManifest:
    """Test on every naturally-occurring triplet; validate on a random subset.

    Validation triplets are drawn uniformly without replacement from the same
    set, so val is a subset of test by construction.
    """
    triplets = sorted(natural.triplets(), key=_sort_key)
    if not triplets:
        raise ValidationError("natural triplet table is empty")
    if len(triplets) < val_size:
        raise ValidationError(
            f"requested {val_size} validation triplets but only {len(triplets)} available"
        )
    rng = random.Random(seed)
    val = sorted(rng.sample(triplets, val_size), key=_sort_key)
    vocab = tuple(vocabulary) if vocabulary is not None else tuple(sorted(natural.labels()))
    return SplitManifest(
        split_kind="main",
        partition=ObjectPartition.identity(vocab),
        test_triplets=tuple(triplets),
        val_triplets=tuple(val),
        seed=seed,
        train_triplet_count=len(triplets),  # unrestricted: any natural triplet
    )


def draw_partition(vocabulary: tuple[str, ...], seed: int) -> ObjectPartition:
    """Seeded random object partition with the canonical 45/5/30 proportions."""
    labels = sorted(vocabulary)
    n = len(labels)
    if n < 3:
        raise ValidationError("need at least 3 objects to partition")
    if n == 80:
        n_train, n_val, n_test = 45, 5, 30
    else:
        n_val = max(1, round(n * 5 / 80))
        n_test = max(1, round(n * 30 / 80))
        n_train = n - n_val - n_test
        if n_train < 1:
            raise ValidationError(f"vocabulary of {n} objects is too small to partition")
    rng = random.Random(seed)
    rng.shuffle(labels)
    return ObjectPartition(
        train_objects=tuple(labels[:n_train]),
        val_objects=tuple(labels[n_train : n_train + n_val]),
        test_objects=tuple(labels[n_train + n_val :]),
    )


def build_unseen_split(
    natural: TripletTable,
    vocabulary: tuple[str, ...],
    seed: int,
    val_size: int = DEFAULT_VAL_SIZE,
    partition: ObjectPartition | None = None,
) -> SplitManifest:
    """Object-disjoint split: test triplets use test objects only; val
    triplets mention at least one val object and no test object."""
    if partition is None:
        partition = draw_partition(vocabulary, seed)
    partition.validate_disjoint(vocabulary)
    val_set = set(partition.val_objects)
    test_set = set(partition.test_objects)

    test_triplets = sorted(
        (
            t
            for t in natural.triplets()
            if t.subject_label in test_set and t.object_label in test_set
        ),
        key=_sort_key,
    )
    candidates = sorted(
        (
            t
            for t in natural.triplets()
            if (t.subject_label in val_set or t.object_label in val_set)
            and t.subject_label not in test_set
            and t.object_label not in test_set
        ),
        key=_sort_key,
    )
    if len(candidates) < val_size:
        raise ValidationError(
            f"only {len(candidates)} natural validation candidates; "
            f"{val_size} requested (short by {val_size - len(candidates)})"
        )
    rng = random.Random(seed)
    val = sorted(rng.sample(candidates, val_size), key=_sort_key)
    return SplitManifest(
        split_kind="unseen",
        partition=partition,
        test_triplets=tuple(test_triplets),
        val_triplets=tuple(val),
        seed=seed,
        train_triplet_count=train_triplet_count(natural, partition),
    )


def train_triplet_count(natural: TripletTable, partition: ObjectPartition) -> int:
    """Label-level count of natural triplets entirely within the train objects."""
    train = set(partition.train_objects)
    return sum(
        1
        for t in natural.triplets()
        if t.subject_label in train and t.object_label in train
    )


def builtin_partition() -> ObjectPartition:
    UNSEEN_PARTITION.validate_disjoint(COCO80)
    return UNSEEN_PARTITION

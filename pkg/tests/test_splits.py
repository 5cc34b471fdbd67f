import pytest

from sprel.errors import SchemaError, ValidationError
from sprel.splits import (
    ObjectPartition,
    SplitManifest,
    UNSEEN_PARTITION,
    build_main_split,
    build_unseen_split,
    builtin_partition,
    count_candidate_val_triplets,
    draw_partition,
    train_triplet_count,
)
from sprel.triplets import TripletTable, build_universe, natural_filter
from sprel.vocab import COCO80

from conftest import random_corpus

LABELS = ("dog", "cat", "chair", "car", "person")


@pytest.fixture(scope="module")
def natural():
    universe = build_universe(LABELS)
    return natural_filter(universe, random_corpus(30, seed=5))


class TestCandidateFormula:
    def test_canonical_counts(self):
        assert count_candidate_val_triplets(45, 5) == 6_580

    def test_val_only(self):
        assert count_candidate_val_triplets(0, 2) == 28

    def test_no_val_objects(self):
        assert count_candidate_val_triplets(3, 0) == 0

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            count_candidate_val_triplets(-1, 5)


class TestBuiltinPartition:
    def test_sizes(self):
        p = builtin_partition()
        assert (len(p.train_objects), len(p.val_objects), len(p.test_objects)) == (45, 5, 30)

    def test_disjoint_covering(self):
        UNSEEN_PARTITION.validate_disjoint(COCO80)

    def test_admissible_test_triplet_examples(self, natural):
        p = builtin_partition()
        test_set = set(p.test_objects)
        assert {"cat", "dog"} <= test_set  # ⟨cat, left_of, dog⟩ admissible
        assert "person" not in test_set  # ⟨cat, left_of, person⟩ excluded


class TestMainSplit:
    def test_test_is_all_natural_and_val_subset(self, natural):
        manifest = build_main_split(natural, seed=3, val_size=5)
        assert set(manifest.test_triplets) == natural.triplets()
        assert len(manifest.val_triplets) == 5
        assert set(manifest.val_triplets) <= set(manifest.test_triplets)
        assert manifest.split_kind == "main"

    def test_determinism(self, natural):
        a = build_main_split(natural, seed=9, val_size=4)
        b = build_main_split(natural, seed=9, val_size=4)
        assert a == b
        c = build_main_split(natural, seed=10, val_size=4)
        assert c.val_triplets != a.val_triplets

    def test_val_size_too_large(self, natural):
        with pytest.raises(ValidationError):
            build_main_split(natural, seed=0, val_size=len(natural) + 1)

    def test_empty_natural_rejected(self):
        with pytest.raises(ValidationError):
            build_main_split(TripletTable(), seed=0, val_size=1)


class TestUnseenSplit:
    def test_purity(self, natural):
        partition = ObjectPartition(("dog", "cat"), ("chair",), ("car", "person"))
        manifest = build_unseen_split(natural, LABELS, seed=1, val_size=3, partition=partition)
        test_labels = {l for t in manifest.test_triplets for l in (t.subject_label, t.object_label)}
        assert test_labels <= {"car", "person"}
        for t in manifest.val_triplets:
            labels = {t.subject_label, t.object_label}
            assert "chair" in labels
            assert not labels & {"car", "person"}

    def test_test_triplets_exactly_natural_over_test_objects(self, natural):
        partition = ObjectPartition(("dog", "cat"), ("chair",), ("car", "person"))
        manifest = build_unseen_split(natural, LABELS, seed=1, val_size=3, partition=partition)
        expected = {
            t
            for t in natural.triplets()
            if {t.subject_label, t.object_label} <= {"car", "person"}
        }
        assert set(manifest.test_triplets) == expected

    def test_shortfall_reported(self, natural):
        partition = ObjectPartition(("dog", "cat"), ("chair",), ("car", "person"))
        with pytest.raises(ValidationError, match="short by"):
            build_unseen_split(natural, LABELS, seed=1, val_size=10_000, partition=partition)

    def test_overlapping_partition_rejected(self, natural):
        partition = ObjectPartition(("dog", "cat"), ("cat",), ("car", "person", "chair"))
        with pytest.raises(SchemaError):
            build_unseen_split(natural, LABELS, seed=1, val_size=2, partition=partition)

    def test_seeded_partition_deterministic(self):
        assert draw_partition(COCO80, 4) == draw_partition(COCO80, 4)
        p = draw_partition(COCO80, 4)
        assert (len(p.train_objects), len(p.val_objects), len(p.test_objects)) == (45, 5, 30)
        p.validate_disjoint(COCO80)

    def test_candidate_bound_respected(self, natural):
        partition = ObjectPartition(("dog", "cat"), ("chair",), ("car", "person"))
        manifest = build_unseen_split(natural, LABELS, seed=1, val_size=3, partition=partition)
        bound = count_candidate_val_triplets(2, 1)
        candidates = {
            t
            for t in natural.triplets()
            if "chair" in (t.subject_label, t.object_label)
            and not {t.subject_label, t.object_label} & {"car", "person"}
        }
        assert len(candidates) <= bound
        assert set(manifest.val_triplets) <= candidates


class TestManifestIO:
    def test_save_load_roundtrip(self, natural, tmp_path):
        manifest = build_main_split(natural, seed=3, val_size=5)
        path = tmp_path / "split.json"
        manifest.save(path)
        assert SplitManifest.load(path) == manifest

    def test_byte_identical_rerun(self, natural, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        build_main_split(natural, seed=3, val_size=5).save(a)
        build_main_split(natural, seed=3, val_size=5).save(b)
        assert a.read_bytes() == b.read_bytes()

    def test_train_triplet_count(self, natural):
        partition = ObjectPartition(("dog", "cat"), ("chair",), ("car", "person"))
        n = train_triplet_count(natural, partition)
        expected = sum(
            1 for t in natural.triplets() if {t.subject_label, t.object_label} <= {"dog", "cat"}
        )
        assert n == expected


def test_identity_partition_for_main(natural):
    manifest = build_main_split(natural, seed=0, val_size=2, vocabulary=LABELS)
    assert manifest.partition.train_objects == LABELS
    assert manifest.partition.val_objects == LABELS
    assert manifest.partition.test_objects == LABELS

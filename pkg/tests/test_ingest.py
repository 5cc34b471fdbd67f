import json

import pytest

from sprel.errors import ParseError, SchemaError
from sprel.geometry import BBox
from sprel.ingest import (
    IngestPolicy,
    load_annotations,
    load_corpus,
    read_snapshot,
    write_snapshot,
)
from sprel.vocab import COCO80

from conftest import coco_document


def test_xywh_to_corners(coco_fixture_path):
    images, _ = load_annotations(coco_fixture_path)
    first = images[0].objects[0]
    assert first.bbox == BBox(10, 20, 40, 60)


def test_crowd_dropped_by_default(coco_fixture_path):
    images, stats = load_annotations(coco_fixture_path)
    assert stats.images == 3
    assert stats.annotations == 7
    assert stats.dropped_crowd == 1
    assert stats.retained == 6
    assert sum(len(i.objects) for i in images) == 6


def test_crowd_kept_with_policy(coco_fixture_path):
    images, stats = load_annotations(coco_fixture_path, policy=IngestPolicy(include_crowd=True))
    assert stats.dropped_crowd == 0
    assert sum(len(i.objects) for i in images) == 7


def test_count_conservation(coco_fixture_path):
    _, stats = load_annotations(coco_fixture_path)
    dropped = stats.dropped_crowd + stats.dropped_zero_area + stats.dropped_out_of_bounds
    assert stats.retained + dropped == stats.annotations


def test_out_of_bounds_clamped(coco_fixture_path):
    images, stats = load_annotations(coco_fixture_path)
    # annotation 17 extends to x=160 on a 200x100 image but y to 70: inside
    # image 3 bounds; none of the fixture boxes need clamping.
    assert stats.clamped == 0
    doc = json.loads(coco_fixture_path.read_text())
    doc["annotations"].append(
        {"id": 18, "image_id": 2, "category_id": 17, "bbox": [50, 50, 30, 30], "iscrowd": 0}
    )
    coco_fixture_path.write_text(json.dumps(doc))
    images, stats = load_annotations(coco_fixture_path)
    assert stats.clamped == 1
    clamped = [o for i in images for o in i.objects if o.instance_id == 18][0]
    assert clamped.bbox == BBox(50, 50, 64, 64)


def test_fully_outside_dropped(tmp_path):
    doc = coco_document(
        images=[{"id": 1, "width": 50, "height": 50}],
        annotations=[
            {"id": 1, "image_id": 1, "category_id": 1, "bbox": [60, 60, 10, 10], "iscrowd": 0}
        ],
        categories=[{"id": 1, "name": "person"}],
    )
    path = tmp_path / "oob.json"
    path.write_text(json.dumps(doc))
    _, stats = load_annotations(path)
    assert stats.dropped_out_of_bounds == 1
    assert stats.retained == 0


def test_zero_area_dropped(tmp_path):
    doc = coco_document(
        images=[{"id": 1, "width": 50, "height": 50}],
        annotations=[
            {"id": 1, "image_id": 1, "category_id": 1, "bbox": [10, 20, 0, 40], "iscrowd": 0}
        ],
        categories=[{"id": 1, "name": "person"}],
    )
    path = tmp_path / "zero.json"
    path.write_text(json.dumps(doc))
    _, stats = load_annotations(path)
    assert stats.dropped_zero_area == 1


def test_roundtrip_to_xywh(coco_fixture_path):
    doc = json.loads(coco_fixture_path.read_text())
    originals = {a["id"]: a["bbox"] for a in doc["annotations"] if not a["iscrowd"]}
    images, _ = load_annotations(coco_fixture_path)
    for img in images:
        for o in img.objects:
            x, y, w, h = originals[o.instance_id]
            assert (o.bbox.x0, o.bbox.y0) == (x, y)
            assert o.bbox.x1 - o.bbox.x0 == pytest.approx(w, abs=1e-9)
            assert o.bbox.y1 - o.bbox.y0 == pytest.approx(h, abs=1e-9)


def test_order_independence(coco_fixture_path, tmp_path):
    images_a, _ = load_annotations(coco_fixture_path)
    doc = json.loads(coco_fixture_path.read_text())
    doc["annotations"].reverse()
    doc["images"].reverse()
    shuffled = tmp_path / "shuffled.json"
    shuffled.write_text(json.dumps(doc))
    images_b, _ = load_annotations(shuffled)
    assert images_a == images_b


def test_objects_sorted_by_instance_id(coco_fixture_path):
    images, _ = load_annotations(coco_fixture_path)
    for img in images:
        ids = [o.instance_id for o in img.objects]
        assert ids == sorted(ids)


def test_malformed_file_raises_parse_error(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("not json {")
    with pytest.raises(ParseError):
        load_annotations(bad)


def test_unknown_category_raises_schema_error(tmp_path):
    doc = coco_document(
        images=[{"id": 1, "width": 50, "height": 50}],
        annotations=[
            {"id": 1, "image_id": 1, "category_id": 99, "bbox": [0, 0, 10, 10], "iscrowd": 0}
        ],
        categories=[{"id": 1, "name": "person"}],
    )
    path = tmp_path / "cat.json"
    path.write_text(json.dumps(doc))
    with pytest.raises(SchemaError):
        load_annotations(path)


def test_duplicate_image_id_raises_schema_error(tmp_path):
    doc = coco_document(
        images=[{"id": 1, "width": 50, "height": 50}, {"id": 1, "width": 60, "height": 60}],
        annotations=[],
        categories=[{"id": 1, "name": "person"}],
    )
    path = tmp_path / "dup.json"
    path.write_text(json.dumps(doc))
    with pytest.raises(SchemaError):
        load_annotations(path)


def test_vocabulary_mismatch_raises(tmp_path):
    doc = coco_document(
        images=[{"id": 1, "width": 50, "height": 50}],
        annotations=[],
        categories=[{"id": 1, "name": "unicorn"}],
    )
    path = tmp_path / "vocab.json"
    path.write_text(json.dumps(doc))
    with pytest.raises(SchemaError):
        load_annotations(path, vocabulary=COCO80)


def test_snapshot_roundtrip(coco_fixture_path, tmp_path):
    images, _ = load_annotations(coco_fixture_path)
    snap = tmp_path / "snapshot.jsonl"
    n = write_snapshot(images, snap)
    assert n == len(images)
    assert read_snapshot(snap) == images


def test_load_corpus_sniffs_both_formats(coco_fixture_path, tmp_path):
    images, stats = load_corpus(coco_fixture_path)
    assert stats is not None
    snap = tmp_path / "snapshot.jsonl"
    write_snapshot(images, snap)
    images2, stats2 = load_corpus(snap)
    assert stats2 is None
    assert images2 == images

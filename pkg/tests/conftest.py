import json
import random

import pytest

from sprel.geometry import BBox
from sprel.ingest import ImageAnnotations, ObjectInstance


def coco_document(images, annotations, categories):
    return {"images": images, "annotations": annotations, "categories": categories}


@pytest.fixture
def coco_fixture_path(tmp_path):
    """3 images, 7 annotations, 1 of them crowd."""
    doc = coco_document(
        images=[
            {"id": 1, "width": 100, "height": 80, "file_name": "a.jpg"},
            {"id": 2, "width": 64, "height": 64, "file_name": "b.jpg"},
            {"id": 3, "width": 200, "height": 100, "file_name": "c.jpg"},
        ],
        annotations=[
            {"id": 11, "image_id": 1, "category_id": 18, "bbox": [10, 20, 30, 40], "iscrowd": 0},
            {"id": 12, "image_id": 1, "category_id": 17, "bbox": [50, 10, 20, 20], "iscrowd": 0},
            {"id": 13, "image_id": 1, "category_id": 1, "bbox": [0, 0, 90, 70], "iscrowd": 1},
            {"id": 14, "image_id": 2, "category_id": 18, "bbox": [5, 5, 10, 10], "iscrowd": 0},
            {"id": 15, "image_id": 2, "category_id": 62, "bbox": [20, 20, 40, 30], "iscrowd": 0},
            {"id": 16, "image_id": 3, "category_id": 17, "bbox": [0, 0, 50, 50], "iscrowd": 0},
            {"id": 17, "image_id": 3, "category_id": 18, "bbox": [100, 10, 60, 60], "iscrowd": 0},
        ],
        categories=[
            {"id": 1, "name": "person"},
            {"id": 17, "name": "cat"},
            {"id": 18, "name": "dog"},
            {"id": 62, "name": "chair"},
        ],
    )
    path = tmp_path / "instances.json"
    path.write_text(json.dumps(doc))
    return path


def image(image_id, width, height, objects):
    return ImageAnnotations(
        image_id=image_id,
        width=width,
        height=height,
        objects=tuple(
            ObjectInstance(label=label, bbox=BBox(*box), instance_id=iid)
            for iid, label, box in objects
        ),
    )


@pytest.fixture
def dog_cat_image():
    return image(1, 10, 4, [(1, "dog", (0, 0, 2, 2)), (2, "cat", (4, 0, 6, 2))])


@pytest.fixture
def two_dogs_image():
    return image(2, 10, 4, [(1, "dog", (0, 0, 2, 2)), (2, "dog", (4, 0, 6, 2))])


def random_corpus(n_images, seed, labels=("dog", "cat", "chair", "car", "person")):
    """Deterministic corpus of images with 2-5 random boxes each."""
    rng = random.Random(seed)
    images = []
    for i in range(n_images):
        width, height = rng.choice([(100, 80), (64, 64), (320, 240)])
        objects = []
        for j in range(rng.randint(2, 5)):
            x0 = rng.uniform(0, width - 8)
            y0 = rng.uniform(0, height - 8)
            w = rng.uniform(4, width - x0)
            h = rng.uniform(4, height - y0)
            objects.append((j + 1, rng.choice(labels), (x0, y0, x0 + w, y0 + h)))
        images.append(image(i + 1, width, height, objects))
    return images

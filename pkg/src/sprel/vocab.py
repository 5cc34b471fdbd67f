"""Object vocabularies and caption article handling."""

from __future__ import annotations

from .errors import SchemaError

# The 80 instance categories of the COCO detection task, official order.
COCO80: tuple[str, ...] = (
    "person", "bicycle", "car", "motorcycle", "airplane", "bus", "train",
    "truck", "boat", "traffic light", "fire hydrant", "stop sign",
    "parking meter", "bench", "bird", "cat", "dog", "horse", "sheep",
    "cow", "elephant", "bear", "zebra", "giraffe", "backpack", "umbrella",
    "handbag", "tie", "suitcase", "frisbee", "skis", "snowboard",
    "sports ball", "kite", "baseball bat", "baseball glove", "skateboard",
    "surfboard", "tennis racket", "bottle", "wine glass", "cup", "fork",
    "knife", "spoon", "bowl", "banana", "apple", "sandwich", "orange",
    "broccoli", "carrot", "hot dog", "pizza", "donut", "cake", "chair",
    "couch", "potted plant", "bed", "dining table", "toilet", "tv",
    "laptop", "mouse", "remote", "keyboard", "cell phone", "microwave",
    "oven", "toaster", "sink", "refrigerator", "book", "clock", "vase",
    "scissors", "teddy bear", "hair drier", "toothbrush",
)

_VOWELS = "aeiou"


def indefinite_article(label: str) -> str:
    """"an" for vowel-initial labels, "a" otherwise."""
    return "an" if label[:1].lower() in _VOWELS else "a"


def with_article(label: str) -> str:
    return f"{indefinite_article(label)} {label}"


def load_vocabulary(spec: str) -> tuple[str, ...]:
    """Resolve a vocabulary from a builtin name ("coco80") or a text file.

    Files hold one label per line; blank lines and lines starting with '#'
    are skipped.
    """
    if spec == "coco80":
        return COCO80
    labels = []
    with open(spec, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line and not line.startswith("#"):
                labels.append(line)
    if len(set(labels)) != len(labels):
        raise SchemaError(f"vocabulary file {spec} contains duplicate labels")
    if not labels:
        raise SchemaError(f"vocabulary file {spec} is empty")
    return tuple(labels)

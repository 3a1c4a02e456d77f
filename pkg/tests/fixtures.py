"""Shared fixture builders: a synthetic annotation corpus with known
per-image counts, and compact layout constructors."""
from __future__ import annotations

from dialogdraw.layouts import (
    KIND_COCO,
    KIND_SHAPE2D,
    SCENARIO_COCO_SIMPLE,
    SCENARIO_RANDOM,
    CocoObject,
    Layout,
    ShapeObject,
)

CATEGORY_NAMES = [
    "person", "dog", "cat", "car", "chair",
    "table", "bird", "boat", "pizza", "clock",
]

# (image id, annotation count, distinct class count)
IMAGE_SPECS = [
    (1, 3, 3), (2, 4, 3), (3, 4, 4), (4, 3, 2), (5, 5, 5),
    (6, 6, 6), (7, 7, 6), (8, 8, 6), (9, 8, 8), (10, 6, 5),
    (11, 3, 3), (12, 2, 2), (13, 9, 6), (14, 4, 3), (15, 6, 6),
    (16, 1, 1), (17, 7, 7), (18, 5, 3), (19, 4, 2), (20, 8, 5),
]

# hand enumeration of which images qualify for each scenario
EXPECTED_SIMPLE_IMAGES = {1, 2, 11, 14}
EXPECTED_COMPLEX_IMAGES = {6, 7, 8, 15}

IMG_W, IMG_H = 640, 480


def ann_id(image_id: int, k: int) -> int:
    return image_id * 100 + k


def build_coco_fixture() -> dict:
    """20 images; annotation ids encode their image so tests can map back."""
    images = [{"id": i, "width": IMG_W, "height": IMG_H, "file_name": f"img{i}.jpg"}
              for i, _, _ in IMAGE_SPECS]
    categories = [{"id": c + 1, "name": name} for c, name in enumerate(CATEGORY_NAMES)]
    annotations = []
    for image_id, n_anns, n_classes in IMAGE_SPECS:
        for k in range(n_anns):
            annotations.append({
                "id": ann_id(image_id, k),
                "image_id": image_id,
                "category_id": (k % n_classes) + 1,
                "bbox": [20 + 60 * k, 30 + 30 * k, 50, 40],
            })
    # one box overruns its image and must be clamped (image 1, annotation 102)
    annotations[2]["bbox"] = [600, 440, 100, 80]
    return {"images": images, "annotations": annotations, "categories": categories}


def shape_layout(cells, scenario: str = SCENARIO_RANDOM) -> Layout:
    """cells: iterable of (color, shape, row, col)."""
    return Layout(
        kind=KIND_SHAPE2D,
        scenario=scenario,
        objects=[ShapeObject(shape=s, color=c, row=r, col=col) for c, s, r, col in cells],
    )


def coco_layout(boxes, scenario: str = SCENARIO_COCO_SIMPLE) -> Layout:
    """boxes: iterable of (id, label, x, y, w, h)."""
    return Layout(
        kind=KIND_COCO,
        scenario=scenario,
        objects=[CocoObject(id=i, class_label=lbl, x=x, y=y, w=w, h=h)
                 for i, lbl, x, y, w, h in boxes],
    )

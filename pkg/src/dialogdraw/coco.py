"""Ingest object-detection annotation files into coco layouts.

Only the annotation structure is consumed (images with dimensions,
annotations with pixel bboxes, categories); the images themselves are
never touched.  Boxes are normalized by image dimensions so downstream
code works in the unit canvas.
"""
from __future__ import annotations

import json
import logging

from .layouts import (
    KIND_COCO,
    SCENARIO_COCO_COMPLEX,
    SCENARIO_COCO_SIMPLE,
    CocoObject,
    Layout,
)

logger = logging.getLogger(__name__)

# scenario -> (instance count range, exact distinct-class count)
SCENARIO_FILTERS = {
    SCENARIO_COCO_SIMPLE: ((3, 4), 3),
    SCENARIO_COCO_COMPLEX: ((6, 8), 6),
}


class CocoFormatError(ValueError):
    """Malformed annotation document; the message names the first bad record."""


def _require(record: dict, field: str, label: str):
    if field not in record:
        raise CocoFormatError(f"{label} missing field {field!r}")
    return record[field]


def ingest_coco_annotations(document, scenario: str) -> list[Layout]:
    """Return one layout per image matching the scenario's count/class filter.

    ``document`` may be a parsed dict or a JSON string.  Boxes that overrun
    the image are clamped to the unit canvas with a logged warning.
    """
    if scenario not in SCENARIO_FILTERS:
        raise ValueError(f"unknown coco scenario {scenario!r}")
    (lo, hi), n_classes = SCENARIO_FILTERS[scenario]

    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise CocoFormatError(f"document is not valid JSON: {exc}") from exc
    if not isinstance(document, dict):
        raise CocoFormatError("document must be a JSON object")

    images = {}
    for i, img in enumerate(document.get("images", [])):
        label = f"image record {i}"
        img_id = _require(img, "id", label)
        width = _require(img, "width", label)
        height = _require(img, "height", label)
        if not (isinstance(width, (int, float)) and width > 0) or not (
            isinstance(height, (int, float)) and height > 0
        ):
            raise CocoFormatError(f"{label} (id {img_id}) has non-positive dimensions")
        images[img_id] = (float(width), float(height))

    categories = {}
    for i, cat in enumerate(document.get("categories", [])):
        label = f"category record {i}"
        categories[_require(cat, "id", label)] = _require(cat, "name", label)

    per_image: dict = {img_id: [] for img_id in images}
    for i, ann in enumerate(document.get("annotations", [])):
        label = f"annotation record {i}"
        img_id = _require(ann, "image_id", label)
        cat_id = _require(ann, "category_id", label)
        bbox = _require(ann, "bbox", label)
        if img_id not in images:
            raise CocoFormatError(f"{label} references unknown image_id {img_id}")
        if cat_id not in categories:
            raise CocoFormatError(f"{label} references unknown category_id {cat_id}")
        if not isinstance(bbox, (list, tuple)) or len(bbox) != 4:
            raise CocoFormatError(f"{label} bbox must be [x, y, width, height]")
        bx, by, bw, bh = (float(v) for v in bbox)
        if bw <= 0 or bh <= 0:
            raise CocoFormatError(f"{label} bbox has non-positive size")
        img_w, img_h = images[img_id]
        x, y, w, h = bx / img_w, by / img_h, bw / img_w, bh / img_h
        if x < 0 or y < 0 or x + w > 1 or y + h > 1:
            logger.warning("annotation %s overruns image %s; clamping box", ann.get("id", i), img_id)
            x, y = max(0.0, x), max(0.0, y)
            w, h = min(w, 1.0 - x), min(h, 1.0 - y)
        per_image[img_id].append(
            CocoObject(
                id=ann.get("id", i),
                class_label=categories[cat_id],
                x=x,
                y=y,
                w=w,
                h=h,
            )
        )

    layouts = []
    for img_id in sorted(images):
        anns = per_image[img_id]
        labels = {o.class_label for o in anns}
        if lo <= len(anns) <= hi and len(labels) == n_classes:
            layouts.append(Layout(kind=KIND_COCO, scenario=scenario, objects=anns))
    return layouts

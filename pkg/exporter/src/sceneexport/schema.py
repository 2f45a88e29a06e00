"""Canonical scene record schema: validation and byte-stable serialization.

The consumer of these files validates on load with the same rules; the
exporter embeds its own copy so that every record it writes is known-good
before it leaves this process, and so the two packages stay coupled only
through the file format itself.
"""

from __future__ import annotations

import json
import math
from typing import Any

LOCATIONS = ("left", "front", "right")
FILE_SCORE_KINDS = ("raw_logit", "cosine")

RECORD_KEYS = (
    "scene_id",
    "command",
    "image_width",
    "image_height",
    "predicted_class",
    "predicted_superclass",
    "subset_tags",
    "gt_box",
    "candidates",
    "scores",
)


class ExportError(ValueError):
    """A record cannot be exported; the message names the scene."""


def _check(condition: bool, scene_id: str, message: str) -> None:
    if not condition:
        raise ExportError(f"scene {scene_id!r}: {message}")


def _finite(value: Any) -> bool:
    return isinstance(value, (int, float)) and math.isfinite(value)


def _check_box(box: dict, scene_id: str, what: str, width: float, height: float) -> None:
    for key in ("x", "y", "w", "h"):
        _check(_finite(box.get(key)), scene_id, f"{what}.{key} must be a finite number")
    _check(box["w"] > 0 and box["h"] > 0, scene_id, f"{what} width/height must be positive")
    _check(box["x"] >= 0 and box["y"] >= 0, scene_id, f"{what} corner must be non-negative")
    _check(
        box["x"] + box["w"] <= width and box["y"] + box["h"] <= height,
        scene_id,
        f"{what} exceeds the {width}x{height} image bounds",
    )


def validate_record(record: dict, vocab: dict | None = None) -> None:
    """Raise ExportError unless the record satisfies every schema rule."""
    scene_id = record.get("scene_id", "<missing>")
    _check(isinstance(record.get("scene_id"), str) and record["scene_id"] != "",
           scene_id, "scene_id must be a nonempty string")
    _check(isinstance(record.get("command"), str), scene_id, "command must be a string")
    width, height = record.get("image_width"), record.get("image_height")
    _check(isinstance(width, int) and width > 0, scene_id, "image_width must be a positive int")
    _check(isinstance(height, int) and height > 0, scene_id, "image_height must be a positive int")
    for key in ("predicted_class", "predicted_superclass"):
        _check(isinstance(record.get(key), str) and record[key] != "",
               scene_id, f"{key} must be a nonempty string")
    _check(isinstance(record.get("subset_tags"), list), scene_id, "subset_tags must be a list")

    _check_box(record["gt_box"], scene_id, "gt_box", width, height)

    candidates = record.get("candidates")
    _check(isinstance(candidates, list) and candidates, scene_id,
           "candidates must be a nonempty list")
    previous_rpn = None
    for i, cand in enumerate(candidates):
        _check(cand.get("id") == i, scene_id, f"candidate ids must be contiguous from 0 (index {i})")
        _check_box(cand["box"], scene_id, f"candidate {i} box", width, height)
        rpn = cand.get("rpn_score")
        _check(_finite(rpn) and 0.0 <= rpn <= 1.0, scene_id,
               f"candidate {i} rpn_score must lie in [0, 1]")
        if previous_rpn is not None:
            _check(rpn <= previous_rpn, scene_id,
                   "candidates must be sorted by descending rpn_score")
        previous_rpn = rpn
        _check(isinstance(cand.get("class_label"), str) and cand["class_label"] != "",
               scene_id, f"candidate {i} class_label must be nonempty")
        _check(isinstance(cand.get("superclass_label"), str) and cand["superclass_label"] != "",
               scene_id, f"candidate {i} superclass_label must be nonempty")
        attrs = cand.get("attributes")
        if attrs is not None:
            location = attrs.get("location")
            _check(location is None or location in LOCATIONS, scene_id,
                   f"candidate {i} location must be one of {LOCATIONS}")
            if vocab is not None:
                color, action = attrs.get("color"), attrs.get("action")
                _check(color is None or color in vocab["colors"], scene_id,
                       f"candidate {i} color {color!r} not in vocabulary")
                _check(action is None or action in vocab["actions"], scene_id,
                       f"candidate {i} action {action!r} not in vocabulary")
        lidar = cand.get("lidar_distance")
        _check(lidar is None or (_finite(lidar) and lidar > 0), scene_id,
               f"candidate {i} lidar_distance must be positive when present")

    scores = record.get("scores")
    _check(isinstance(scores, dict), scene_id, "scores must be an object")
    kind = scores.get("kind")
    _check(kind in FILE_SCORE_KINDS, scene_id,
           f"score kind must be one of {FILE_SCORE_KINDS}, got {kind!r}")
    members = scores.get("members")
    _check(isinstance(members, list) and members, scene_id,
           "scores.members must be a nonempty matrix")
    for row in members:
        _check(isinstance(row, list) and len(row) == len(candidates), scene_id,
               "score/candidate count mismatch")
        for value in row:
            _check(_finite(value), scene_id, "score entries must be finite")
            if kind == "cosine":
                _check(-1.0 <= value <= 1.0, scene_id, "cosine scores must lie in [-1, 1]")


def canonical_number(value: float) -> float | int:
    """Integral values serialize as ints so repeated exports stay stable."""
    number = float(value)
    if number == int(number):
        return int(number)
    return number


def serialize_record(record: dict) -> str:
    """One canonical JSON line (fixed key order, canonical numbers)."""
    ordered = {key: record[key] for key in RECORD_KEYS}
    return json.dumps(ordered)

"""Convert upstream ensemble dumps plus annotations into canonical records.

The supported upstream layout is a directory of per-scene JSON files (one
adapter; further layouts can register alongside it). Each dump file carries
the candidate arrays and the per-member logit matrix; an optional annotation
file of the same name adds subset tags, attributes, and LiDAR data.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Callable

from .schema import ExportError, canonical_number, serialize_record, validate_record


def _read_json(path: Path) -> Any:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def load_dump_dir(dump_dir: str | Path) -> list[dict]:
    """Per-scene JSON directory adapter: every *.json file is one scene."""
    dump_dir = Path(dump_dir)
    if not dump_dir.is_dir():
        raise ExportError(f"dump directory {dump_dir} does not exist")
    dumps = []
    for path in sorted(dump_dir.glob("*.json")):
        raw = _read_json(path)
        raw.setdefault("scene_id", path.stem)
        dumps.append(raw)
    return dumps


ADAPTERS: dict[str, Callable[[str | Path], list[dict]]] = {
    "json-dir": load_dump_dir,
}


def load_annotations(annotation_dir: str | Path | None) -> dict[str, dict]:
    if annotation_dir is None:
        return {}
    annotation_dir = Path(annotation_dir)
    if not annotation_dir.is_dir():
        raise ExportError(f"annotation directory {annotation_dir} does not exist")
    return {path.stem: _read_json(path) for path in sorted(annotation_dir.glob("*.json"))}


def min_distance_in_box(box: dict, points: list[list[float]]) -> float | None:
    """Smallest distance among LiDAR points falling inside the box."""
    x0, y0 = box["x"], box["y"]
    x1, y1 = x0 + box["w"], y0 + box["h"]
    inside = [d for px, py, d in points if x0 <= px <= x1 and y0 <= py <= y1]
    return min(inside) if inside else None


def _box_record(values: list[float]) -> dict:
    x, y, w, h = values
    return {
        "x": canonical_number(x),
        "y": canonical_number(y),
        "w": canonical_number(w),
        "h": canonical_number(h),
    }


def _attrs_record(raw: dict | None) -> dict | None:
    if raw is None:
        return None
    return {
        "color": raw.get("color"),
        "action": raw.get("action"),
        "location": raw.get("location"),
    }


def build_record(
    dump: dict,
    annotation: dict | None,
    superclass_map: dict[str, str],
) -> dict:
    """Assemble one canonical record from a dump scene and its annotation.

    Candidates are re-sorted by descending RPN score (stable), score
    columns and per-candidate annotations are permuted to match, and ids
    are reassigned contiguously.
    """
    scene_id = dump["scene_id"]
    try:
        boxes = dump["boxes"]
        rpn_scores = dump["rpn_scores"]
        class_labels = dump["class_labels"]
        member_logits = dump["member_logits"]
    except KeyError as exc:
        raise ExportError(f"scene {scene_id!r}: dump is missing {exc.args[0]!r}") from exc
    n = len(boxes)
    if not (len(rpn_scores) == len(class_labels) == n):
        raise ExportError(f"scene {scene_id!r}: candidate array lengths disagree")
    if any(len(row) != n for row in member_logits):
        raise ExportError(f"scene {scene_id!r}: score/candidate count mismatch")

    annotation = annotation or {}
    attributes = annotation.get("attributes") or [None] * n
    if len(attributes) != n:
        raise ExportError(f"scene {scene_id!r}: attribute array length disagrees")
    points = annotation.get("lidar_points")
    given_distances = annotation.get("lidar_distances") or [None] * n
    if len(given_distances) != n:
        raise ExportError(f"scene {scene_id!r}: lidar_distances length disagrees")

    def superclass_of(label: str) -> str:
        if label not in superclass_map:
            raise ExportError(f"scene {scene_id!r}: class {label!r} missing from superclass map")
        return superclass_map[label]

    order = sorted(range(n), key=lambda i: -rpn_scores[i])
    candidates = []
    for new_id, i in enumerate(order):
        box = _box_record(boxes[i])
        if points is not None:
            distance = min_distance_in_box(box, points)
        else:
            distance = given_distances[i]
        candidates.append(
            {
                "id": new_id,
                "box": box,
                "rpn_score": canonical_number(rpn_scores[i]),
                "class_label": class_labels[i],
                "superclass_label": superclass_of(class_labels[i]),
                "attributes": _attrs_record(attributes[i]),
                "lidar_distance": None if distance is None else canonical_number(distance),
            }
        )

    predicted_class = dump["predicted_class"]
    return {
        "scene_id": scene_id,
        "command": dump["command"],
        "image_width": int(dump["image_width"]),
        "image_height": int(dump["image_height"]),
        "predicted_class": predicted_class,
        "predicted_superclass": dump.get("predicted_superclass") or superclass_of(predicted_class),
        "subset_tags": sorted(annotation.get("subset_tags", ())),
        "gt_box": _box_record(dump["gt_box"]),
        "candidates": candidates,
        "scores": {
            "kind": dump.get("score_kind", "raw_logit"),
            "members": [
                [canonical_number(row[i]) for i in order] for row in member_logits
            ],
        },
    }


def export(
    dump_path: str | Path,
    annotation_path: str | Path | None,
    out_path: str | Path,
    superclass_map: dict[str, str],
    vocab: dict | None = None,
    adapter: str = "json-dir",
) -> int:
    """Write canonical records sorted by scene_id; returns the scene count.

    Every record is validated against the full schema before anything is
    written, so a violation aborts the export with the offending scene
    named and leaves no partial output behind.
    """
    dumps = ADAPTERS[adapter](dump_path)
    annotations = load_annotations(annotation_path)

    member_counts = {len(d.get("member_logits", ())) for d in dumps}
    if len(member_counts) > 1:
        raise ExportError(f"member count differs across scenes: {sorted(member_counts)}")

    records = [build_record(d, annotations.get(d["scene_id"]), superclass_map) for d in dumps]
    records.sort(key=lambda r: r["scene_id"])
    seen: set[str] = set()
    for record in records:
        if record["scene_id"] in seen:
            raise ExportError(f"duplicate scene_id {record['scene_id']!r}")
        seen.add(record["scene_id"])
        validate_record(record, vocab=vocab)

    with open(out_path, "w", encoding="utf-8") as fh:
        fh.write("".join(serialize_record(r) + "\n" for r in records))
    return len(records)

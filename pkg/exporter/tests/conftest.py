from __future__ import annotations

import json
from pathlib import Path

import pytest

SUPERCLASS_MAP = {
    "car": "vehicle",
    "truck": "vehicle",
    "pedestrian": "human",
    "traffic cone": "object",
}

VOCAB = {
    "colors": [
        "black", "white", "gray", "silver", "red", "blue",
        "green", "yellow", "orange", "brown", "gold", "purple",
    ],
    "actions": [
        "parked", "moving", "stopped", "turning", "walking", "standing",
        "crossing", "waiting", "driving", "braking", "reversing",
    ],
}


def scene_a_dump() -> dict:
    # rpn deliberately unsorted: exporting must reorder to [1, 2, 0]
    return {
        "command": "follow the blue car",
        "image_width": 640,
        "image_height": 480,
        "score_kind": "raw_logit",
        "gt_box": [70, 10, 40, 40],
        "boxes": [[10, 10, 40, 40], [70, 10, 40, 40], [130, 10, 40, 40]],
        "rpn_scores": [0.5, 0.9, 0.7],
        "class_labels": ["car", "car", "truck"],
        "member_logits": [[0.1, 0.9, 0.5], [0.2, 0.8, 0.4]],
        "predicted_class": "car",
    }


def scene_a_annotation() -> dict:
    return {
        "subset_tags": ["ambiguous"],
        "attributes": [
            {"color": "red", "action": "parked", "location": "left"},
            {"color": "blue", "action": "moving", "location": "front"},
            None,
        ],
        "lidar_points": [
            [20, 20, 7.5],
            [80, 20, 12.5],
            [100, 30, 6.25],
            [600, 400, 1.0],
        ],
    }


def scene_b_dump() -> dict:
    return {
        "command": "stop for the pedestrian",
        "image_width": 800,
        "image_height": 600,
        "score_kind": "cosine",
        "gt_box": [200, 100, 50, 120],
        "boxes": [[200, 100, 50, 120], [400, 100, 50, 120]],
        "rpn_scores": [0.8, 0.6],
        "class_labels": ["pedestrian", "pedestrian"],
        "member_logits": [[0.7, 0.3], [0.6, 0.2]],
        "predicted_class": "pedestrian",
    }


def scene_b_annotation() -> dict:
    return {
        "subset_tags": [],
        "attributes": [{"color": "black", "action": "walking", "location": "right"}, None],
        "lidar_distances": [8.5, None],
    }


def scene_c_dump() -> dict:
    return {
        "command": "turn after the cone",
        "image_width": 640,
        "image_height": 480,
        "score_kind": "raw_logit",
        "gt_box": [10, 70, 40, 40],
        "boxes": [[10, 70, 40, 40], [70, 70, 40, 40], [130, 70, 40, 40], [190, 70, 40, 40]],
        "rpn_scores": [0.9, 0.7, 0.5, 0.3],
        "class_labels": ["traffic cone", "traffic cone", "car", "truck"],
        "member_logits": [[3.0, 0.5, 0.1, 0.0], [2.5, 0.7, 0.2, 0.1]],
        "predicted_class": "traffic cone",
    }


def write_json(path: Path, payload) -> Path:
    path.write_text(json.dumps(payload), encoding="utf-8")
    return path


@pytest.fixture
def fixture_dirs(tmp_path):
    dumps = tmp_path / "dumps"
    annotations = tmp_path / "annotations"
    dumps.mkdir()
    annotations.mkdir()
    write_json(dumps / "scene-b.json", scene_b_dump())
    write_json(dumps / "scene-a.json", scene_a_dump())
    write_json(dumps / "scene-c.json", scene_c_dump())
    write_json(annotations / "scene-a.json", scene_a_annotation())
    write_json(annotations / "scene-b.json", scene_b_annotation())
    vocab_path = write_json(tmp_path / "vocab.json", VOCAB)
    map_path = write_json(tmp_path / "superclasses.json", SUPERCLASS_MAP)
    return {
        "dumps": dumps,
        "annotations": annotations,
        "vocab": vocab_path,
        "superclass_map": map_path,
        "out": tmp_path / "scenes.jsonl",
        "tmp": tmp_path,
    }

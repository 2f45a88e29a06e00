from __future__ import annotations

import json

import pytest

from sceneexport import ExportError, export, min_distance_in_box
from sceneexport.cli import main

from conftest import SUPERCLASS_MAP, VOCAB, scene_a_dump, write_json


def run_export(dirs, **kwargs) -> int:
    return export(
        dirs["dumps"],
        dirs["annotations"],
        dirs["out"],
        superclass_map=SUPERCLASS_MAP,
        vocab=VOCAB,
        **kwargs,
    )


def test_export_writes_sorted_valid_records(fixture_dirs):
    assert run_export(fixture_dirs) == 3
    lines = fixture_dirs["out"].read_text(encoding="utf-8").splitlines()
    assert [json.loads(line)["scene_id"] for line in lines] == [
        "scene-a", "scene-b", "scene-c",
    ]


def test_candidates_resorted_with_matching_columns(fixture_dirs):
    run_export(fixture_dirs)
    record = json.loads(fixture_dirs["out"].read_text(encoding="utf-8").splitlines()[0])
    assert record["scene_id"] == "scene-a"
    # dump order had rpn [0.5, 0.9, 0.7]; export order is [1, 2, 0]
    assert [c["rpn_score"] for c in record["candidates"]] == [0.9, 0.7, 0.5]
    assert [c["id"] for c in record["candidates"]] == [0, 1, 2]
    assert [c["class_label"] for c in record["candidates"]] == ["car", "truck", "car"]
    assert record["scores"]["members"] == [[0.9, 0.5, 0.1], [0.8, 0.4, 0.2]]
    # attributes permuted alongside
    assert record["candidates"][0]["attributes"]["color"] == "blue"
    assert record["candidates"][1]["attributes"] is None
    assert record["candidates"][2]["attributes"]["color"] == "red"
    assert record["candidates"][0]["superclass_label"] == "vehicle"


def test_lidar_minimum_from_points(fixture_dirs):
    run_export(fixture_dirs)
    record = json.loads(fixture_dirs["out"].read_text(encoding="utf-8").splitlines()[0])
    distances = [c["lidar_distance"] for c in record["candidates"]]
    # two points fall in the first box (12.5, 6.25); one in the last (7.5);
    # none in the middle box
    assert distances == [6.25, None, 7.5]


def test_min_distance_in_box_bounds():
    box = {"x": 0, "y": 0, "w": 10, "h": 10}
    points = [[0, 0, 5.0], [10, 10, 3.0], [11, 5, 1.0]]
    assert min_distance_in_box(box, points) == 3.0
    assert min_distance_in_box(box, [[50, 50, 1.0]]) is None


def test_export_is_idempotent(fixture_dirs):
    run_export(fixture_dirs)
    first = fixture_dirs["out"].read_bytes()
    run_export(fixture_dirs)
    assert fixture_dirs["out"].read_bytes() == first


def test_round_trip_through_consumer_is_byte_identical(fixture_dirs):
    """The 3-scene fixture survives export -> load -> serialize unchanged."""
    groundcheck = pytest.importorskip("groundcheck")
    run_export(fixture_dirs)
    raw = fixture_dirs["out"].read_text(encoding="utf-8")
    scenes = groundcheck.load_scenes(fixture_dirs["out"])  # validates every invariant
    assert len(scenes) == 3
    assert groundcheck.serialize_scenes(scenes) == raw


def test_empty_dump_writes_empty_file(fixture_dirs, tmp_path):
    empty = tmp_path / "empty-dumps"
    empty.mkdir()
    count = export(empty, None, fixture_dirs["out"], superclass_map=SUPERCLASS_MAP)
    assert count == 0
    assert fixture_dirs["out"].read_bytes() == b""


def test_member_count_mismatch_aborts(fixture_dirs):
    bad = scene_a_dump()
    bad["member_logits"] = [[0.1, 0.9, 0.5]]  # one member instead of two
    write_json(fixture_dirs["dumps"] / "scene-a.json", bad)
    with pytest.raises(ExportError, match="member count"):
        run_export(fixture_dirs)
    assert not fixture_dirs["out"].exists()


def test_schema_violation_aborts_with_scene_id(fixture_dirs):
    bad = scene_a_dump()
    bad["rpn_scores"] = [0.5, 1.9, 0.7]
    write_json(fixture_dirs["dumps"] / "scene-a.json", bad)
    with pytest.raises(ExportError, match="scene-a"):
        run_export(fixture_dirs)


def test_unknown_color_rejected_by_vocab(fixture_dirs):
    annotation = json.loads(
        (fixture_dirs["annotations"] / "scene-a.json").read_text(encoding="utf-8")
    )
    annotation["attributes"][0]["color"] = "chartreuse"
    write_json(fixture_dirs["annotations"] / "scene-a.json", annotation)
    with pytest.raises(ExportError, match="chartreuse"):
        run_export(fixture_dirs)


def test_unmapped_class_aborts(fixture_dirs):
    with pytest.raises(ExportError, match="missing from superclass map"):
        export(
            fixture_dirs["dumps"],
            fixture_dirs["annotations"],
            fixture_dirs["out"],
            superclass_map={"car": "vehicle"},
        )


def test_cli_end_to_end(fixture_dirs, capsys):
    code = main([
        "--dumps", str(fixture_dirs["dumps"]),
        "--annotations", str(fixture_dirs["annotations"]),
        "--vocab", str(fixture_dirs["vocab"]),
        "--superclass-map", str(fixture_dirs["superclass_map"]),
        "--out", str(fixture_dirs["out"]),
    ])
    assert code == 0
    assert "wrote 3 scene records" in capsys.readouterr().out
    assert len(fixture_dirs["out"].read_text(encoding="utf-8").splitlines()) == 3


def test_cli_reports_errors(fixture_dirs):
    code = main([
        "--dumps", str(fixture_dirs["tmp"] / "missing"),
        "--superclass-map", str(fixture_dirs["superclass_map"]),
        "--out", str(fixture_dirs["out"]),
    ])
    assert code == 2

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from groundcheck import AttributeSet, BoundingBox, Candidate, Scene, ScoreSet


def grid_box(slot: int) -> BoundingBox:
    """Disjoint 40x40 boxes on a 640x480 grid (up to 70 slots)."""
    return BoundingBox(x=10 + 60 * (slot % 10), y=10 + 60 * (slot // 10), w=40, h=40)


def build_scene(
    logit_rows,
    gt_index: int = 0,
    classes: list[str] | None = None,
    superclasses: dict[str, str] | None = None,
    predicted_class: str | None = None,
    predicted_superclass: str | None = None,
    scene_id: str = "scene-0",
    kind: str = "raw_logit",
    attrs: list[AttributeSet | None] | None = None,
    lidar: list[float | None] | None = None,
    tags=(),
) -> Scene:
    """Hand-crafted scene: disjoint grid boxes, descending rpn scores."""
    rows = np.asarray(logit_rows, dtype=float)
    if rows.ndim == 1:
        rows = rows[None, :]
    n = rows.shape[1]
    superclasses = superclasses or {}
    classes = classes or ["car"] * n
    candidates = tuple(
        Candidate(
            id=i,
            box=grid_box(i),
            rpn_score=round(0.95 - 0.9 * i / max(1, n - 1), 6),
            class_label=classes[i],
            superclass_label=superclasses.get(classes[i], "vehicle"),
            attributes=attrs[i] if attrs else None,
            lidar_distance=lidar[i] if lidar else None,
        )
        for i in range(n)
    )
    pred = predicted_class or candidates[gt_index].class_label
    return Scene(
        scene_id=scene_id,
        command=f"go to the {pred}",
        image_width=640,
        image_height=480,
        candidates=candidates,
        scores=ScoreSet(members=rows, kind=kind),
        gt_box=candidates[gt_index].box,
        predicted_class=pred,
        predicted_superclass=predicted_superclass
        or superclasses.get(pred, candidates[gt_index].superclass_label),
        subset_tags=frozenset(tags),
    )


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240209)

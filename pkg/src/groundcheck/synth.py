"""Seeded synthetic scenes with planted ground truth, for tests and demos.

Candidate boxes are laid out on a disjoint grid, so exactly one candidate
(the planted one) matches the ground-truth box and every other candidate
has zero overlap with it. Member logits peak on the planted candidate with
a configurable hit rate, with per-member noise so ensembles disagree on a
fraction of the scenes.
"""

from __future__ import annotations

import numpy as np

from .dataset import AttributeSet, BoundingBox, Candidate, Scene, ScoreSet

COLORS = (
    "black", "white", "gray", "silver", "red", "blue",
    "green", "yellow", "orange", "brown", "gold", "purple",
)
ACTIONS = (
    "parked", "moving", "stopped", "turning", "walking", "standing",
    "crossing", "waiting", "driving", "braking", "reversing",
)
LOCATIONS = ("left", "front", "right")

CLASSES = ("car", "truck", "pedestrian", "traffic cone")
SUPERCLASSES = {
    "car": "vehicle",
    "truck": "vehicle",
    "pedestrian": "human",
    "traffic cone": "object",
}

IMAGE_W, IMAGE_H = 640, 480


def _grid_box(slot: int) -> BoundingBox:
    return BoundingBox(x=10 + 60 * (slot % 10), y=10 + 60 * (slot // 10), w=40, h=40)


def make_scene(
    rng: np.random.Generator,
    scene_id: str,
    n_candidates: int,
    n_members: int,
    p_top1_correct: float,
    peak: tuple[float, float] = (1.5, 4.0),
    member_noise: float = 0.8,
    p_attrs: float = 0.9,
    p_lidar: float = 0.9,
) -> Scene:
    gt_index = int(rng.integers(n_candidates))
    rpn = np.sort(rng.uniform(0.0, 1.0, size=n_candidates))[::-1]
    candidates = []
    for i in range(n_candidates):
        attrs = None
        if rng.uniform() < p_attrs:
            attrs = AttributeSet(
                color=str(rng.choice(COLORS)),
                action=str(rng.choice(ACTIONS)),
                location=str(rng.choice(LOCATIONS)),
            )
        lidar = float(rng.uniform(2.0, 60.0)) if rng.uniform() < p_lidar else None
        class_label = str(rng.choice(CLASSES))
        candidates.append(
            Candidate(
                id=i,
                box=_grid_box(i),
                rpn_score=float(rpn[i]),
                class_label=class_label,
                superclass_label=SUPERCLASSES[class_label],
                attributes=attrs,
                lidar_distance=lidar,
            )
        )
    target = gt_index
    if rng.uniform() >= p_top1_correct:
        others = [i for i in range(n_candidates) if i != gt_index]
        if others:
            target = int(rng.choice(others))
    base = rng.normal(0.0, 1.0, size=n_candidates)
    base[target] += float(rng.uniform(*peak))
    members = base + rng.normal(0.0, member_noise, size=(n_members, n_candidates))
    gt_class = candidates[gt_index].class_label
    tags: set[str] = set()
    if rng.uniform() < 0.3:
        tags.add("ambiguous")
    if rng.uniform() < 0.2:
        tags.add("depth")
    return Scene(
        scene_id=scene_id,
        command=f"stop next to the {gt_class}",
        image_width=IMAGE_W,
        image_height=IMAGE_H,
        candidates=tuple(candidates),
        scores=ScoreSet(members=members, kind="raw_logit"),
        gt_box=candidates[gt_index].box,
        predicted_class=gt_class,
        predicted_superclass=SUPERCLASSES[gt_class],
        subset_tags=frozenset(tags),
    )


def make_scenes(
    n_scenes: int,
    seed: int = 0,
    n_members: int = 4,
    min_candidates: int = 3,
    max_candidates: int = 10,
    p_top1_correct: float = 0.7,
    **kwargs,
) -> list[Scene]:
    """Generate a deterministic list of planted scenes for the seed."""
    rng = np.random.default_rng(seed)
    return [
        make_scene(
            rng,
            scene_id=f"synth-{i:04d}",
            n_candidates=int(rng.integers(min_candidates, max_candidates + 1)),
            n_members=n_members,
            p_top1_correct=p_top1_correct,
            **kwargs,
        )
        for i in range(n_scenes)
    ]

"""Canonical scene records: types, validation, loading, and serialization.

A scene file is line-delimited JSON, one scene per line (UTF-8). Each record
holds one natural-language command, the candidate objects proposed for it,
the per-member raw score matrix, and the ground-truth box. Scores are stored
pre-activation (raw logits or cosine similarities) so that any calibration
can be applied downstream.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable

import numpy as np

LOCATIONS = ("left", "front", "right")

#: Score kinds that may appear in memory.
SCORE_KINDS = ("raw_logit", "cosine", "softmax", "sigmoid")

#: Score kinds permitted in files. Post-activation scores are never stored
#: because softmax is lossy with respect to temperature scaling.
FILE_SCORE_KINDS = ("raw_logit", "cosine")


class SceneFormatError(ValueError):
    """A record could not be parsed; names the line and offending field."""


class SceneInvariantError(ValueError):
    """A parsed record violates a scene invariant; names scene and invariant."""


def _require_finite(value: float, what: str) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ValueError(f"{what} must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned box given by its top-left corner and size, in pixels."""

    x: float
    y: float
    w: float
    h: float

    def __post_init__(self) -> None:
        for name in ("x", "y", "w", "h"):
            _require_finite(getattr(self, name), f"box.{name}")
        if self.w <= 0 or self.h <= 0:
            raise ValueError(f"box width/height must be positive, got w={self.w}, h={self.h}")
        if self.x < 0 or self.y < 0:
            raise ValueError(f"box corner must be non-negative, got x={self.x}, y={self.y}")

    @property
    def right(self) -> float:
        return self.x + self.w

    @property
    def bottom(self) -> float:
        return self.y + self.h

    @property
    def area(self) -> float:
        return self.w * self.h


@dataclass(frozen=True)
class AttributeSet:
    """Color, action, and relative location labels for one object.

    Any field may be absent (None); downstream templating degrades
    gracefully. Location is drawn from the fixed vocabulary ``LOCATIONS``;
    color and action vocabularies ship as a sidecar file with the dataset
    dump and are validated only when that file is supplied.
    """

    color: str | None = None
    action: str | None = None
    location: str | None = None

    def __post_init__(self) -> None:
        if self.location is not None and self.location not in LOCATIONS:
            raise ValueError(
                f"location must be one of {LOCATIONS}, got {self.location!r}"
            )


@dataclass(frozen=True)
class Vocabulary:
    """Closed color/action vocabularies from the dataset's sidecar file."""

    colors: frozenset[str]
    actions: frozenset[str]

    @classmethod
    def load(cls, path: str | Path) -> "Vocabulary":
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
        return cls(colors=frozenset(raw["colors"]), actions=frozenset(raw["actions"]))

    def check(self, attrs: AttributeSet) -> None:
        if attrs.color is not None and attrs.color not in self.colors:
            raise ValueError(f"color {attrs.color!r} not in vocabulary")
        if attrs.action is not None and attrs.action not in self.actions:
            raise ValueError(f"action {attrs.action!r} not in vocabulary")


@dataclass(frozen=True)
class Candidate:
    """One candidate object proposed for a scene."""

    id: int
    box: BoundingBox
    rpn_score: float
    class_label: str
    superclass_label: str
    attributes: AttributeSet | None = None
    lidar_distance: float | None = None

    def __post_init__(self) -> None:
        _require_finite(self.rpn_score, "rpn_score")
        if not 0.0 <= self.rpn_score <= 1.0:
            raise ValueError(f"rpn_score must lie in [0, 1], got {self.rpn_score}")
        if self.lidar_distance is not None:
            _require_finite(self.lidar_distance, "lidar_distance")
            if self.lidar_distance <= 0:
                raise ValueError(f"lidar_distance must be > 0, got {self.lidar_distance}")
        if not self.class_label:
            raise ValueError("class_label must be nonempty")


@dataclass(frozen=True, eq=False)
class ScoreSet:
    """E x N matrix of per-member scores over the scene's candidates."""

    members: np.ndarray
    kind: str

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ScoreSet):
            return NotImplemented
        return self.kind == other.kind and np.array_equal(self.members, other.members)

    __hash__ = None

    def __post_init__(self) -> None:
        arr = np.asarray(self.members, dtype=float)
        if arr.ndim != 2:
            raise ValueError(f"score matrix must be 2-D, got shape {arr.shape}")
        if arr.shape[0] < 1:
            raise ValueError("score matrix needs at least one member row")
        if not np.all(np.isfinite(arr)):
            raise ValueError("score matrix entries must be finite")
        if self.kind not in SCORE_KINDS:
            raise ValueError(f"unknown score kind {self.kind!r}")
        if self.kind == "cosine" and (arr.min(initial=0.0) < -1.0 or arr.max(initial=0.0) > 1.0):
            raise ValueError("cosine scores must lie in [-1, 1]")
        if self.kind == "sigmoid" and (arr.min(initial=0.0) < 0.0 or arr.max(initial=0.0) > 1.0):
            raise ValueError("sigmoid scores must lie in [0, 1]")
        if self.kind == "softmax":
            if arr.min(initial=0.0) < 0.0:
                raise ValueError("softmax scores must be non-negative")
            if arr.shape[1] and not np.allclose(arr.sum(axis=1), 1.0, atol=1e-6, rtol=0.0):
                raise ValueError("softmax rows must sum to 1 within 1e-6")
        arr.setflags(write=False)
        object.__setattr__(self, "members", arr)

    @property
    def n_members(self) -> int:
        return int(self.members.shape[0])

    @property
    def n_candidates(self) -> int:
        return int(self.members.shape[1])

    def member(self, index: int) -> np.ndarray:
        return self.members[index]

    def take_members(self, count: int) -> "ScoreSet":
        """First ``count`` member rows as a new ScoreSet."""
        if not 1 <= count <= self.n_members:
            raise ValueError(f"cannot take {count} members from {self.n_members}")
        return ScoreSet(members=self.members[:count].copy(), kind=self.kind)

    def take_columns(self, index: Iterable[int]) -> "ScoreSet":
        idx = list(index)
        return ScoreSet(members=self.members[:, idx].copy(), kind=self.kind)


@dataclass(frozen=True)
class Scene:
    """One command with its candidates, scores, and ground truth.

    Candidates are required to arrive sorted by descending rpn_score so that
    top-k selection is a reproducible prefix slice; the loader rejects files
    that violate this.
    """

    scene_id: str
    command: str
    image_width: int
    image_height: int
    candidates: tuple[Candidate, ...]
    scores: ScoreSet
    gt_box: BoundingBox
    predicted_class: str
    predicted_superclass: str
    subset_tags: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        object.__setattr__(self, "candidates", tuple(self.candidates))
        object.__setattr__(self, "subset_tags", frozenset(self.subset_tags))
        if self.image_width <= 0 or self.image_height <= 0:
            raise ValueError("image dimensions must be positive")
        n = len(self.candidates)
        if self.scores.n_candidates != n:
            raise ValueError(
                f"score/candidate count mismatch: {self.scores.n_candidates} columns "
                f"for {n} candidates"
            )
        ids = [c.id for c in self.candidates]
        if ids != list(range(n)):
            raise ValueError(f"candidate ids must be contiguous from 0, got {ids}")
        for c in self.candidates:
            if c.box.right > self.image_width or c.box.bottom > self.image_height:
                raise ValueError(
                    f"candidate {c.id} box exceeds image bounds "
                    f"{self.image_width}x{self.image_height}"
                )
        rpn = [c.rpn_score for c in self.candidates]
        if any(a < b for a, b in zip(rpn, rpn[1:])):
            raise ValueError("candidates must be sorted by descending rpn_score")

    @property
    def n_candidates(self) -> int:
        return len(self.candidates)

    def candidate(self, candidate_id: int) -> Candidate:
        return self.candidates[candidate_id]


def normalize_box(box: BoundingBox, image_width: float, image_height: float) -> np.ndarray:
    """Corner-normalized box vector [x/W, y/H, (x+w)/W, (y+h)/H].

    All components lie in [0, 1]; requires the box to fit inside the image.
    """
    if image_width <= 0 or image_height <= 0:
        raise ValueError("image dimensions must be positive")
    if box.right > image_width or box.bottom > image_height:
        raise ValueError(
            f"box ({box.x}, {box.y}, {box.w}, {box.h}) exceeds "
            f"{image_width}x{image_height} image bounds"
        )
    return np.array(
        [
            box.x / image_width,
            box.y / image_height,
            box.right / image_width,
            box.bottom / image_height,
        ]
    )


# ---------------------------------------------------------------------------
# Parsing


def _num(value: float) -> float | int:
    """Canonical JSON number: integral floats serialize as ints."""
    f = float(value)
    if f == int(f):
        return int(f)
    return f


def _parse_box(raw: Any, what: str) -> BoundingBox:
    if not isinstance(raw, dict):
        raise ValueError(f"{what} must be an object with x, y, w, h")
    try:
        return BoundingBox(x=raw["x"], y=raw["y"], w=raw["w"], h=raw["h"])
    except KeyError as exc:
        raise ValueError(f"{what} is missing field {exc.args[0]!r}") from exc


def _parse_attributes(raw: Any) -> AttributeSet | None:
    if raw is None:
        return None
    if not isinstance(raw, dict):
        raise ValueError("attributes must be an object or null")
    return AttributeSet(
        color=raw.get("color"),
        action=raw.get("action"),
        location=raw.get("location"),
    )


def _parse_candidate(raw: Any, vocab: Vocabulary | None) -> Candidate:
    attrs = _parse_attributes(raw.get("attributes"))
    if attrs is not None and vocab is not None:
        vocab.check(attrs)
    return Candidate(
        id=int(raw["id"]),
        box=_parse_box(raw["box"], f"candidate {raw.get('id')} box"),
        rpn_score=raw["rpn_score"],
        class_label=raw["class_label"],
        superclass_label=raw["superclass_label"],
        attributes=attrs,
        lidar_distance=raw.get("lidar_distance"),
    )


def scene_from_record(record: dict[str, Any], vocab: Vocabulary | None = None) -> Scene:
    """Build and validate a Scene from one decoded record."""
    scores_raw = record["scores"]
    kind = scores_raw["kind"]
    if kind not in FILE_SCORE_KINDS:
        raise ValueError(
            f"stored score kind must be one of {FILE_SCORE_KINDS}, got {kind!r}"
        )
    scores = ScoreSet(members=np.array(scores_raw["members"], dtype=float), kind=kind)
    return Scene(
        scene_id=record["scene_id"],
        command=record["command"],
        image_width=int(record["image_width"]),
        image_height=int(record["image_height"]),
        candidates=tuple(
            _parse_candidate(c, vocab) for c in record["candidates"]
        ),
        scores=scores,
        gt_box=_parse_box(record["gt_box"], "gt_box"),
        predicted_class=record["predicted_class"],
        predicted_superclass=record["predicted_superclass"],
        subset_tags=frozenset(record.get("subset_tags", ())),
    )


def load_scenes(path: str | Path, vocab: Vocabulary | None = None) -> list[Scene]:
    """Load all scenes from a line-delimited record file, in file order.

    Every type and scene invariant is checked during the load. Malformed
    records raise SceneFormatError naming the line, invariant violations
    raise SceneInvariantError naming the scene.
    """
    scenes: list[Scene] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                raise SceneFormatError(f"line {lineno}: blank line in record file")
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SceneFormatError(f"line {lineno}: invalid JSON ({exc.msg})") from exc
            if not isinstance(record, dict):
                raise SceneFormatError(f"line {lineno}: record must be a JSON object")
            scene_id = record.get("scene_id", "<missing scene_id>")
            try:
                scenes.append(scene_from_record(record, vocab))
            except KeyError as exc:
                raise SceneFormatError(
                    f"line {lineno}: record {scene_id!r} is missing field {exc.args[0]!r}"
                ) from exc
            except (TypeError, ValueError) as exc:
                raise SceneInvariantError(
                    f"line {lineno}: scene {scene_id!r}: {exc}"
                ) from exc
    return scenes


# ---------------------------------------------------------------------------
# Serialization


def _box_to_record(box: BoundingBox) -> dict[str, Any]:
    return {"x": _num(box.x), "y": _num(box.y), "w": _num(box.w), "h": _num(box.h)}


def _attrs_to_record(attrs: AttributeSet | None) -> dict[str, Any] | None:
    if attrs is None:
        return None
    return {"color": attrs.color, "action": attrs.action, "location": attrs.location}


def scene_to_record(scene: Scene) -> dict[str, Any]:
    """Decompose a Scene into the canonical record layout (fixed key order)."""
    return {
        "scene_id": scene.scene_id,
        "command": scene.command,
        "image_width": scene.image_width,
        "image_height": scene.image_height,
        "predicted_class": scene.predicted_class,
        "predicted_superclass": scene.predicted_superclass,
        "subset_tags": sorted(scene.subset_tags),
        "gt_box": _box_to_record(scene.gt_box),
        "candidates": [
            {
                "id": c.id,
                "box": _box_to_record(c.box),
                "rpn_score": _num(c.rpn_score),
                "class_label": c.class_label,
                "superclass_label": c.superclass_label,
                "attributes": _attrs_to_record(c.attributes),
                "lidar_distance": None if c.lidar_distance is None else _num(c.lidar_distance),
            }
            for c in scene.candidates
        ],
        "scores": {
            "kind": scene.scores.kind,
            "members": [[_num(v) for v in row] for row in scene.scores.members],
        },
    }


def serialize_scenes(scenes: Iterable[Scene]) -> str:
    """Render scenes as canonical line-delimited text (one record per line)."""
    return "".join(json.dumps(scene_to_record(s)) + "\n" for s in scenes)


def dump_scenes(scenes: Iterable[Scene], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize_scenes(scenes))

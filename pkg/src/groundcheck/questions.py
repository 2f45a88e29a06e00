"""Clarification questions: distance ordinals, expressions, and templates."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Sequence

from .dataset import Candidate, Scene
from .uncertainty import Verdict

ORDINAL_WORDS = {1: "first", 2: "second", 3: "third", 4: "fourth", 5: "fifth", 6: "far"}

LOCATION_PHRASES = {"left": "on the left", "front": "in front", "right": "on the right"}

#: Ordinals past this rank collapse into the shared "far" bucket.
MAX_NAMED_ORDINAL = 5


@dataclass(frozen=True)
class DistanceCount:
    """Rank of a candidate by distance within its look-alike group.

    Look-alikes share class, location, and color. Ordinal 6 stands for
    "further than fifth". distance_missing marks candidates that had no
    distance and were ranked alone.
    """

    candidate_id: int
    ordinal: int
    distance_missing: bool = False

    def __post_init__(self) -> None:
        if not 1 <= self.ordinal <= 6:
            raise ValueError(f"ordinal must lie in 1..6, got {self.ordinal}")


@dataclass(frozen=True)
class Expression:
    """A rendered referring expression for one candidate."""

    text: str
    candidate_id: int

    def __post_init__(self) -> None:
        if not self.text:
            raise ValueError("expression text must be nonempty")


def compute_distance_counts(candidates: Sequence[Candidate]) -> list[DistanceCount]:
    """Ordinal rank of each candidate among its same-looking neighbors.

    Candidates are grouped by (class, location, color); each group is
    sorted by distance (ties by id) and ranked 1, 2, ...; ranks past 5
    clamp to the far bucket. A candidate without a distance is ranked
    alone and flagged. Results follow the input order.
    """
    groups: dict[tuple, list[Candidate]] = {}
    missing: set[int] = set()
    for c in candidates:
        if c.lidar_distance is None:
            missing.add(c.id)
            continue
        attrs = c.attributes
        key = (
            c.class_label,
            attrs.location if attrs else None,
            attrs.color if attrs else None,
        )
        groups.setdefault(key, []).append(c)
    ordinal_of: dict[int, int] = {}
    for members in groups.values():
        members.sort(key=lambda c: (c.lidar_distance, c.id))
        for rank, c in enumerate(members, start=1):
            ordinal_of[c.id] = min(rank, MAX_NAMED_ORDINAL + 1)
    return [
        DistanceCount(candidate_id=c.id, ordinal=1, distance_missing=True)
        if c.id in missing
        else DistanceCount(candidate_id=c.id, ordinal=ordinal_of[c.id])
        for c in candidates
    ]


def generate_expression(candidate: Candidate, count: DistanceCount) -> Expression:
    """Template expression "the <ordinal> <color> <class> <location>".

    An absent color is simply omitted; without any attributes the
    expression degrades to "the <ordinal> <class>".
    """
    parts = ["the", ORDINAL_WORDS[count.ordinal]]
    attrs = candidate.attributes
    if attrs is not None and attrs.color:
        parts.append(attrs.color)
    parts.append(candidate.class_label)
    if attrs is not None and attrs.location:
        parts.append(LOCATION_PHRASES[attrs.location])
    return Expression(text=" ".join(parts), candidate_id=candidate.id)


def generate_question(expressions: Sequence[Expression]) -> str:
    """Chain expressions into one clarification question.

    One candidate: "Do you mean <e1>?". Several: "Do you mean <e1> or
    <e2>, or <e3>, ...?" with the expressions kept in the given order.
    """
    if not expressions:
        raise ValueError("need at least one expression")
    texts = [e.text for e in expressions]
    if len(texts) == 1:
        return f"Do you mean {texts[0]}?"
    body = f"{texts[0]} or {texts[1]}"
    for text in texts[2:]:
        body += f", or {text}"
    return f"Do you mean {body}?"


def disambiguation_report(
    scene: Scene, verdict: Verdict, expressions: Sequence[Expression]
) -> dict[str, Any]:
    """Structured record describing one uncertain scene for display layers.

    Carries the candidate boxes for a visual overlay, the rendered
    expressions and question, and a flag telling whether every candidate
    received a distinct expression (identical texts would make the
    question useless for telling them apart).
    """
    if verdict.is_certain:
        raise ValueError("disambiguation reports describe uncertain verdicts only")
    texts = [e.text for e in expressions]
    return {
        "scene_id": scene.scene_id,
        "command": scene.command,
        "candidates": [
            {
                "id": cid,
                "box": {
                    "x": scene.candidate(cid).box.x,
                    "y": scene.candidate(cid).box.y,
                    "w": scene.candidate(cid).box.w,
                    "h": scene.candidate(cid).box.h,
                },
            }
            for cid in verdict.candidate_ids
        ],
        "expressions": [
            {"candidate_id": e.candidate_id, "text": e.text} for e in expressions
        ],
        "question": generate_question(expressions),
        "unique_expressions": len(set(texts)) == len(texts),
    }


def expressions_for_verdict(scene: Scene, verdict: Verdict) -> list[Expression]:
    """Render expressions for the verdict's candidates, in verdict order.

    Distance ordinals are computed against the whole scene so that "the
    second car" counts scene context, not just the uncertain set.
    """
    counts = {dc.candidate_id: dc for dc in compute_distance_counts(scene.candidates)}
    return [
        generate_expression(scene.candidate(cid), counts[cid])
        for cid in verdict.candidate_ids
    ]

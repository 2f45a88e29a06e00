"""Grounding accuracy, meta-classifier metrics, and text-overlap metrics."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

from .dataset import BoundingBox, Scene
from .uncertainty import MethodSpec, run_pipeline

#: IoU above which a predicted box counts as correct (strict inequality).
IOU_THRESHOLD = 0.5


def iou(a: BoundingBox, b: BoundingBox) -> float:
    """Intersection area over union area; 0 for disjoint boxes."""
    ix = min(a.right, b.right) - max(a.x, b.x)
    iy = min(a.bottom, b.bottom) - max(a.y, b.y)
    if ix <= 0 or iy <= 0:
        return 0.0
    inter = ix * iy
    return inter / (a.area + b.area - inter)


def is_correct(pred: BoundingBox, gt: BoundingBox) -> bool:
    """True iff the boxes overlap with IoU strictly above 0.5."""
    return iou(pred, gt) > IOU_THRESHOLD


@dataclass(frozen=True)
class EvalReport:
    """One metrics row for a method over a scene set.

    cert_iou uses all scenes as denominator (the lower bound accuracy when
    trusting only certain outputs); cert_acc is conditioned on the certain
    scenes; corr_unc is the fraction of uncertain scenes whose candidate
    set still contains the correct object. th_iou combines them into the
    accuracy attainable when every recoverable uncertain scene is resolved.
    """

    method: MethodSpec
    cert_iou: float
    cert_acc: float
    corr_unc: float
    th_iou: float
    avg_unc_obj: float
    max_unc_obj: int
    n_scenes: int
    n_certain: int
    n_uncertain: int
    fallback_count: int = 0
    filter_failopen_count: int = 0
    annotations: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.n_certain + self.n_uncertain != self.n_scenes:
            raise ValueError("certain and uncertain counts must partition the scenes")
        expected = self.cert_iou + (self.n_uncertain / self.n_scenes) * self.corr_unc
        if abs(self.th_iou - expected) > 1e-9:
            raise ValueError("th_iou must equal cert_iou + uncertain_fraction * corr_unc")
        if self.th_iou < self.cert_iou - 1e-12:
            raise ValueError("th_iou cannot be below cert_iou")


def evaluate_method(scenes: list[Scene], method: MethodSpec) -> EvalReport:
    """Run the pipeline over every scene and aggregate the metric suite.

    A certain scene scores as correct when its single candidate's box
    matches the ground truth at IoU > 0.5; an uncertain scene counts as
    recoverable when any member of its candidate set matches. Threshold
    fallbacks count as uncertain. Empty denominators yield 0 with a note.
    """
    if not scenes:
        raise ValueError("cannot evaluate an empty scene list")
    n_certain = 0
    n_uncertain = 0
    certain_correct = 0
    uncertain_recoverable = 0
    unc_sizes: list[int] = []
    fallback_count = 0
    failopen_count = 0
    for scene in scenes:
        verdict = run_pipeline(scene, method)
        if verdict.filter_failopen:
            failopen_count += 1
        if verdict.is_certain:
            n_certain += 1
            if is_correct(scene.candidate(verdict.candidate_ids[0]).box, scene.gt_box):
                certain_correct += 1
        else:
            n_uncertain += 1
            unc_sizes.append(len(verdict.candidate_ids))
            if verdict.below_threshold:
                fallback_count += 1
            if any(
                is_correct(scene.candidate(cid).box, scene.gt_box)
                for cid in verdict.candidate_ids
            ):
                uncertain_recoverable += 1
    n = len(scenes)
    annotations: list[str] = []
    cert_iou = certain_correct / n
    if n_certain:
        cert_acc = certain_correct / n_certain
    else:
        cert_acc = 0.0
        annotations.append("no certain scenes; cert_acc reported as 0")
    if n_uncertain:
        corr_unc = uncertain_recoverable / n_uncertain
        avg_unc = sum(unc_sizes) / n_uncertain
        max_unc = max(unc_sizes)
    else:
        corr_unc = 0.0
        avg_unc = 0.0
        max_unc = 0
        annotations.append("no uncertain scenes; corr_unc and object counts reported as 0")
    if failopen_count:
        annotations.append(f"class filter failed open on {failopen_count} scenes")
    return EvalReport(
        method=method,
        cert_iou=cert_iou,
        cert_acc=cert_acc,
        corr_unc=corr_unc,
        th_iou=cert_iou + (n_uncertain / n) * corr_unc,
        avg_unc_obj=avg_unc,
        max_unc_obj=max_unc,
        n_scenes=n,
        n_certain=n_certain,
        n_uncertain=n_uncertain,
        fallback_count=fallback_count,
        filter_failopen_count=failopen_count,
        annotations=tuple(annotations),
    )


def apply_restrictions(
    reports: list[EvalReport],
    max_unc_obj: int = 5,
    th_iou_min: float = 0.75,
    cert_acc_min: float = 0.8,
) -> list[EvalReport]:
    """Keep only methods usable in a time-critical interactive setting:

    candidate sets stay small (max_unc_obj), the theoretical accuracy is
    high enough (th_iou strictly above the bound), and certain outputs can
    be trusted (cert_acc strictly above the bound). Order is preserved.
    """
    return [
        r
        for r in reports
        if r.max_unc_obj <= max_unc_obj
        and r.th_iou > th_iou_min
        and r.cert_acc > cert_acc_min
    ]


def evaluate_subsets(scenes: list[Scene], method: MethodSpec) -> dict[str, EvalReport]:
    """Evaluate the method per subset tag; untagged scenes form group "all"."""
    groups: dict[str, list[Scene]] = {}
    for scene in scenes:
        if scene.subset_tags:
            for tag in scene.subset_tags:
                groups.setdefault(tag, []).append(scene)
        else:
            groups.setdefault("all", []).append(scene)
    return {tag: evaluate_method(group, method) for tag, group in sorted(groups.items())}


# ---------------------------------------------------------------------------
# Text metrics


def tokenize(text: str) -> list[str]:
    """Lowercase whitespace tokens with terminal punctuation stripped."""
    tokens = []
    for raw in text.lower().split():
        token = raw.rstrip(".,!?;:")
        if token:
            tokens.append(token)
    return tokens


def _ngrams(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def bleu4(candidate: list[str], references: list[list[str]]) -> float:
    """BLEU-4: clipped n-gram precision (n = 1..4), geometric mean, brevity
    penalty exp(1 - r/c) for candidates shorter than the closest reference.

    No smoothing: any empty n-gram precision zeroes the score.
    """
    if not candidate:
        raise ValueError("candidate must be nonempty")
    if not references or any(not r for r in references):
        raise ValueError("references must be nonempty")
    log_precisions = []
    for n in range(1, 5):
        cand_counts = _ngrams(candidate, n)
        total = sum(cand_counts.values())
        if total == 0:
            return 0.0
        max_ref: Counter = Counter()
        for ref in references:
            for gram, count in _ngrams(ref, n).items():
                if count > max_ref[gram]:
                    max_ref[gram] = count
        clipped = sum(min(count, max_ref[gram]) for gram, count in cand_counts.items())
        if clipped == 0:
            return 0.0
        log_precisions.append(math.log(clipped / total))
    c = len(candidate)
    # closest reference length; ties favor the shorter reference
    r = min((abs(len(ref) - c), len(ref)) for ref in references)[1]
    bp = 1.0 if c >= r else math.exp(1.0 - r / c)
    return bp * math.exp(sum(log_precisions) / 4.0)


def _lcs_length(a: list[str], b: list[str]) -> int:
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0] * (len(b) + 1)
        for j, y in enumerate(b, start=1):
            cur[j] = prev[j - 1] + 1 if x == y else max(prev[j], cur[j - 1])
        prev = cur
    return prev[-1]


def rouge_l(candidate: list[str], reference: list[str], beta: float = 1.0) -> float:
    """Longest-common-subsequence F-measure between candidate and reference.

    beta weights recall; the default 1 gives the balanced F1. A large beta
    approaches the recall-weighted variant some toolkits use.
    """
    if not candidate or not reference:
        raise ValueError("candidate and reference must be nonempty")
    lcs = _lcs_length(candidate, reference)
    if lcs == 0:
        return 0.0
    precision = lcs / len(candidate)
    recall = lcs / len(reference)
    b2 = beta * beta
    return (1.0 + b2) * precision * recall / (recall + b2 * precision)

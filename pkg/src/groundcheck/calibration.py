"""Score calibration: temperature-scaled softmax, sigmoid, ensemble averaging."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import SCORE_KINDS, ScoreSet

#: Ensemble handling modes accepted by :func:`calibrate`.
ENSEMBLE_MODES = ("single", "average", "keep_members")

OUTPUT_FNS = ("softmax", "sigmoid", "raw")


@dataclass(frozen=True, eq=False)
class ScoreVector:
    """Per-candidate scores of one kind (softmax, sigmoid, cosine, raw_logit)."""

    values: np.ndarray
    kind: str

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ScoreVector):
            return NotImplemented
        return self.kind == other.kind and np.array_equal(self.values, other.values)

    __hash__ = None

    def __post_init__(self) -> None:
        arr = np.asarray(self.values, dtype=float)
        if arr.ndim != 1:
            raise ValueError(f"score vector must be 1-D, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("score vector entries must be finite")
        if self.kind not in SCORE_KINDS:
            raise ValueError(f"unknown score kind {self.kind!r}")
        if self.kind == "softmax":
            if arr.size and (arr.min() < 0.0 or abs(arr.sum() - 1.0) > 1e-6):
                raise ValueError("softmax vector must be non-negative and sum to 1")
        if self.kind == "sigmoid" and arr.size and (arr.min() < 0.0 or arr.max() > 1.0):
            raise ValueError("sigmoid vector entries must lie in [0, 1]")
        if self.kind == "cosine" and arr.size and (arr.min() < -1.0 or arr.max() > 1.0):
            raise ValueError("cosine vector entries must lie in [-1, 1]")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    def __len__(self) -> int:
        return int(self.values.shape[0])


@dataclass(frozen=True)
class CalibSpec:
    """How to turn an E x N score matrix into calibrated per-candidate scores.

    temperature divides the logits inside the softmax (1 keeps the plain
    softmax; larger values flatten the distribution). It is undefined for
    the sigmoid and raw output functions, where it must stay at 1.
    """

    temperature: float = 1.0
    output_fn: str = "softmax"
    ensemble_mode: str = "average"
    member_index: int = 0

    def __post_init__(self) -> None:
        if not self.temperature > 0:
            raise ValueError(f"temperature must be positive, got {self.temperature}")
        if self.output_fn not in OUTPUT_FNS:
            raise ValueError(f"output_fn must be one of {OUTPUT_FNS}")
        if self.ensemble_mode not in ENSEMBLE_MODES:
            raise ValueError(f"ensemble_mode must be one of {ENSEMBLE_MODES}")
        if self.output_fn != "softmax" and self.temperature != 1.0:
            raise ValueError("temperature is undefined outside softmax; keep it at 1")
        if self.member_index < 0:
            raise ValueError("member_index must be non-negative")


def _as_logits(values: np.ndarray | list[float]) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("logits must be a nonempty 1-D vector")
    if not np.all(np.isfinite(arr)):
        raise ValueError("logits must be finite")
    return arr


def softmax_with_temperature(logits: np.ndarray | list[float], temperature: float = 1.0) -> ScoreVector:
    """softmax(z / tau), computed with max-subtraction for stability.

    The argmax is preserved for every positive temperature; tau -> inf
    flattens the output toward uniform, tau -> 0 sharpens it toward a
    point mass.
    """
    if not temperature > 0:
        raise ValueError(f"temperature must be positive, got {temperature}")
    z = _as_logits(logits) / float(temperature)
    z = z - z.max()
    e = np.exp(z)
    return ScoreVector(values=e / e.sum(), kind="softmax")


def sigmoid_scores(logits: np.ndarray | list[float]) -> ScoreVector:
    """Elementwise 1 / (1 + exp(-z)); keeps candidate ordering, range (0, 1)."""
    z = _as_logits(logits)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return ScoreVector(values=out, kind="sigmoid")


def ensemble_average(scores: ScoreSet, temperature: float = 1.0) -> ScoreVector:
    """Mean of the per-member temperature-scaled softmax distributions.

    Every member row is pushed through the softmax at the given temperature
    and the resulting distributions are averaged with equal weight 1/E.
    """
    if scores.kind not in ("raw_logit", "cosine"):
        raise ValueError(f"ensemble_average needs raw scores, got kind {scores.kind!r}")
    if scores.n_candidates == 0:
        raise ValueError("empty score matrix")
    rows = [softmax_with_temperature(scores.member(e), temperature).values
            for e in range(scores.n_members)]
    return ScoreVector(values=np.mean(rows, axis=0), kind="softmax")


def _apply_output_fn(row: np.ndarray, kind: str, spec: CalibSpec) -> ScoreVector:
    if spec.output_fn == "softmax":
        return softmax_with_temperature(row, spec.temperature)
    if spec.output_fn == "sigmoid":
        return sigmoid_scores(row)
    return ScoreVector(values=row.copy(), kind=kind)


def calibrate(scores: ScoreSet, spec: CalibSpec) -> ScoreVector | list[ScoreVector]:
    """Apply a calibration spec to a score matrix.

    ensemble_mode "average" yields one averaged vector, "single" transforms
    the selected member row, and "keep_members" returns one transformed
    vector per member (as required by vote-based detectors). The raw output
    function passes scores through unchanged, preserving their kind.
    """
    if spec.output_fn in ("softmax", "sigmoid") and scores.kind not in ("raw_logit", "cosine"):
        raise ValueError(
            f"output_fn {spec.output_fn!r} needs raw scores, got kind {scores.kind!r}"
        )
    if spec.ensemble_mode == "single":
        if spec.member_index >= scores.n_members:
            raise ValueError(
                f"member index {spec.member_index} out of range for {scores.n_members} members"
            )
        return _apply_output_fn(scores.member(spec.member_index), scores.kind, spec)
    if spec.ensemble_mode == "keep_members":
        return [
            _apply_output_fn(scores.member(e), scores.kind, spec)
            for e in range(scores.n_members)
        ]
    # average
    if spec.output_fn == "softmax":
        return ensemble_average(scores, spec.temperature)
    rows = [_apply_output_fn(scores.member(e), scores.kind, spec).values
            for e in range(scores.n_members)]
    return ScoreVector(values=np.mean(rows, axis=0), kind=scores.kind if spec.output_fn == "raw" else spec.output_fn)


def entropy(vector: ScoreVector) -> float:
    """Shannon entropy in nats; zero-probability entries contribute nothing."""
    p = vector.values
    nz = p[p > 0]
    return float(-(nz * np.log(nz)).sum())

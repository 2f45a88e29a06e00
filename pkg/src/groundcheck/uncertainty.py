"""Uncertainty meta-classifiers over calibrated grounding scores.

Each detector inspects the per-candidate score distribution of one scene and
returns a Verdict: either the model is certain about a single candidate, or
it is uncertain and the detector names the candidate set causing the
uncertainty. Candidate-set filters (top-k, class filtering) and the full
per-scene pipeline live here as well.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .calibration import CalibSpec, ScoreVector, calibrate
from .dataset import Candidate, Scene, ScoreSet

DETECTOR_METHODS = ("SA", "CAHC", "SoftTr", "SigmTr", "RLT", "Jenks", "EV")
THRESHOLD_METHODS = ("SoftTr", "SigmTr", "RLT")

FILTER_LEVELS = ("class", "superclass")


class MethodConfigError(ValueError):
    """A pipeline configuration is internally inconsistent."""


@dataclass(frozen=True)
class Verdict:
    """Outcome of one uncertainty check.

    candidate_ids are ordered by descending calibrated score (ties by
    ascending id). A certain verdict names exactly one candidate; an
    uncertain one names at least two, except for the threshold fallback
    where no score cleared the bar and the single argmax is kept with
    below_threshold set. filter_failopen records that class filtering
    would have emptied the candidate set and was skipped.
    """

    status: str
    candidate_ids: tuple[int, ...]
    below_threshold: bool = False
    filter_failopen: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "candidate_ids", tuple(int(i) for i in self.candidate_ids))
        if self.status not in ("certain", "uncertain"):
            raise ValueError(f"status must be 'certain' or 'uncertain', got {self.status!r}")
        n = len(self.candidate_ids)
        if self.status == "certain" and n != 1:
            raise ValueError(f"certain verdict must name exactly one candidate, got {n}")
        if self.status == "uncertain":
            if self.below_threshold:
                if n != 1:
                    raise ValueError("threshold fallback carries exactly the argmax candidate")
            elif n < 2:
                raise ValueError(f"uncertain verdict needs at least two candidates, got {n}")
        if self.below_threshold and self.status != "uncertain":
            raise ValueError("below_threshold applies to uncertain verdicts only")

    @property
    def is_certain(self) -> bool:
        return self.status == "certain"


def certain(candidate_id: int) -> Verdict:
    return Verdict(status="certain", candidate_ids=(candidate_id,))


def uncertain(candidate_ids: Sequence[int], below_threshold: bool = False) -> Verdict:
    return Verdict(status="uncertain", candidate_ids=tuple(candidate_ids),
                   below_threshold=below_threshold)


@dataclass(frozen=True)
class DetectorSpec:
    """Choice of detector plus its parameter.

    delta is the CAHC merge distance, eta the threshold for the *Tr
    detectors, jenks_gvf the goodness-of-variance-fit stopping target.
    Parameters not used by the chosen method must stay unset.
    """

    method: str
    delta: float | None = None
    eta: float | None = None
    jenks_gvf: float | None = None

    def __post_init__(self) -> None:
        if self.method not in DETECTOR_METHODS:
            raise MethodConfigError(f"unknown detector {self.method!r}")
        needs = {"CAHC": "delta", "SoftTr": "eta", "SigmTr": "eta", "RLT": "eta",
                 "Jenks": "jenks_gvf"}
        for name in ("delta", "eta", "jenks_gvf"):
            value = getattr(self, name)
            if needs.get(self.method) == name:
                if value is None:
                    raise MethodConfigError(f"{self.method} requires {name}")
            elif value is not None:
                raise MethodConfigError(f"{self.method} does not take {name}")
        if self.method == "CAHC" and not self.delta > 0:
            raise MethodConfigError(f"delta must be positive, got {self.delta}")
        if self.method in THRESHOLD_METHODS and not np.isfinite(self.eta):
            raise MethodConfigError(f"eta must be finite, got {self.eta}")
        if self.method == "Jenks" and not 0.0 < self.jenks_gvf < 1.0:
            raise MethodConfigError(f"jenks_gvf must lie in (0, 1), got {self.jenks_gvf}")

    def token(self) -> str:
        """Compact display token, e.g. "CAHC(0.05)" or "EV"."""
        if self.method == "CAHC":
            return f"CAHC({self.delta:g})"
        if self.method in THRESHOLD_METHODS:
            return f"{self.method}({self.eta:g})"
        if self.method == "Jenks":
            return f"Jenks({self.jenks_gvf:g})"
        return self.method


# ---------------------------------------------------------------------------
# Candidate-set filters


def select_topk(
    candidates: Sequence[Candidate], scores: ScoreSet, k: int
) -> tuple[tuple[Candidate, ...], ScoreSet]:
    """Restrict to the first min(k, N) candidates (highest-RPN prefix).

    Candidates must already be sorted by descending rpn_score, which the
    scene loader enforces; the matching score columns are kept.
    """
    if k < 1:
        raise ValueError(f"top-k must be at least 1, got {k}")
    n = len(candidates)
    if k >= n:
        return tuple(candidates), scores
    return tuple(candidates[:k]), scores.take_columns(range(k))


def filter_class(
    candidates: Sequence[Candidate],
    scores: ScoreSet,
    r_c: str,
    level: str = "class",
) -> tuple[tuple[Candidate, ...], ScoreSet, bool]:
    """Drop candidates whose (super)class differs from the predicted one.

    Fails open: when no candidate matches, the input is returned unchanged
    and the third element of the result is True so callers can report it.
    """
    if not r_c:
        raise ValueError("predicted class must be nonempty")
    if level not in FILTER_LEVELS:
        raise ValueError(f"level must be one of {FILTER_LEVELS}, got {level!r}")
    attr = "class_label" if level == "class" else "superclass_label"
    keep = [i for i, c in enumerate(candidates) if getattr(c, attr) == r_c]
    if not keep:
        return tuple(candidates), scores, True
    if len(keep) == len(candidates):
        return tuple(candidates), scores, False
    return tuple(candidates[i] for i in keep), scores.take_columns(keep), False


# ---------------------------------------------------------------------------
# Detectors (position-indexed: returned ids are indices into the given vector)


def _ranked(positions: Sequence[int], values: np.ndarray) -> tuple[int, ...]:
    return tuple(sorted(positions, key=lambda i: (-values[i], i)))


def detect_sa(scores: ScoreVector) -> Verdict:
    """Softmax addition: smallest top-k whose mass outweighs the rest.

    Candidates are ranked by probability; k grows until the top-k sum
    exceeds the sum of the remaining probabilities. k = 1 means certain,
    otherwise the top-k candidates form the uncertain set.
    """
    if scores.kind != "softmax":
        raise ValueError(f"SA needs softmax scores, got {scores.kind!r}")
    v = scores.values
    if v.size == 0:
        raise ValueError("empty score vector")
    order = _ranked(range(v.size), v)
    total = float(v.sum())
    cum = 0.0
    k = v.size
    for j, pos in enumerate(order, start=1):
        cum += float(v[pos])
        if cum > total - cum:
            k = j
            break
    if k == 1:
        return certain(order[0])
    return uncertain(order[:k])


def detect_cahc(scores: ScoreVector, delta: float) -> Verdict:
    """Centroid agglomerative clustering of the 1-D probabilities.

    Every candidate starts as a singleton cluster holding its probability.
    The closest pair of cluster centroids is merged while their distance is
    below delta, the merged centroid being the mean over all member
    probabilities. The cluster with the largest centroid then decides:
    a singleton means certain, anything larger is the uncertain set.
    """
    if scores.kind != "softmax":
        raise ValueError(f"CAHC needs softmax scores, got {scores.kind!r}")
    if not delta > 0:
        raise ValueError(f"delta must be positive, got {delta}")
    v = scores.values
    if v.size == 0:
        raise ValueError("empty score vector")
    # Ascending by (value, id); clusters stay contiguous in this order, so
    # the globally closest centroid pair is always an adjacent pair.
    order = sorted(range(v.size), key=lambda i: (v[i], i))
    clusters = [[i] for i in order]
    centroids = [float(v[i]) for i in order]
    while len(clusters) > 1:
        gaps = [centroids[j + 1] - centroids[j] for j in range(len(clusters) - 1)]
        j = int(np.argmin(gaps))
        if not gaps[j] < delta:
            break
        merged = clusters[j] + clusters[j + 1]
        clusters[j : j + 2] = [merged]
        centroids[j : j + 2] = [float(np.mean([v[i] for i in merged]))]
    top = clusters[-1]
    if len(top) == 1:
        return certain(top[0])
    return uncertain(_ranked(top, v))


def detect_threshold(scores: ScoreVector, eta: float) -> Verdict:
    """Keep every candidate scoring strictly above eta.

    One survivor means certain; several mean uncertain. When nothing clears
    the threshold the argmax is kept as a flagged below-threshold fallback,
    counted as uncertain, so the scene stays recoverable downstream.
    """
    if not np.isfinite(eta):
        raise ValueError(f"eta must be finite, got {eta}")
    lo, hi = {"softmax": (0.0, 1.0), "sigmoid": (0.0, 1.0), "cosine": (-1.0, 1.0)}.get(
        scores.kind, (-np.inf, np.inf)
    )
    if not lo <= eta <= hi:
        raise ValueError(f"eta {eta} outside the {scores.kind} score range [{lo}, {hi}]")
    v = scores.values
    if v.size == 0:
        raise ValueError("empty score vector")
    above = [i for i in range(v.size) if v[i] > eta]
    if not above:
        return uncertain((int(np.argmax(v)),), below_threshold=True)
    if len(above) == 1:
        return certain(above[0])
    return uncertain(_ranked(above, v))


def _class_cost(values: np.ndarray) -> float:
    """Sum of squared deviations of a slice from its own mean."""
    d = values - values.mean()
    return float((d * d).sum())


def jenks_partition(sorted_values: np.ndarray, n_classes: int) -> tuple[list[int], float]:
    """Optimal split of ascending-sorted values into contiguous classes.

    Minimizes the summed within-class squared deviation from the class
    means (SDCM). Returns the start index of each class and the achieved
    SDCM. Dynamic programming over an exact per-slice cost table.
    """
    values = np.asarray(sorted_values, dtype=float)
    n = values.size
    if not 1 <= n_classes <= n:
        raise ValueError(f"need 1 <= n_classes <= {n}, got {n_classes}")
    cost = [[0.0] * (n + 1) for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n + 1):
            cost[i][j] = _class_cost(values[i:j])
    # best[c][j]: minimal SDCM splitting the first j values into c classes
    best = [[np.inf] * (n + 1) for _ in range(n_classes + 1)]
    choice = [[0] * (n + 1) for _ in range(n_classes + 1)]
    for j in range(1, n + 1):
        best[1][j] = cost[0][j]
    for c in range(2, n_classes + 1):
        for j in range(c, n + 1):
            for i in range(c - 1, j):
                total = best[c - 1][i] + cost[i][j]
                if total < best[c][j]:
                    best[c][j] = total
                    choice[c][j] = i
    breaks = [0] * n_classes
    j = n
    for c in range(n_classes, 1, -1):
        breaks[c - 1] = choice[c][j]
        j = choice[c][j]
    return breaks, float(best[n_classes][n])


def detect_jenks(scores: ScoreVector, gvf_target: float) -> Verdict:
    """Natural-breaks clustering of the scores; the top class decides.

    The class count k grows from 1 to at most 6 until the goodness of
    variance fit, 1 - SDCM(k)/SDAM, reaches gvf_target; with zero overall
    variance the single-class split already fits perfectly. A singleton
    top class means certain, otherwise its members are the uncertain set.
    """
    if not 0.0 < gvf_target < 1.0:
        raise ValueError(f"gvf_target must lie in (0, 1), got {gvf_target}")
    v = scores.values
    if v.size == 0:
        raise ValueError("empty score vector")
    if v.size == 1:
        return certain(0)
    order = sorted(range(v.size), key=lambda i: (v[i], i))
    sorted_vals = np.array([v[i] for i in order])
    sdam = _class_cost(sorted_vals)
    top_start = 0
    if sdam > 0.0:
        max_k = min(v.size, 6)
        for k in range(1, max_k + 1):
            breaks, sdcm = jenks_partition(sorted_vals, k)
            if 1.0 - sdcm / sdam >= gvf_target or k == max_k:
                top_start = breaks[-1]
                break
    top = [order[i] for i in range(top_start, v.size)]
    if len(top) == 1:
        return certain(top[0])
    return uncertain(_ranked(top, v))


def detect_ev(
    member_scores: Sequence[ScoreVector], candidates: Sequence[Candidate] | None = None
) -> Verdict:
    """Ensemble voting: every member votes its argmax candidate.

    A unanimous vote means certain; otherwise the distinct voted candidates
    form the uncertain set, so its size never exceeds the member count.
    Argmax ties go to the lowest id; the set is ordered by the mean member
    score.
    """
    if not member_scores:
        raise ValueError("ensemble voting needs at least one member vector")
    n = len(member_scores[0])
    if n == 0:
        raise ValueError("empty score vector")
    if any(len(m) != n for m in member_scores):
        raise ValueError("member vectors must cover the same candidate set")
    votes = [int(np.argmax(m.values)) for m in member_scores]
    distinct = sorted(set(votes))
    ids = [candidates[i].id for i in range(n)] if candidates is not None else list(range(n))
    if len(distinct) == 1:
        return certain(ids[distinct[0]])
    mean = np.mean([m.values for m in member_scores], axis=0)
    ordered = sorted(distinct, key=lambda i: (-mean[i], ids[i]))
    return uncertain(tuple(ids[i] for i in ordered))


# ---------------------------------------------------------------------------
# Full pipeline configuration


@dataclass(frozen=True)
class MethodSpec:
    """One complete pipeline configuration.

    Applies, in order: top-k selection, optional (super)class filtering,
    calibration, then the detector. ensemble_size selects how many leading
    member rows take part; None means the single member 0. Consistency
    between detector and calibration is checked at construction, so a bad
    combination fails before any scene is processed.
    """

    top_k: int
    detector: DetectorSpec
    filter: str | None = None
    ensemble_size: int | None = None
    calibration: CalibSpec = field(default_factory=CalibSpec)

    def __post_init__(self) -> None:
        if self.top_k < 1:
            raise MethodConfigError(f"top_k must be at least 1, got {self.top_k}")
        if self.filter is not None and self.filter not in FILTER_LEVELS:
            raise MethodConfigError(f"filter must be None or one of {FILTER_LEVELS}")
        if self.ensemble_size is not None and self.ensemble_size < 1:
            raise MethodConfigError("ensemble_size must be at least 1")
        mode = self.calibration.ensemble_mode
        out = self.calibration.output_fn
        det = self.detector.method
        if det == "EV":
            if mode != "keep_members":
                raise MethodConfigError("EV requires keep_members calibration")
        elif mode == "keep_members":
            raise MethodConfigError(f"{det} takes a single score vector, not kept members")
        if mode in ("average", "keep_members") and self.ensemble_size is None:
            raise MethodConfigError(f"{mode} calibration requires an explicit ensemble_size")
        if mode == "single" and self.ensemble_size is not None:
            raise MethodConfigError("single-member calibration cannot take an ensemble_size")
        required_out = {
            "SA": ("softmax",),
            "CAHC": ("softmax",),
            "SoftTr": ("softmax",),
            "SigmTr": ("sigmoid",),
            "RLT": ("raw",),
            "Jenks": ("softmax", "sigmoid"),
            "EV": ("softmax", "sigmoid", "raw"),
        }[det]
        if out not in required_out:
            raise MethodConfigError(
                f"{det} requires output_fn in {required_out}, got {out!r}"
            )

    def spec_string(self) -> str:
        """Compact parseable form, e.g. "top16+CF+TS(1.5)+SoftTr(0.4)"."""
        parts = [f"top{self.top_k}"]
        if self.filter == "class":
            parts.append("CF")
        elif self.filter == "superclass":
            parts.append("SCF")
        if self.ensemble_size is not None:
            parts.append(f"Ens{self.ensemble_size}")
        if self.calibration.temperature != 1.0:
            parts.append(f"TS({self.calibration.temperature:g})")
        parts.append(self.detector.token())
        return "+".join(parts)

    def display_name(self) -> str:
        """Report-style name without the top-k, e.g. "Ens_4 + EV"."""
        parts = []
        if self.ensemble_size is not None:
            parts.append(f"Ens_{self.ensemble_size}")
        if self.filter == "class":
            parts.append("CF")
        elif self.filter == "superclass":
            parts.append("SCF")
        if self.calibration.temperature != 1.0:
            parts.append(f"TS({self.calibration.temperature:g})")
        parts.append(self.detector.token())
        return " + ".join(parts)


_TOKEN_RES = {
    "top": re.compile(r"^top(\d+)$"),
    "ens": re.compile(r"^Ens(\d+)$"),
    "ts": re.compile(r"^TS\(([^)]+)\)$"),
    "det_param": re.compile(r"^(CAHC|SoftTr|SigmTr|RLT|Jenks)\(([^)]+)\)$"),
}


def parse_method(text: str) -> MethodSpec:
    """Parse the compact method string produced by MethodSpec.spec_string."""
    top_k = None
    filter_level = None
    ensemble_size = None
    temperature = 1.0
    detector: DetectorSpec | None = None
    for token in (t.strip() for t in text.split("+")):
        if not token:
            raise MethodConfigError(f"empty component in method string {text!r}")
        if m := _TOKEN_RES["top"].match(token):
            top_k = int(m.group(1))
        elif token == "CF":
            filter_level = "class"
        elif token == "SCF":
            filter_level = "superclass"
        elif m := _TOKEN_RES["ens"].match(token):
            ensemble_size = int(m.group(1))
        elif m := _TOKEN_RES["ts"].match(token):
            temperature = float(m.group(1))
        elif token in ("SA", "EV"):
            detector = DetectorSpec(method=token)
        elif m := _TOKEN_RES["det_param"].match(token):
            name, value = m.group(1), float(m.group(2))
            param = {"CAHC": "delta", "Jenks": "jenks_gvf"}.get(name, "eta")
            detector = DetectorSpec(method=name, **{param: value})
        else:
            raise MethodConfigError(f"unrecognized component {token!r} in {text!r}")
    if top_k is None:
        raise MethodConfigError(f"method string {text!r} is missing a top-k component")
    if detector is None:
        raise MethodConfigError(f"method string {text!r} names no detector")
    return make_method(
        top_k=top_k,
        detector=detector,
        filter=filter_level,
        ensemble_size=ensemble_size,
        temperature=temperature,
    )


def make_method(
    top_k: int,
    detector: DetectorSpec,
    filter: str | None = None,
    ensemble_size: int | None = None,
    temperature: float = 1.0,
) -> MethodSpec:
    """Build a MethodSpec, deriving the calibration the detector needs."""
    output_fn = {"SigmTr": "sigmoid", "RLT": "raw"}.get(detector.method, "softmax")
    if detector.method == "EV":
        mode = "keep_members"
    elif ensemble_size is not None:
        mode = "average"
    else:
        mode = "single"
    try:
        calib = CalibSpec(temperature=temperature, output_fn=output_fn, ensemble_mode=mode)
    except ValueError as exc:
        raise MethodConfigError(str(exc)) from exc
    return MethodSpec(
        top_k=top_k,
        detector=detector,
        filter=filter,
        ensemble_size=ensemble_size,
        calibration=calib,
    )


def run_pipeline(scene: Scene, method: MethodSpec) -> Verdict:
    """Evaluate one scene: top-k, optional filtering, calibration, detector.

    The returned candidate ids always refer to the scene's original ids,
    whatever was filtered away in between.
    """
    cands, scores = select_topk(scene.candidates, scene.scores, method.top_k)
    failopen = False
    if method.filter is not None:
        r_c = scene.predicted_class if method.filter == "class" else scene.predicted_superclass
        cands, scores, failopen = filter_class(cands, scores, r_c, level=method.filter)
    if method.ensemble_size is not None:
        scores = scores.take_members(method.ensemble_size)
    calibrated = calibrate(scores, method.calibration)
    det = method.detector
    if det.method == "EV":
        verdict = detect_ev(calibrated, cands)
        return Verdict(verdict.status, verdict.candidate_ids,
                       below_threshold=verdict.below_threshold, filter_failopen=failopen)
    if det.method == "SA":
        verdict = detect_sa(calibrated)
    elif det.method == "CAHC":
        verdict = detect_cahc(calibrated, det.delta)
    elif det.method in THRESHOLD_METHODS:
        verdict = detect_threshold(calibrated, det.eta)
    else:
        verdict = detect_jenks(calibrated, det.jenks_gvf)
    return Verdict(
        verdict.status,
        tuple(cands[pos].id for pos in verdict.candidate_ids),
        below_threshold=verdict.below_threshold,
        filter_failopen=failopen,
    )

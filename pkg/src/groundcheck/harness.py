"""Grid search over pipeline configurations, report and question emission."""

from __future__ import annotations

import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .dataset import Scene
from .metrics import EvalReport, apply_restrictions, evaluate_method
from .questions import disambiguation_report, expressions_for_verdict
from .uncertainty import (
    DetectorSpec,
    MethodConfigError,
    MethodSpec,
    run_pipeline,
)
from .calibration import CalibSpec

log = logging.getLogger(__name__)

#: Environment variable capping the number of evaluation workers.
THREADS_ENV = "UG_THREADS"


def _frange(start: float, stop: float, step: float) -> tuple[float, ...]:
    values = []
    k = 0
    while (value := round(start + k * step, 10)) <= stop + 1e-12:
        values.append(value)
        k += 1
    return tuple(values)


@dataclass(frozen=True)
class Restrictions:
    """Selection bounds for reportable methods."""

    max_unc_obj: int = 5
    th_iou_min: float = 0.75
    cert_acc_min: float = 0.8


@dataclass(frozen=True)
class CalibOption:
    """One calibration point of the grid: output function, temperature,
    and how many ensemble members participate (None = single member 0)."""

    output_fn: str = "softmax"
    temperature: float = 1.0
    ensemble_size: int | None = None


@dataclass(frozen=True)
class GridConfig:
    """The cross-product to explore plus the selection restrictions.

    Inconsistent (calibration, detector) pairings in the product are
    skipped rather than rejected: the grid deliberately spans many
    combinations and only the consistent ones are evaluated.
    """

    topk_grid: tuple[int, ...] = (8, 16, 32, 64)
    filters: tuple[str | None, ...] = (None, "class", "superclass")
    calibrations: tuple[CalibOption, ...] = ()
    detectors: tuple[DetectorSpec, ...] = ()
    restrictions: Restrictions = field(default_factory=Restrictions)

    def __post_init__(self) -> None:
        if not self.topk_grid or not self.filters:
            raise ValueError("topk_grid and filters must be nonempty")
        if not self.calibrations or not self.detectors:
            raise ValueError("calibrations and detectors must be nonempty")


def default_grid(max_members: int = 5) -> GridConfig:
    """A broad default grid mirroring the explored hyperparameter ranges:

    temperatures {0.5, 1, 1.5, 2, 3, 5}, thresholds 0.05..0.95 step 0.05,
    merge distances 0.01..0.2 step 0.01, top-k {8, 16, 32, 64}, ensembles
    up to max_members, with and without (super)class filtering.
    """
    calibrations: list[CalibOption] = [
        CalibOption(output_fn="softmax", temperature=t) for t in (0.5, 1.0, 1.5, 2.0, 3.0, 5.0)
    ]
    calibrations.append(CalibOption(output_fn="sigmoid"))
    calibrations.append(CalibOption(output_fn="raw"))
    for size in range(2, max_members + 1):
        calibrations.append(CalibOption(output_fn="softmax", ensemble_size=size))
    detectors: list[DetectorSpec] = [DetectorSpec(method="SA"), DetectorSpec(method="EV")]
    detectors += [DetectorSpec(method="CAHC", delta=d) for d in _frange(0.01, 0.2, 0.01)]
    for eta in _frange(0.05, 0.95, 0.05):
        detectors.append(DetectorSpec(method="SoftTr", eta=eta))
        detectors.append(DetectorSpec(method="SigmTr", eta=eta))
        detectors.append(DetectorSpec(method="RLT", eta=eta))
    detectors.append(DetectorSpec(method="Jenks", jenks_gvf=0.9))
    return GridConfig(calibrations=tuple(calibrations), detectors=tuple(detectors))


def load_grid_config(path: str | Path) -> GridConfig:
    """Read a GridConfig from its JSON form (see README for the schema)."""
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    calibrations = tuple(
        CalibOption(
            output_fn=c.get("output_fn", "softmax"),
            temperature=float(c.get("temperature", 1.0)),
            ensemble_size=c.get("ensemble_size"),
        )
        for c in raw.get("calibrations", ())
    )
    detectors: list[DetectorSpec] = []
    for d in raw.get("detectors", ()):
        method = d["method"]
        params = {k: d[k] for k in ("delta", "eta", "jenks_gvf") if k in d}
        grid_keys = [k for k, v in params.items() if isinstance(v, (list, tuple))]
        if grid_keys:
            (key,) = grid_keys
            for value in params[key]:
                detectors.append(DetectorSpec(method=method, **{**params, key: float(value)}))
        else:
            detectors.append(DetectorSpec(method=method, **params))
    restrictions_raw = raw.get("restrictions", {})
    return GridConfig(
        topk_grid=tuple(raw.get("topk_grid", (8, 16, 32, 64))),
        filters=tuple(
            {"none": None, "CF": "class", "SCF": "superclass"}[f]
            for f in raw.get("filters", ("none", "CF", "SCF"))
        ),
        calibrations=calibrations,
        detectors=tuple(detectors),
        restrictions=Restrictions(
            max_unc_obj=int(restrictions_raw.get("max_unc_obj", 5)),
            th_iou_min=float(restrictions_raw.get("th_iou_min", 0.75)),
            cert_acc_min=float(restrictions_raw.get("cert_acc_min", 0.8)),
        ),
    )


def expand_grid(config: GridConfig, available_members: int) -> list[MethodSpec]:
    """All consistent MethodSpecs in the config's cross-product.

    Pairings the detector cannot use (wrong output function, missing or
    oversized ensemble) are skipped with a log line, mirroring how only
    viable combinations are ever reported.
    """
    specs: list[MethodSpec] = []
    for top_k in config.topk_grid:
        for filt in config.filters:
            for calib in config.calibrations:
                if calib.ensemble_size is not None and calib.ensemble_size > available_members:
                    log.debug(
                        "skipping ensemble of %d: only %d members in data",
                        calib.ensemble_size,
                        available_members,
                    )
                    continue
                for det in config.detectors:
                    if det.method == "EV":
                        mode = "keep_members"
                    elif calib.ensemble_size is not None:
                        mode = "average"
                    else:
                        mode = "single"
                    try:
                        specs.append(
                            MethodSpec(
                                top_k=top_k,
                                detector=det,
                                filter=filt,
                                ensemble_size=calib.ensemble_size,
                                calibration=CalibSpec(
                                    temperature=calib.temperature,
                                    output_fn=calib.output_fn,
                                    ensemble_mode=mode,
                                ),
                            )
                        )
                    except (MethodConfigError, ValueError) as exc:
                        log.debug("skipping inconsistent combination: %s", exc)
    return specs


def run_grid(scenes: list[Scene], config: GridConfig) -> list[EvalReport]:
    """Evaluate every consistent combination of the grid.

    Reports come back sorted by th_iou descending, ties broken by
    avg_unc_obj ascending and then the method string, so repeated runs
    over the same inputs produce identical output.
    """
    if not scenes:
        raise ValueError("cannot run a grid over an empty scene list")
    specs = expand_grid(config, available_members=scenes[0].scores.n_members)
    if not specs:
        raise MethodConfigError("grid contains no consistent combination")
    workers = max(1, int(os.environ.get(THREADS_ENV, "1")))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(lambda m: evaluate_method(scenes, m), specs))
    else:
        reports = [evaluate_method(scenes, m) for m in specs]
    reports.sort(key=lambda r: (-r.th_iou, r.avg_unc_obj, r.method.spec_string()))
    return reports


def restrict_reports(reports: list[EvalReport], restrictions: Restrictions) -> list[EvalReport]:
    return apply_restrictions(
        reports,
        max_unc_obj=restrictions.max_unc_obj,
        th_iou_min=restrictions.th_iou_min,
        cert_acc_min=restrictions.cert_acc_min,
    )


REPORT_COLUMNS = (
    "Method",
    "top-k",
    "CertIoU.5",
    "CertAcc",
    "CorrUnc",
    "Th.IoU.5",
    "AvgUncObj",
    "MaxUncObj",
)


def _report_cells(report: EvalReport) -> tuple[str, ...]:
    return (
        report.method.display_name(),
        str(report.method.top_k),
        f"{report.cert_iou:.3f}",
        f"{report.cert_acc:.3f}",
        f"{report.corr_unc:.3f}",
        f"{report.th_iou:.3f}",
        f"{report.avg_unc_obj:.2f}",
        str(report.max_unc_obj),
    )


def emit_report(reports: Iterable[EvalReport], format: str = "csv") -> str:
    """Render reports as CSV or a markdown pipe table.

    Three decimals everywhere except the average object count (two); the
    output is byte-stable for identical input.
    """
    rows = [_report_cells(r) for r in reports]
    if format == "csv":
        lines = [", ".join(REPORT_COLUMNS)]
        lines += [", ".join(row) for row in rows]
        return "\n".join(lines) + "\n"
    if format == "markdown":
        lines = ["| " + " | ".join(REPORT_COLUMNS) + " |"]
        lines.append("|" + "|".join(" --- " for _ in REPORT_COLUMNS) + "|")
        lines += ["| " + " | ".join(row) + " |" for row in rows]
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown report format {format!r}")


def emit_questions(scenes: list[Scene], method: MethodSpec, out_path: str | Path) -> int:
    """Write one disambiguation record per uncertain scene; returns the count.

    The records use the same line-delimited convention as the scene files
    and carry boxes, expressions, and the assembled question.
    """
    count = 0
    with open(out_path, "w", encoding="utf-8") as fh:
        for scene in scenes:
            verdict = run_pipeline(scene, method)
            if verdict.is_certain:
                continue
            expressions = expressions_for_verdict(scene, verdict)
            fh.write(json.dumps(disambiguation_report(scene, verdict, expressions)) + "\n")
            count += 1
    return count

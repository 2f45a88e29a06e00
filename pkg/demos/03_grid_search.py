"""Grid search over pipeline configurations on synthetic planted scenes.

Run with: python3 demos/03_grid_search.py
"""

from groundcheck import (
    CalibOption,
    DetectorSpec,
    GridConfig,
    emit_report,
    restrict_reports,
    run_grid,
)
from groundcheck.synth import make_scenes

# 150 seeded scenes with a planted ground-truth candidate and a 4-member
# ensemble whose members disagree on a fraction of the scenes.
scenes = make_scenes(150, seed=42, n_members=4, p_top1_correct=0.75)

config = GridConfig(
    topk_grid=(8, 16),
    filters=(None, "class"),
    calibrations=(
        CalibOption(output_fn="softmax"),
        CalibOption(output_fn="softmax", temperature=2.0),
        CalibOption(output_fn="softmax", ensemble_size=4),
    ),
    detectors=(
        DetectorSpec(method="SA"),
        DetectorSpec(method="EV"),
        DetectorSpec(method="SoftTr", eta=0.4),
        DetectorSpec(method="SoftTr", eta=0.6),
        DetectorSpec(method="CAHC", delta=0.05),
        DetectorSpec(method="Jenks", jenks_gvf=0.9),
    ),
)

reports = run_grid(scenes, config)
print(f"evaluated {len(reports)} consistent configurations")
print()
print("top five by theoretical accuracy:")
print(emit_report(reports[:5], format="csv"))

survivors = restrict_reports(reports, config.restrictions)
print(f"{len(survivors)} configurations pass the selection restrictions")
print("(candidate sets of at most 5, Th.IoU above 0.75, CertAcc above 0.8)")
if survivors:
    print()
    print(emit_report(survivors[:5], format="markdown"))

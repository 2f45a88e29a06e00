"""From an uncertain verdict to a clarification question.

Run with: python3 demos/04_questions.py
"""

import numpy as np

from groundcheck import (
    AttributeSet,
    BoundingBox,
    Candidate,
    Scene,
    ScoreSet,
    compute_distance_counts,
    disambiguation_report,
    expressions_for_verdict,
    generate_question,
    parse_method,
    run_pipeline,
)

# Three traffic cones on the left shoulder, two of them orange, at
# increasing distance. The command is ambiguous between them.
cones = tuple(
    Candidate(
        id=i,
        box=BoundingBox(x=60 + 150 * i, y=300, w=70, h=110),
        rpn_score=0.9 - 0.1 * i,
        class_label="traffic cone",
        superclass_label="object",
        attributes=AttributeSet(color=color, action=None, location="left"),
        lidar_distance=distance,
    )
    for i, (color, distance) in enumerate([("orange", 4.2), ("orange", 9.8), ("white", 14.5)])
)

scene = Scene(
    scene_id="demo-0001",
    command="pull over after the cone on the left",
    image_width=800,
    image_height=600,
    candidates=cones,
    scores=ScoreSet(
        members=np.array([[2.0, 1.9, 0.2], [1.8, 2.1, 0.1], [2.1, 1.7, 0.3], [1.9, 2.2, 0.2]]),
        kind="raw_logit",
    ),
    gt_box=cones[1].box,
    predicted_class="traffic cone",
    predicted_superclass="object",
)

method = parse_method("top8+Ens4+EV")
verdict = run_pipeline(scene, method)
print("verdict:", verdict.status, verdict.candidate_ids)

# Distance ordinals rank look-alike objects (same class, location, color).
for count in compute_distance_counts(scene.candidates):
    print(f"candidate {count.candidate_id}: ordinal {count.ordinal}")

expressions = expressions_for_verdict(scene, verdict)
for expr in expressions:
    print(f"candidate {expr.candidate_id}: {expr.text!r}")

print()
print(generate_question(expressions))

# The structured record a display layer would consume:
record = disambiguation_report(scene, verdict, expressions)
print()
print("record keys:", sorted(record))
print("expressions unique:", record["unique_expressions"])

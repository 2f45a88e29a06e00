"""groundcheck: uncertainty detection and clarification for visual grounding.

Given per-candidate scores recorded from a visual-grounding model, this
package decides whether the model is certain about the referred object,
selects the candidates causing any uncertainty, scores whole pipeline
configurations, and assembles template clarification questions.
"""

from .calibration import (
    CalibSpec,
    ScoreVector,
    calibrate,
    ensemble_average,
    entropy,
    sigmoid_scores,
    softmax_with_temperature,
)
from .dataset import (
    AttributeSet,
    BoundingBox,
    Candidate,
    Scene,
    SceneFormatError,
    SceneInvariantError,
    ScoreSet,
    Vocabulary,
    dump_scenes,
    load_scenes,
    normalize_box,
    scene_from_record,
    scene_to_record,
    serialize_scenes,
)
from .harness import (
    CalibOption,
    GridConfig,
    Restrictions,
    default_grid,
    emit_questions,
    emit_report,
    expand_grid,
    load_grid_config,
    restrict_reports,
    run_grid,
)
from .metrics import (
    EvalReport,
    apply_restrictions,
    bleu4,
    evaluate_method,
    evaluate_subsets,
    iou,
    is_correct,
    rouge_l,
    tokenize,
)
from .questions import (
    DistanceCount,
    Expression,
    compute_distance_counts,
    disambiguation_report,
    expressions_for_verdict,
    generate_expression,
    generate_question,
)
from .uncertainty import (
    DetectorSpec,
    MethodConfigError,
    MethodSpec,
    Verdict,
    detect_cahc,
    detect_ev,
    detect_jenks,
    detect_sa,
    detect_threshold,
    filter_class,
    jenks_partition,
    make_method,
    parse_method,
    run_pipeline,
    select_topk,
)

__version__ = "0.1.0"

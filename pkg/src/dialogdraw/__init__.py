"""Asynchronous director/designer dialogs over an editable canvas."""

from .layouts import (
    COLORS,
    GRID,
    SHAPES,
    CocoObject,
    EditOp,
    EditRejected,
    Layout,
    PatternRules,
    ShapeObject,
    apply_edit,
    apply_edits,
    coco_similarity,
    diff_canvases,
    exact_match,
    generate_pattern_shape_layout,
    generate_random_shape_layout,
)
from .coco import CocoFormatError, ingest_coco_annotations
from .dialog import (
    DESIGNER,
    DIRECTOR,
    DialogAct,
    DialogState,
    ProtocolError,
    Turn,
    append_turn,
    check_termination,
    legal_acts,
    new_session,
    segment_subdialogs,
)
from .nlp import (
    MentionSet,
    ValidationResult,
    classify_dialog_act,
    extract_mentions,
    normalize,
    validate_submission,
)
from .agents import (
    Probe,
    ProbeUnavailable,
    WorkerScore,
    designer_policy,
    director_policy,
    ground_instruction,
    make_probe,
    next_instruction,
    score_response,
)
from .dispatch import DispatchError, DispatchService, ServiceConfig, replay_events
from .selfplay import run_selfplay

__version__ = "0.1.0"

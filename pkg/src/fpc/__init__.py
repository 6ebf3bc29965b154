"""Keyframe-supervised action correction toolkit.

Fuses histories of predicted action chunks (similarity- and recency-weighted
pose stream, recency-only gripper stream), asks a supervisor backend to
approve or correct actions at gripper keyframes via a two-bin
direction/magnitude grammar, generates QA training data from recorded
episodes, and ships a seeded pick-and-place testbed that measures the
supervisor's benefit under injected disturbances.
"""

from .actions import (
    ActionVector,
    AlignedPredictions,
    ChunkGapError,
    PredictionBuffer,
    PredictionChunk,
)
from .backends import (
    BackendConfig,
    HttpBackend,
    OracleBackend,
    OracleTruth,
    ScriptedBackend,
    SupervisorError,
    build_backend,
)
from .dataset import (
    Episode,
    GenerationConfig,
    QARecord,
    SchemaError,
    Step,
    detect_changes,
    generate,
    generate_dataset,
    read_episodes,
    retained_frames,
    write_records,
)
from .fusion import FusionParams, FusionResult, fuse, fusion_weights, kernel_name
from .language import (
    CorrectionDelta,
    CorrectionText,
    GripperEvent,
    MalformedResponseError,
    ParsedCorrection,
    Thresholds,
    Verdict,
    build_prompt,
    compose_answer,
    discretize,
    parse_response,
)
from .runtime import (
    LoopState,
    LoopStats,
    SupervisorQuery,
    apply_correction,
    binarize_gripper,
    is_keyframe,
    supervise_step,
)
from .sim import (
    Disturbance,
    EpisodeResult,
    Env,
    Scenario,
    SimState,
    derive_seeds,
    evaluate,
    expert_policy,
    reset,
    run_episode,
)

__version__ = "0.1.0"

"""Grounded smart-home command execution.

A simulated home, a command language, an intent router that rejects or
clarifies before generation, a deterministic grounding verifier that keeps
multi-step commands aligned, and a benchmark harness around it all.
"""

from .actions import (
    ERROR_TOKEN,
    ActionSequence,
    AtomicAction,
    Call,
    ErrorToken,
    SequenceParseError,
    normalize_action,
    normalize_sequence,
    parse_sequence,
    render_sequence,
)
from .backends import (
    BackendError,
    BackendSpec,
    CompletionResult,
    HttpBackend,
    NoisyOracleBackend,
    RuleOracleBackend,
    ScriptedBackend,
    TokenUsage,
    build_backend,
    complete,
    embed_intent,
    parse_backend_spec,
)
from .bench import (
    Corpus,
    InteractionSpec,
    MetricsReport,
    TaskRecord,
    TaskRun,
    exact_match,
    f1_score,
    generate_corpus,
    load_corpus,
    run_corpus,
    score_corpus,
    write_corpus,
    write_report,
)
from .generator import FewShotExample, GenerationRequest, build_stage2_prompt, generate_candidates
from .home_model import (
    Capability,
    Device,
    HomeState,
    Room,
    SnapshotError,
    apply_action,
    capabilities_of,
    load_snapshot,
    lookup_device,
    render_state_text,
    snapshot_document,
)
from .pipeline import (
    Outcome,
    Pipeline,
    PipelineResult,
    Session,
    StageUsage,
    build_feedback,
)
from .router import (
    IntentAnalysis,
    OperationVerdict,
    Route,
    build_stage1_prompt,
    parse_analysis,
    route_instruction,
)
from .verifier import (
    FilterOutcome,
    VerificationResult,
    filter_sequence,
    verify_action,
    verify_capability,
    verify_device,
    verify_room,
)

__version__ = "0.1.0"

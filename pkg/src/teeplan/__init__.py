"""Privacy-aware placement of neural-network layers across trusted enclaves
and untrusted accelerators, with an exact pipeline cost model and a
deterministic discrete-event simulator to back it up."""

from .cost import (
    DEFAULT_CRYPTO_OVERHEAD_S,
    Stage,
    StageKind,
    StagePlan,
    bottleneck,
    chunk_completion,
    chunk_completion_ns,
    decompose,
    single_frame_latency,
    single_frame_latency_ns,
)
from .model import (
    ChunkSpec,
    Device,
    InfeasiblePolicyError,
    LayerKind,
    LayerSpec,
    NetworkProfile,
    Placement,
    ResourceGraph,
    Segment,
    ShapeError,
    ValidationError,
    ValidationResult,
    expand_placement,
    validate_resource_graph,
)
from .pipesim import SimEvent, SimResult, simulate, validate_against_model, write_trace
from .planner import (
    CandidateEvaluation,
    PlanReport,
    ReplanResult,
    StrategyRow,
    TreeConfig,
    brute_force_plan,
    default_tree_config,
    enumerate_candidates,
    evaluate,
    plan,
    replan_if_deviation,
    strategy_compare,
)
from .privacy import LeakageReport, PolicyMode, PrivacyPolicy, admissible, check_c1, check_c2
from .shapes import (
    LayerSignature,
    TensorShape,
    conv_output_dim,
    propagate_shapes,
    resolution_profile,
)

__version__ = "0.1.0"

__all__ = [
    "ChunkSpec",
    "CandidateEvaluation",
    "DEFAULT_CRYPTO_OVERHEAD_S",
    "Device",
    "InfeasiblePolicyError",
    "LayerKind",
    "LayerSignature",
    "LayerSpec",
    "LeakageReport",
    "NetworkProfile",
    "Placement",
    "PlanReport",
    "PolicyMode",
    "PrivacyPolicy",
    "ReplanResult",
    "ResourceGraph",
    "Segment",
    "ShapeError",
    "SimEvent",
    "SimResult",
    "Stage",
    "StageKind",
    "StagePlan",
    "StrategyRow",
    "TensorShape",
    "TreeConfig",
    "ValidationError",
    "ValidationResult",
    "admissible",
    "bottleneck",
    "brute_force_plan",
    "check_c1",
    "check_c2",
    "chunk_completion",
    "chunk_completion_ns",
    "conv_output_dim",
    "decompose",
    "default_tree_config",
    "enumerate_candidates",
    "evaluate",
    "expand_placement",
    "plan",
    "propagate_shapes",
    "replan_if_deviation",
    "resolution_profile",
    "simulate",
    "single_frame_latency",
    "single_frame_latency_ns",
    "strategy_compare",
    "validate_against_model",
    "validate_resource_graph",
    "write_trace",
]

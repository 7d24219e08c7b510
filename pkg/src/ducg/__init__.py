"""Dynamic uncertain causality graph engine.

Construct and fuse causal diagnostic models, reduce them against evidence,
rank disease hypotheses by suspicion degree, recommend the most informative
next check, serve the interactive diagnosis loop over HTTP, and verify
diagnostic precision against case corpora.
"""

from .errors import (
    DucgError,
    EnumerationSizeError,
    EvidenceError,
    FusionConflictError,
    GateExpressionError,
    ModelFormatError,
    PreconditionError,
    UnknownReferenceError,
    VersionMismatchError,
)
from .evidence import EvidenceSet
from .fusion import fuse
from .inference import (
    SuspicionEntry,
    SuspicionReport,
    check_completeness,
    forward_state_distribution,
    likelihood,
    suspicion,
)
from .model import (
    ChiefComplaintModel,
    DiseaseAttributes,
    EngineDefaults,
    FunctionalLink,
    LogicGateSpec,
    RiskScaler,
    SingleDiseaseModule,
    Variable,
    VariableId,
)
from .modelfile import load_model, load_model_file, model_to_dict, save_model
from .oracle import exact_posterior
from .priors import apply_risk_evidence, ranked_priors
from .recommend import (
    RecommendationEntry,
    RecommendationList,
    lambda_count,
    predictive_distribution,
    recommend,
)
from .simplify import SimplifiedGraph, SubDucg, separate, serialize_subducg, simplify
from .validation import ValidationReport, validate
from .verify import (
    CaseRecord,
    VerificationReport,
    ingest,
    render_report,
    run_verification,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"

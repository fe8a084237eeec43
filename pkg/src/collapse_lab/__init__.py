"""State-vector experiments contrasting unitary and collapse measurement dynamics."""
from .dynamics import (
    AuditReport,
    Ensemble,
    collapse_ensemble,
    collapse_sample,
    conservation_audit,
    ensemble_expectation,
    evolve_everett,
)
from .experiments import (
    ExperimentReport,
    RetrodictionFinding,
    classify_false_memory,
    retrodict_with_phase,
    run_electron_experiment,
    run_photon_experiment,
    run_retrodiction,
)
from .qcore import IsometrySpec, Operator, StateVec, apply, complete_isometry, expectation, inner, tensor_op, tensor_state

__version__ = "0.1.0"

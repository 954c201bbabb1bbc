"""Coherence functionals for filter histories and their phase-space form."""

__version__ = "0.1.0"

from ._accel import BACKEND
from .coherence import (
    CoherenceValue,
    SystemModel,
    additivity_gap,
    axiom_suite,
    coherence,
    coherence_matrix,
    condition,
    inference_scan,
    interference,
    is_consistent,
    postselect,
    quantum_correlation,
    statistical_correlation,
    value,
)
from .histories import (
    FilterHistory,
    HistoryProposition,
    TemporalGrid,
    class_operator,
    finer_than,
    incompatible,
    meet,
    operationally_additive,
)
from .operators import (
    ObservableSpec,
    Operator,
    heisenberg_filter,
    matrix_exponential,
    tensor_product,
)

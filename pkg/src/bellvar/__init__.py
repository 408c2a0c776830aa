"""Decomposition-dependent Bell inequality toolkit for two-qubit states."""

from .bell import (
    InequalityReport,
    MeasurementSettings,
    Observable,
    chsh_max,
    chsh_value,
    correlation,
    correlation_pure,
    evaluate_eq6,
    evaluate_eq7,
)
from .optimize import OptimizerConfig, ViolationResult, evaluate_witness, maximize_violation
from .qstate import (
    Decomposition,
    DomainError,
    PureState,
    QubitPairState,
    bell_decomposition,
    concurrence,
    mems_decomposition,
    mems_state,
    product_decomposition,
    separable_state,
    validate_decomposition,
    werner_decomposition,
    werner_state,
)

__version__ = "0.1.0"

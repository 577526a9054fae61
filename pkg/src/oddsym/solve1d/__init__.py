from .diagnostics import (
    DerivativeGap,
    HamiltonianSample,
    HamiltonianTrace,
    OrderingCheck,
    ShapeDiagnostics,
    derivative_comparison,
    grid_shape_diagnostics,
    hamiltonian_trace,
    ordering_check,
    shape_diagnostics,
)
from .fem import Discretization, energy, ldl_pivots
from .multistart import MultiStartResult, multi_start_uniqueness, uniqueness_certified
from .newton import (
    DEFAULT_PRESETS,
    PRESETS,
    Solution,
    hessian_negative_count,
    initial_values,
    minimize,
    minimize_antisymmetric,
    newton_minimize,
)
from .shooting import default_bracket, shoot

__all__ = [
    "Discretization",
    "energy",
    "ldl_pivots",
    "Solution",
    "PRESETS",
    "DEFAULT_PRESETS",
    "initial_values",
    "newton_minimize",
    "minimize",
    "minimize_antisymmetric",
    "hessian_negative_count",
    "shoot",
    "default_bracket",
    "MultiStartResult",
    "multi_start_uniqueness",
    "uniqueness_certified",
    "ShapeDiagnostics",
    "HamiltonianSample",
    "HamiltonianTrace",
    "DerivativeGap",
    "OrderingCheck",
    "shape_diagnostics",
    "grid_shape_diagnostics",
    "hamiltonian_trace",
    "derivative_comparison",
    "ordering_check",
]

"""oddsym - antisymmetry, uniqueness and symmetry breaking for 1-D weighted double-well energies."""

from .bounds import (
    antisymmetric_lower_bound,
    bound_report,
    interval_sequence_scan,
    linear_energy_min,
    phi_monotone_check,
    symmetry_breaking_criterion,
    upper_bound_phi,
    zero_state_instability,
)
from .config import ExperimentConfig, config_from_text, load_config
from .eigen import (
    anna_lower_bound,
    l1_product_certificate,
    lambda1,
    muckenhoupt_constant,
    radial_closed_forms,
    uniqueness_certificate,
)
from .grid import GridFunction
from .presets import preset_catalog
from .rearrange import MonotoneGrid, build_family, flipped, verify_odd_rearrangement
from .runner import run
from .solve1d import (
    derivative_comparison,
    energy,
    hamiltonian_trace,
    minimize,
    minimize_antisymmetric,
    multi_start_uniqueness,
    shape_diagnostics,
    shoot,
)
from .weights import (
    Constant,
    EvenPolynomial,
    ExpQuadratic,
    Polynomial,
    PowerAbs,
    Problem,
    Quartic,
    Tabulated,
    TabulatedEven,
    change_of_variables,
    check_hypotheses,
)

__all__ = [
    "Constant",
    "ExpQuadratic",
    "PowerAbs",
    "Polynomial",
    "Tabulated",
    "Quartic",
    "EvenPolynomial",
    "TabulatedEven",
    "Problem",
    "check_hypotheses",
    "change_of_variables",
    "GridFunction",
    "MonotoneGrid",
    "flipped",
    "build_family",
    "verify_odd_rearrangement",
    "energy",
    "minimize",
    "minimize_antisymmetric",
    "shoot",
    "multi_start_uniqueness",
    "hamiltonian_trace",
    "shape_diagnostics",
    "derivative_comparison",
    "linear_energy_min",
    "upper_bound_phi",
    "antisymmetric_lower_bound",
    "symmetry_breaking_criterion",
    "interval_sequence_scan",
    "phi_monotone_check",
    "zero_state_instability",
    "bound_report",
    "lambda1",
    "muckenhoupt_constant",
    "anna_lower_bound",
    "uniqueness_certificate",
    "radial_closed_forms",
    "l1_product_certificate",
    "ExperimentConfig",
    "config_from_text",
    "load_config",
    "preset_catalog",
    "run",
]

from .base import WeightFn
from .families import Constant, ExpQuadratic, Polynomial, PowerAbs, Tabulated, weight_from_params
from .hypotheses import Check, HypothesisReport, Verdict, check_hypotheses
from .potential import EvenPolynomial, Potential, Quartic, TabulatedEven, potential_from_params
from .problem import Problem, symmetric_mesh
from .transform import change_of_variables, evaluate_transform_equivalence, gamma_map

__all__ = [
    "WeightFn",
    "Constant",
    "ExpQuadratic",
    "PowerAbs",
    "Polynomial",
    "Tabulated",
    "weight_from_params",
    "Potential",
    "Quartic",
    "EvenPolynomial",
    "TabulatedEven",
    "potential_from_params",
    "Problem",
    "symmetric_mesh",
    "Check",
    "HypothesisReport",
    "Verdict",
    "check_hypotheses",
    "change_of_variables",
    "evaluate_transform_equivalence",
    "gamma_map",
]

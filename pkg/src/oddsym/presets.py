"""Ready-to-run experiment configs, each exercising one regime.

The same texts are shipped as ``presets/<name>.conf`` in the repository.
"""

from dataclasses import dataclass

from .config import ExperimentConfig, config_from_text


@dataclass(frozen=True)
class Preset:
    name: str
    regime: str
    text: str

    @property
    def config(self) -> ExperimentConfig:
        return config_from_text(self.text)


_PRESETS = [
    Preset(
        name="expquad_uniqueness",
        regime="(ab)' >= 0 with log-convex weights: unique, odd and increasing minimizer",
        text="""\
# a = b = exp(x^2): (ab)' >= 0 on (0, L), so the solution is unique, odd and increasing
task = minimize
problem.L = 1.0
problem.m = 1.0
problem.a.family = exp_quadratic
problem.a.alpha = 1.0
problem.b.family = exp_quadratic
problem.b.alpha = 1.0
problem.G.family = quartic
problem.G.M = 1.0
mesh = 1024
""",
    ),
    Preset(
        name="decaying_b_symmetry_breaking",
        regime="b decays to 0 at infinity: minimizers come in flipped non-odd pairs for large L",
        text="""\
# a = 1, b = (|x| + 1)^-2 on a long interval: two minimizers, u and its flipped
task = minimize
problem.L = 30.0
problem.m = 1.0
problem.a.family = constant
problem.a.value = 1.0
problem.b.family = power_abs
problem.b.beta = -2.0
problem.b.delta = 1.0
problem.G.family = quartic
problem.G.M = 1.0
mesh = 2048
""",
    ),
    Preset(
        name="unweighted_heteroclinic",
        regime="a = b = 1 on a long interval: the heteroclinic with energy 2 sqrt(2) / 3",
        text="""\
# the classical Allen-Cahn layer
task = minimize
problem.L = 20.0
problem.m = 1.0
problem.a.family = constant
problem.b.family = constant
problem.G.family = quartic
mesh = 4096
""",
    ),
    Preset(
        name="small_data_non_odd",
        regime="small boundary data on a long interval: the criterion certifies non-odd minimizers",
        text="""\
# L^2 / 4 = 25 > M^2 / (2 G(0)) = 2, so minimizers with m small are not odd
task = sweep
problem.L = 10.0
problem.m = 0.05
problem.a.family = constant
problem.b.family = constant
problem.G.family = quartic
sweep.variable = L
sweep.values = 2.0, 2.5, 2.8284271247461903, 3.0, 5.0, 10.0
sweep.presets = plus_one, minus_one, odd_tanh, random
""",
    ),
    Preset(
        name="gaussian_l1_semistable",
        regime="1/a and b integrable on the line: the L1 product bounds lambda_1 from below",
        text="""\
# 1/a = b = exp(-x^2); G''(0) = -1/(16 pi) makes the L1 certificate hold with equality
task = eigen
problem.L = 3.0
problem.m = 0.0
problem.a.family = exp_quadratic
problem.a.alpha = 1.0
problem.b.family = exp_quadratic
problem.b.alpha = -1.0
problem.G.family = even_polynomial
problem.G.coeffs = 0.0, -0.009947183943243459, 1.0
problem.G.well_location = 0.07052369794346953
problem.G.double_well = true
eigen.mesh = 1024
""",
    ),
    Preset(
        name="convex_potential",
        regime="convex G = s^2: the energy is strictly convex and the minimizer unique",
        text="""\
task = minimize
problem.L = 2.0
problem.m = 1.0
problem.a.family = exp_quadratic
problem.a.alpha = 0.5
problem.b.family = constant
problem.G.family = even_polynomial
problem.G.coeffs = 0.0, 1.0
mesh = 512
""",
    ),
    Preset(
        name="powerabs_not_log_convex",
        regime="a = b = (|x| + 1)^2: not log-convex, the rearrangement bound is not binding",
        text="""\
task = rearrange
problem.L = 2.0
problem.m = 1.0
problem.a.family = power_abs
problem.a.beta = 2.0
problem.a.delta = 1.0
problem.b.family = power_abs
problem.b.beta = 2.0
problem.b.delta = 1.0
problem.G.family = quartic
rearrange.init = odd_tanh
mesh = 512
""",
    ),
]


def preset_catalog() -> list[Preset]:
    return list(_PRESETS)


def get_preset(name: str) -> Preset:
    for preset in _PRESETS:
        if preset.name == name:
            return preset
    raise KeyError(f"Unknown preset '{name}'. Available: {', '.join(p.name for p in _PRESETS)}")

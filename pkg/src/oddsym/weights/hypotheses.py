"""Sampled checks of the structural hypotheses on a, b and G.

Every check reports a signed margin, the infimum of the tested quantity over
the sample grid, and holds when the margin is at least ``-tolerance``.
"""

import logging
from dataclasses import asdict, dataclass
from enum import Enum

import numpy as np

from ..exceptions import InsufficientSmoothnessError
from .base import WeightFn
from .problem import Problem, symmetric_mesh

logger = logging.getLogger(__name__)

EXACT_TOLERANCE = 1e-10
FINITE_DIFFERENCE_TOLERANCE = 1e-6
POTENTIAL_SAMPLES = 4097


class Verdict(str, Enum):
    CERTIFIED = "certified"
    NOT_CERTIFIED = "not_certified"
    NOT_APPLICABLE = "not_applicable"

    @classmethod
    def of(cls, applicable: bool, holds: bool) -> "Verdict":
        if not applicable:
            return cls.NOT_APPLICABLE
        return cls.CERTIFIED if holds else cls.NOT_CERTIFIED


@dataclass(frozen=True)
class Check:
    holds: bool
    margin: float


@dataclass(frozen=True)
class HypothesisReport:
    """Verdicts and margins for every hypothesis on (a, b, G)."""

    m: float
    M: float
    even_a: Check
    even_b: Check
    even_G: Check
    log_convex_a: Check
    sqrt_convex: Check
    berestycki_niren: Check
    ab_increasing: Check
    muffin_x0: float | None
    double_bis: Check
    G_above_Gm: Check
    G_above_G_at_m: Check
    G_below_G0: Check
    Gprime_nonpos_on_0m: Check
    convex_G: Check
    a_priori_bound: Check
    f_concave_0m: Check
    tolerance: float
    finite_differences: bool

    @property
    def even(self) -> bool:
        return self.even_a.holds and self.even_b.holds and self.even_G.holds

    def theorem_verdicts(self) -> dict[str, Verdict]:
        """Which uniqueness, oddness and monotonicity results apply to this instance."""
        positive = self.m > 0
        muffin = self.muffin_x0 is not None
        return {
            "unique_odd_increasing": Verdict.of(
                positive and self.even,
                self.ab_increasing.holds and self.G_above_G_at_m.holds and self.Gprime_nonpos_on_0m.holds,
            ),
            "unique_critical_point": Verdict.of(
                positive, self.G_above_G_at_m.holds and self.berestycki_niren.holds
            ),
            "increasing_solutions_i": Verdict.of(positive, muffin and self.G_above_G_at_m.holds),
            "increasing_solutions_ii": Verdict.of(
                positive, muffin and self.double_bis.holds and self.M <= self.m
            ),
            "increasing_critical_points_odd": Verdict.of(
                positive and self.even, self.berestycki_niren.holds
            ),
            "convex_energy_unique": Verdict.of(self.even_a.holds, self.convex_G.holds),
            "odd_rearrangement_decreases": Verdict.of(positive and self.even, self.sqrt_convex.holds),
            "a_priori_bound": Verdict.of(positive, self.a_priori_bound.holds),
        }

    def to_dict(self) -> dict[str, object]:
        return asdict(self)


def _check(margin: float, tolerance: float) -> Check:
    margin = float(margin)
    return Check(holds=bool(margin >= -tolerance), margin=margin)


def _weight_derivatives(w: WeightFn, x: np.ndarray, step: float | None):
    if step is None:
        return w.eval(x), w.d1(x), w.d2(x)
    plus, mid, minus = w.eval(x + step), w.eval(x), w.eval(x - step)
    return mid, (plus - minus) / (2 * step), (plus - 2 * mid + minus) / step**2


def _muffin_split(x: np.ndarray, slope: np.ndarray, tolerance: float) -> float | None:
    """Smallest x0 with slope <= 0 on [-L, x0] and slope >= 0 on [x0, L]."""
    prefix_ok = np.maximum.accumulate(slope) <= tolerance
    suffix_ok = np.minimum.accumulate(slope[::-1])[::-1] >= -tolerance
    admissible = np.flatnonzero(prefix_ok & suffix_ok)
    if admissible.size == 0:
        return None
    return float(x[admissible[0]])


def _inf_on(values: np.ndarray, mask: np.ndarray) -> float:
    return float(np.min(values[mask])) if np.any(mask) else 0.0


def check_hypotheses(
    p: Problem, grid_points: int = 2049, allow_finite_differences: bool = True
) -> HypothesisReport:
    """Evaluate every hypothesis on a uniform sample grid of [-L, L].

    Weights without exact second derivatives fall back to centered finite
    differences with step 2L / (8 grid_points) on the slightly shrunk grid
    [-L + step, L - step], with the verdict tolerance widened to 1e-6.

    Raises:
        ValueError: If grid_points < 101.
        InsufficientSmoothnessError: If a weight lacks exact second
            derivatives and ``allow_finite_differences`` is False.
    """
    if grid_points < 101:
        raise ValueError(f"grid_points must be at least 101, got {grid_points}")

    exact = p.a.exact_second_derivative and p.b.exact_second_derivative
    if not exact and not allow_finite_differences:
        family = p.a.family if not p.a.exact_second_derivative else p.b.family
        raise InsufficientSmoothnessError("log_convex_a", family)

    L = p.L
    x = symmetric_mesh(L, grid_points - 1)
    step = None
    tolerance = EXACT_TOLERANCE
    if not exact:
        step = 2 * L / (8 * grid_points)
        x = symmetric_mesh(L - step, grid_points - 1)
        tolerance = FINITE_DIFFERENCE_TOLERANCE
        logger.info("Weights without exact second derivatives: using finite differences (h=%.3e)", step)

    a, a1, a2 = _weight_derivatives(p.a, x, step)
    b, b1, b2 = _weight_derivatives(p.b, x, step)

    even_a = -np.max(np.abs(a - a[::-1]) / np.abs(a))
    even_b = -np.max(np.abs(b - b[::-1]) / np.abs(b))

    log_convex = (a2 * a - a1**2) / a**2

    P = a * b
    P1 = a1 * b + a * b1
    P2 = a2 * b + 2 * a1 * b1 + a * b2
    root = np.sqrt(P)
    root1 = P1 / (2 * root)
    root2 = P2 / (2 * root) - P1**2 / (4 * P * root)
    # q = (sqrt(ab))'/b
    q1 = root2 / b - root1 * b1 / b**2

    slope_scale = max(1.0, float(np.max(np.abs(P1))))
    muffin_x0 = _muffin_split(x, P1, tolerance * slope_scale)

    G = p.G
    M, m = p.M, p.m
    R = 3 * max(M, m)
    s = symmetric_mesh(R, POTENTIAL_SAMPLES - 1)
    g, g1, g2, g3 = G.eval(s), G.d1(s), G.d2(s), G.d3(s)
    even_G = -np.max(np.abs(g - g[::-1]) / np.maximum(1.0, np.abs(g)))
    G_M = G.well_value
    G_m = float(G.eval(np.float64(m)))
    G_0 = float(G.eval(np.float64(0.0)))

    inner = (s > 0) & (s <= m)
    well = np.abs(s) <= M
    double_bis = min(
        _inf_on(g - G_M, well),
        _inf_on(-g1, s <= -M),
        _inf_on(g1, s >= M),
    )

    report = HypothesisReport(
        m=float(m),
        M=float(M),
        even_a=_check(even_a, tolerance),
        even_b=_check(even_b, tolerance),
        even_G=_check(even_G, EXACT_TOLERANCE),
        log_convex_a=_check(np.min(log_convex), tolerance),
        sqrt_convex=_check(np.min(q1 / b), tolerance),
        berestycki_niren=_check(np.min(q1), tolerance),
        ab_increasing=_check(_inf_on(P1, x > 0), tolerance),
        muffin_x0=muffin_x0,
        double_bis=_check(double_bis, EXACT_TOLERANCE),
        G_above_Gm=_check(np.min(g - G_M), EXACT_TOLERANCE),
        G_above_G_at_m=_check(np.min(g - G_m), EXACT_TOLERANCE),
        G_below_G0=_check(_inf_on(G_0 - g, (s > 0) & (s < M)), EXACT_TOLERANCE),
        Gprime_nonpos_on_0m=_check(_inf_on(-g1, inner), EXACT_TOLERANCE),
        convex_G=_check(np.min(g2), EXACT_TOLERANCE),
        a_priori_bound=_check(_inf_on(g1, s > m), EXACT_TOLERANCE),
        f_concave_0m=_check(_inf_on(g3, inner), EXACT_TOLERANCE),
        tolerance=tolerance,
        finite_differences=not exact,
    )

    if report.berestycki_niren.holds and report.muffin_x0 is None:
        logger.warning("(sqrt(ab))'/b is nondecreasing but no split point x0 was found on the grid")
    return report

"""Shape, Hamiltonian and comparison diagnostics for computed solutions."""

import logging
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as P

from ..exceptions import CertificateContradiction
from ..grid import GridFunction
from ..weights import Problem
from .fem import Discretization

logger = logging.getLogger(__name__)

ZERO_TOLERANCE = 1e-10
ODD_TOLERANCE = 1e-6
GAP_TOLERANCE = 1e-6
ORDER_TOLERANCE = 1e-8


@dataclass(frozen=True)
class ShapeDiagnostics:
    is_increasing: bool
    zero_count: int
    zero_location: float | None
    oddness_defect: float
    derivative_at_zero: float
    u0: float
    max_abs: float

    @property
    def is_odd(self) -> bool:
        return self.oddness_defect <= ODD_TOLERANCE


@dataclass(frozen=True)
class HamiltonianSample:
    x: float
    value: float
    drift: float


@dataclass(frozen=True)
class HamiltonianTrace:
    """H = 1/2 (a u')^2 - a b G(u) at element midpoints, with the drift dH/dx + (ab)' G(u)."""

    x: np.ndarray
    value: np.ndarray
    drift: np.ndarray
    h: float
    x0: float | None = None
    monotone_defect: float | None = None

    @property
    def max_drift(self) -> float:
        return float(np.max(np.abs(self.drift)))

    @property
    def unimodal(self) -> bool | None:
        """Nondecreasing before x0 and nonincreasing after it, up to 10 h."""
        if self.monotone_defect is None:
            return None
        return self.monotone_defect <= 10 * self.h

    def samples(self) -> list[HamiltonianSample]:
        return [HamiltonianSample(float(x), float(v), float(d)) for x, v, d in zip(self.x, self.value, self.drift)]


def _zeros(x: np.ndarray, u: np.ndarray, tolerance: float) -> list[float]:
    """Zeros of the piecewise-linear interpolant; a run of near-zero nodes counts once."""
    sign = np.where(np.abs(u) <= tolerance, 0, np.sign(u)).astype(int)
    zeros = []
    i = 0
    n = len(u)
    while i < n:
        if sign[i] == 0:
            j = i
            while j + 1 < n and sign[j + 1] == 0:
                j += 1
            zeros.append(float(0.5 * (x[i] + x[j])))
            i = j + 1
            continue
        if i + 1 < n and sign[i + 1] != 0 and sign[i + 1] != sign[i]:
            zeros.append(float(x[i] - u[i] * (x[i + 1] - x[i]) / (u[i + 1] - u[i])))
        i += 1
    return zeros


def _derivative_at_zero(x: np.ndarray, u: np.ndarray, points: int = 7) -> float:
    """Slope at x = 0 from a least-squares cubic through the nearest nodes."""
    nearest = np.sort(np.argsort(np.abs(x))[:points])
    coefficients = P.polyfit(x[nearest], u[nearest], 3)
    return float(coefficients[1])


def grid_shape_diagnostics(u: GridFunction) -> ShapeDiagnostics:
    x, values = u.x, u.values
    m = abs(u.m)
    scale = max(m, np.finfo(float).tiny)
    zeros = _zeros(x, values, ZERO_TOLERANCE * scale)
    return ShapeDiagnostics(
        is_increasing=bool(np.all(np.diff(values) > -ZERO_TOLERANCE * scale)),
        zero_count=len(zeros),
        zero_location=zeros[0] if zeros else None,
        oddness_defect=float(np.max(np.abs(values + values[::-1]))),
        derivative_at_zero=_derivative_at_zero(x, values),
        u0=float(u(np.float64(0.0))),
        max_abs=float(np.max(np.abs(values))),
    )


def shape_diagnostics(sol) -> ShapeDiagnostics:
    """Monotonicity, zeros, oddness defect and u'(0) of a computed solution."""
    return grid_shape_diagnostics(sol.u)


def hamiltonian_trace(p: Problem, sol, x0: float | None = None) -> HamiltonianTrace:
    """Sample the Hamiltonian at element midpoints and its drift from dH/dx = -(ab)' G(u).

    With ``x0`` given and G(u) >= 0 along the solution, also measures how far
    the trace is from nondecreasing on (-L, x0) and nonincreasing on (x0, L).
    """
    u = sol.u
    mid = 0.5 * (u.x[:-1] + u.x[1:])
    slope = u.slopes()
    u_mid = 0.5 * (u.values[:-1] + u.values[1:])
    a, b = p.a.eval(mid), p.b.eval(mid)
    g = p.G.eval(u_mid)
    value = 0.5 * (a * slope) ** 2 - a * b * g
    ab_prime = p.a.d1(mid) * b + a * p.b.d1(mid)
    drift = np.gradient(value, mid) + ab_prime * g

    defect = None
    if x0 is not None:
        if np.min(p.G.eval(u.values)) >= 0:
            step = np.diff(value)
            centers = 0.5 * (mid[:-1] + mid[1:])
            left = centers < x0
            rising_left = np.max(-step[left], initial=0.0)
            falling_right = np.max(step[~left], initial=0.0)
            defect = float(max(rising_left, falling_right, 0.0))
            if defect > 10 * u.h:
                logger.warning("Hamiltonian trace is not unimodal about x0=%g (defect %.3e)", x0, defect)
        else:
            logger.info("G(u) changes sign along the solution; skipping the unimodality check")

    return HamiltonianTrace(x=mid, value=value, drift=drift, h=u.h, x0=x0, monotone_defect=defect)


@dataclass(frozen=True)
class DerivativeGap:
    min_gap: float
    x_at_min: float
    binding: bool
    reason: str | None


def derivative_comparison(sol, p: Problem | None = None) -> DerivativeGap:
    """min over (0, L] of u*'(x) - u'(x), where u*'(x) = u'(-x).

    The gap is asserted nonnegative (to 1e-6) only when a = b, u is a local
    minimizer, u is increasing with u(0) > 0 and f = -G' is concave on
    (0, m); otherwise it is informational.

    Raises:
        CertificateContradiction: If the hypotheses hold and the gap is negative.
    """
    u = sol.u
    du = u.nodal_derivative()
    gap = du[::-1] - du
    right = u.x > 0
    i = int(np.argmin(gap[right]))
    min_gap = float(gap[right][i])
    x_at = float(u.x[right][i])

    shape = grid_shape_diagnostics(u)
    reasons = []
    if p is None:
        reasons.append("weights not checked")
    elif p.a != p.b:
        reasons.append("a and b differ")
    if sol.local_min_check is False:
        reasons.append("solution failed the local-minimality check")
    if not shape.is_increasing:
        reasons.append("solution is not increasing")
    if not shape.u0 > 0:
        reasons.append("u(0) is not positive")
    if p is None:
        reasons.append("concavity of f on (0, m) not checked")
    else:
        s = np.linspace(0.0, u.m, 1025)[1:]
        if s.size and np.min(p.G.d3(s)) < 0:
            reasons.append("f is not concave on (0, m)")

    binding = not reasons
    if binding and min_gap < -GAP_TOLERANCE:
        raise CertificateContradiction(f"u*' - u' = {min_gap:.3e} < 0 at x={x_at:g} although the hypotheses hold")
    return DerivativeGap(min_gap=min_gap, x_at_min=x_at, binding=binding, reason="; ".join(reasons) or None)


@dataclass(frozen=True)
class OrderingCheck:
    energy_1: float
    energy_2: float
    energy_min: float
    energy_max: float
    cut_ok: bool
    ordered: bool


def ordering_check(p: Problem, u1: GridFunction, u2: GridFunction) -> OrderingCheck:
    """Cutting-argument check on two solutions with the same boundary data.

    min(u1, u2) must not do better than the better of the two, and u1 - u2
    must not change sign strictly.
    """
    if u1.n != u2.n:
        raise ValueError(f"Grid functions on different meshes: {u1.n} vs {u2.n} elements")
    disc = Discretization(p, u1.n)
    e1, e2 = disc.energy(u1.values), disc.energy(u2.values)
    low = np.minimum(u1.values, u2.values)
    high = np.maximum(u1.values, u2.values)
    e_low, e_high = disc.energy(low), disc.energy(high)
    difference = u1.values - u2.values
    ordered = not (np.any(difference > ORDER_TOLERANCE) and np.any(difference < -ORDER_TOLERANCE))
    return OrderingCheck(
        energy_1=e1,
        energy_2=e2,
        energy_min=e_low,
        energy_max=e_high,
        cut_ok=e_low >= min(e1, e2) - 1e-8,
        ordered=bool(ordered),
    )

"""Closed-form energy bounds and symmetry-breaking criteria.

All formulas use the potential shifted so that its well value is zero,
G~ = G - G(M). Energies compared against these bounds must be shifted the
same way, by G(M) int_{-L}^{L} b.
"""

import logging
from dataclasses import dataclass

import numpy as np
import polars as pl
from scipy.optimize import minimize_scalar
from tqdm import tqdm

from .exceptions import ConvergenceError, PreconditionError
from .grid import GridFunction
from .quadrature import PrefixIntegral, element_points, integrate_panels
from .solve1d import DEFAULT_PRESETS, minimize
from .weights import Potential, Problem, WeightFn

logger = logging.getLogger(__name__)

POTENTIAL_SAMPLES = 4097
UPPER_T_POINTS = 1025
LOWER_T_POINTS = 2049
OVERFLOW_CAP = 1e150
SCAN_STEP = 0.05
SCAN_EPSILONS = (1.0, 0.1, 0.01)


def _shifted(G: Potential):
    well = G.well_value
    return lambda s: G.eval(np.asarray(s, dtype=float)) - well


def _refine(fn, grid: np.ndarray, i: int) -> tuple[float, float]:
    """Bounded scalar minimization of fn on the grid cell pair around index i."""
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    best_x, best = float(grid[i]), float(fn(grid[i]))
    if hi > lo:
        result = minimize_scalar(fn, bounds=(lo, hi), method="bounded", options={"xatol": 1e-12 * max(1.0, abs(hi))})
        if result.fun < best:
            best_x, best = float(result.x), float(result.fun)
    return best_x, best


def potential_sup(G: Potential, lo: float, hi: float) -> float:
    """sup of G - G(M) over [lo, hi], by dense sampling plus local refinement."""
    g = _shifted(G)
    s = np.linspace(lo, hi, POTENTIAL_SAMPLES)
    i = int(np.argmax(g(s)))
    _, value = _refine(lambda t: -float(g(t)), s, i)
    return -value


def potential_inf(G: Potential, lo: float, hi: float) -> float:
    """inf of G - G(M) over [lo, hi]."""
    g = _shifted(G)
    s = np.linspace(lo, hi, POTENTIAL_SAMPLES)
    i = int(np.argmin(g(s)))
    _, value = _refine(lambda t: float(g(t)), s, i)
    return value


def bound_constants(p: Problem) -> dict[str, float]:
    """G1 = sup over [-m, max(m, M)], m0 = min(m, M) / 2 and G0 = inf over [0, m0] of G - G(M)."""
    M_bar = max(p.m, p.M)
    m0 = 0.5 * min(p.m, p.M)
    return {
        "G1": potential_sup(p.G, -p.m, M_bar),
        "G0": potential_inf(p.G, 0.0, m0) if m0 > 0 else float("nan"),
        "m0": m0,
        "M_bar": M_bar,
    }


def upper_bound_phi(p: Problem, t: float, G1: float | None = None) -> float:
    """(M^2 + m^2) / int_t^L 1/a + 2 G1 int_t^L b, an upper bound on the minimal energy.

    Raises:
        ValueError: If t is outside [0, L).
    """
    if not 0.0 <= t < p.L:
        raise ValueError(f"t must lie in [0, L) = [0, {p.L}), got {t}")
    if G1 is None:
        G1 = bound_constants(p)["G1"]
    return float((p.M**2 + p.m**2) / p.inv_a.between(t, p.L) + 2 * G1 * p.B.between(t, p.L))


def upper_bound_curve(p: Problem, points: int = UPPER_T_POINTS) -> tuple[np.ndarray, np.ndarray]:
    """The upper bound on a uniform grid of [0, L)."""
    G1 = bound_constants(p)["G1"]
    t = np.linspace(0.0, p.L, points + 1)[:-1]
    values = (p.M**2 + p.m**2) / (p.inv_a(p.L) - p.inv_a(t)) + 2 * G1 * (p.B(p.L) - p.B(t))
    return t, values


def _scan_limit(a: WeightFn, b: WeightFn, T: float) -> float:
    """Largest T' <= T before a, b or 1/a exceeds the overflow cap."""
    T = min(T, a.domain_halfwidth, b.domain_halfwidth)
    x = np.linspace(0.0, T, POTENTIAL_SAMPLES)
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        wa, wb = a.eval(x), b.eval(x)
        ok = np.isfinite(wa) & np.isfinite(wb) & (wa < OVERFLOW_CAP) & (wb < OVERFLOW_CAP) & (1.0 / wa < OVERFLOW_CAP)
    bad = np.flatnonzero(~ok)
    if bad.size == 0:
        return T
    if bad[0] == 0:
        raise PreconditionError("Weights overflow at x = 0")
    return float(x[bad[0] - 1])


@dataclass(frozen=True)
class AntisymmetricBound:
    """Lower bound for the energy of odd competitors: inf over t of psi(t)."""

    value: float
    t_star: float
    m0: float
    G0: float
    t: np.ndarray
    psi: np.ndarray

    def table(self) -> pl.DataFrame:
        return pl.DataFrame({"t": self.t, "psi": self.psi})


def antisymmetric_lower_bound(p: Problem) -> AntisymmetricBound:
    """C_as = inf over t > 0 of m0^2 / int_0^t 1/a + 2 G0 int_0^t b.

    The search runs over a log-spaced grid of (0, T], T = 10 L (capped by the
    weight domain and overflow), then refines the best cell.

    Raises:
        PreconditionError: If m = 0, or G is not strictly above G(M) on [0, M).
    """
    if not p.m > 0:
        raise PreconditionError("Antisymmetric lower bound needs m > 0")
    constants = bound_constants(p)
    m0, G0 = constants["m0"], constants["G0"]
    if not G0 > 0:
        raise PreconditionError(
            f"potential is not strictly above its well value on [0, M): inf of G - G(M) over [0, {m0}] is {G0:.3e}"
        )
    T = _scan_limit(p.a, p.b, 10 * p.L)
    A = PrefixIntegral(p.a.reciprocal, 0.0, T, rtol=1e-8, max_panels=2**20)
    B = PrefixIntegral(p.b.eval, 0.0, T, rtol=1e-8, max_panels=2**20)

    def psi(t):
        return m0**2 / A(t) + 2 * G0 * B(t)

    t = np.geomspace(T * 1e-6, T, LOWER_T_POINTS)
    values = psi(t)
    i = int(np.argmin(values))
    t_star, value = _refine(lambda s: float(psi(s)), t, i)
    return AntisymmetricBound(value=value, t_star=t_star, m0=m0, G0=G0, t=t, psi=values)


@dataclass(frozen=True)
class SymmetryBreaking:
    lhs: float
    t_star: float
    threshold: float
    certified: bool
    upper_min: float
    C_as: float | None
    antisymmetric_excluded: bool | None


def symmetry_breaking_criterion(p: Problem) -> SymmetryBreaking:
    """sup_t (int_t^L 1/a)(int_0^t b) against M^2 / (2 G~(0)).

    Also compares the smallest upper bound with C_as: when it is lower, no
    minimizer can be odd.

    Raises:
        PreconditionError: If G(0) <= G(M), or G exceeds G(0) somewhere on (0, M).
    """
    g = _shifted(p.G)
    g0 = float(g(0.0))
    if not g0 > 0:
        raise PreconditionError(f"Symmetry-breaking criterion needs G(0) > G(M); G(0) - G(M) = {g0:.3e}")
    s = np.linspace(0.0, p.M, POTENTIAL_SAMPLES)
    if np.max(g(s)) > g0 * (1 + 1e-12):
        raise PreconditionError("Symmetry-breaking criterion needs G <= G(0) on (0, M)")

    def product(t):
        return p.inv_a.between(t, p.L) * p.B(t)

    t = np.linspace(0.0, p.L, UPPER_T_POINTS)
    values = product(t)
    i = int(np.argmax(values))
    t_star, neg = _refine(lambda x: -float(product(x)), t, i)
    lhs = -neg
    threshold = p.M**2 / (2 * g0)

    _, upper = upper_bound_curve(p)
    upper_min = float(np.min(upper))
    try:
        C_as = antisymmetric_lower_bound(p).value
    except PreconditionError as error:
        logger.info("No antisymmetric lower bound: %s", error)
        C_as = None
    return SymmetryBreaking(
        lhs=lhs,
        t_star=t_star,
        threshold=threshold,
        certified=lhs > threshold,
        upper_min=upper_min,
        C_as=C_as,
        antisymmetric_excluded=None if C_as is None else upper_min < C_as,
    )


@dataclass(frozen=True)
class BoundReport:
    G1: float
    G0: float
    m0: float
    M_bar: float
    upper_t: np.ndarray
    upper_values: np.ndarray
    upper_min: float
    upper_argmin: float
    C_as: float | None
    C_as_t: float | None
    symmetry_breaking_certified: bool | None

    def upper_table(self) -> pl.DataFrame:
        return pl.DataFrame({"t": self.upper_t, "upper_bound": self.upper_values})

    def summary(self) -> dict[str, object]:
        return {
            "G1": self.G1,
            "G0": self.G0,
            "m0": self.m0,
            "M_bar": self.M_bar,
            "upper_min": self.upper_min,
            "upper_argmin": self.upper_argmin,
            "C_as": self.C_as,
            "C_as_t": self.C_as_t,
            "symmetry_breaking_certified": self.symmetry_breaking_certified,
        }


def bound_report(p: Problem) -> BoundReport:
    constants = bound_constants(p)
    t, values = upper_bound_curve(p)
    i = int(np.argmin(values))
    try:
        lower = antisymmetric_lower_bound(p)
    except PreconditionError as error:
        logger.info("Antisymmetric lower bound unavailable: %s", error)
        lower = None
    return BoundReport(
        G1=constants["G1"],
        G0=constants["G0"],
        m0=constants["m0"],
        M_bar=constants["M_bar"],
        upper_t=t,
        upper_values=values,
        upper_min=float(values[i]),
        upper_argmin=float(t[i]),
        C_as=None if lower is None else lower.value,
        C_as_t=None if lower is None else lower.t_star,
        symmetry_breaking_certified=None if lower is None else bool(values[i] < lower.value),
    )


@dataclass(frozen=True)
class LinearMinimum:
    value: float
    integral: float
    minimizer: GridFunction


def linear_energy_min(
    a: WeightFn, interval: tuple[float, float], m1: float, m2: float, mesh: np.ndarray | None = None
) -> LinearMinimum:
    """min of int a (v')^2 over v(alpha) = m1, v(beta) = m2.

    The value is (m2 - m1)^2 / int 1/a, attained by
    v(x) = m1 + (m2 - m1) int_alpha^x 1/a / int_alpha^beta 1/a.

    Raises:
        ValueError: If alpha >= beta.
    """
    alpha, beta = interval
    if not alpha < beta:
        raise ValueError(f"Interval must satisfy alpha < beta, got ({alpha}, {beta})")
    A = PrefixIntegral(a.reciprocal, alpha, beta, origin=alpha)
    total = A.total
    x = np.linspace(alpha, beta, 1025) if mesh is None else np.asarray(mesh, dtype=float)
    values = m1 + (m2 - m1) * A(x) / total
    values[0], values[-1] = m1, m2
    return LinearMinimum(value=(m2 - m1) ** 2 / total, integral=total, minimizer=GridFunction(x, values))


def discrete_linear_energy_min(a: WeightFn, interval: tuple[float, float], m1: float, m2: float, n: int = 4096) -> float:
    """Exact minimum of the P1 discretization of int a (v')^2 on n elements.

    Each element contributes k_e (dv)^2 with k_e = int_e a / h_e^2; the
    minimizer spreads the jump in proportion to 1 / k_e.
    """
    alpha, beta = interval
    x = np.linspace(alpha, beta, n + 1)
    points, weights = element_points(x[:-1], x[1:], order=4)
    k = np.sum(weights * a.eval(points), axis=1) / np.diff(x) ** 2
    return float((m2 - m1) ** 2 / np.sum(1.0 / k))


@dataclass(frozen=True)
class IntervalScan:
    """Windows [x, x + w] with their weight integrals, and the growth verdict."""

    windows: pl.DataFrame
    frontier: pl.DataFrame
    best: dict[float, list[float]]
    horizons: list[float]
    trend: bool


def interval_sequence_scan(
    a: WeightFn, b: WeightFn, horizon: float = 400.0, window_grid: np.ndarray | None = None
) -> IntervalScan:
    """Look for windows with int 1/a large and int b small.

    ``best[eps]`` lists, for horizons H/4, H/2 and H, the largest int 1/a over
    windows inside [0, horizon'] with int b <= eps. The trend holds when it
    keeps growing for every eps in (1, 0.1, 0.01).

    Raises:
        PreconditionError: If a weight is not defined on the whole line.
    """
    for name, w in (("a", a), ("b", b)):
        if not w.extendable:
            raise PreconditionError(f"Weight {name} ('{w.family}') is not defined beyond its sample nodes")
    if window_grid is None:
        window_grid = np.geomspace(0.5, horizon, 24)
    steps = int(round(2 * horizon / SCAN_STEP))
    edges = np.linspace(0.0, 2 * horizon, steps + 1)
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        inv_a = np.concatenate([[0.0], np.cumsum(integrate_panels(a.reciprocal, edges[:-1], edges[1:], order=4))])
        int_b = np.concatenate([[0.0], np.cumsum(integrate_panels(b.eval, edges[:-1], edges[1:], order=4))])
    inv_a = np.where(np.isnan(inv_a), np.inf, inv_a)
    int_b = np.where(np.isnan(int_b), np.inf, int_b)

    widths = np.unique(np.clip(np.round(np.asarray(window_grid) / SCAN_STEP).astype(int), 1, steps // 2))
    starts = np.arange(0, steps // 2 + 1)
    i, j = np.meshgrid(starts, widths, indexing="ij")
    with np.errstate(invalid="ignore"):
        window_inv = inv_a[i + j] - inv_a[i]
        window_b = int_b[i + j] - int_b[i]
    window_b = np.where(np.isnan(window_b), np.inf, window_b)
    window_inv = np.where(np.isnan(window_inv), -np.inf, window_inv)
    x_start = edges[i].ravel()
    width = (j * SCAN_STEP).ravel()
    window_inv, window_b = window_inv.ravel(), window_b.ravel()

    windows = pl.DataFrame({"x": x_start, "w": width, "int_inv_a": window_inv, "int_b": window_b})

    finite = np.isfinite(window_b) & np.isfinite(window_inv)
    order = np.lexsort((-window_inv[finite], window_b[finite]))
    idx = np.flatnonzero(finite)[order]
    keep = []
    running = -np.inf
    for k in idx:
        if window_inv[k] > running:
            keep.append(k)
            running = window_inv[k]
    frontier = pl.DataFrame(
        {"x": x_start[keep], "w": width[keep], "int_inv_a": window_inv[keep], "int_b": window_b[keep]},
        schema={"x": pl.Float64, "w": pl.Float64, "int_inv_a": pl.Float64, "int_b": pl.Float64},
    )

    horizons = [horizon / 4, horizon / 2, horizon]
    best = {}
    for eps in SCAN_EPSILONS:
        row = []
        for h in horizons:
            inside = finite & (x_start + width <= h + 1e-9) & (window_b <= eps)
            row.append(float(np.max(window_inv[inside])) if np.any(inside) else 0.0)
        best[eps] = row
    trend = all(row[0] < row[1] * (1 - 1e-3) and row[1] < row[2] * (1 - 1e-3) for row in best.values())
    return IntervalScan(windows=windows, frontier=frontier, best=best, horizons=horizons, trend=trend)


@dataclass(frozen=True)
class PhiMonotone:
    L: list[float]
    energies: list[float]
    nonincreasing: bool


def phi_monotone_check(p: Problem, L_list, presets=DEFAULT_PRESETS, points_per_unit: int = 64) -> PhiMonotone:
    """Minimal energy at each half-width in L_list; it must not increase with L.

    The mesh has about 64 elements per unit length; each value is the best
    over the presets that converge.

    Raises:
        ValueError: If L_list is not strictly increasing.
        ConvergenceError: If no preset converges at some L.
    """
    L_list = [float(L) for L in L_list]
    if any(b <= a for a, b in zip(L_list, L_list[1:])):
        raise ValueError(f"L_list must be strictly increasing, got {L_list}")
    energies = []
    for L in tqdm(L_list, desc="Minimal energy", unit="L"):
        q = p.replace(L=L)
        n = max(64, 2 * int(round(points_per_unit * L / 2)))
        best = None
        for preset in presets:
            try:
                e = minimize(q, preset, n=n).energy
            except ConvergenceError as error:
                logger.warning("L=%g, preset '%s' did not converge: %s", L, preset, error)
                continue
            best = e if best is None else min(best, e)
        if best is None:
            raise ConvergenceError(f"No preset converged at L={L}")
        energies.append(best)
    nonincreasing = all(b <= a + 1e-6 for a, b in zip(energies, energies[1:]))
    return PhiMonotone(L=L_list, energies=energies, nonincreasing=nonincreasing)


@dataclass(frozen=True)
class ZeroStateReport:
    zero_energy: float
    upper_min: float
    upper_argmin: float
    unstable: bool


def zero_state_instability(p: Problem) -> ZeroStateReport:
    """For m = 0, compare the shifted energy 2 G~(0) int_0^L b of u = 0 with the smallest upper bound.

    Raises:
        PreconditionError: If m != 0.
    """
    if p.m != 0:
        raise PreconditionError(f"Zero-state check needs m = 0, got m={p.m}")
    g0 = float(_shifted(p.G)(0.0))
    zero_energy = 2 * g0 * p.B(p.L)
    t, values = upper_bound_curve(p)
    i = int(np.argmin(values))
    return ZeroStateReport(
        zero_energy=float(zero_energy),
        upper_min=float(values[i]),
        upper_argmin=float(t[i]),
        unstable=bool(values[i] < zero_energy),
    )

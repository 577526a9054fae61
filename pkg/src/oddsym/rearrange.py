"""Continuous odd rearrangement of increasing functions.

An increasing v on [-L, L] with v(-L) = -m, v(L) = m is described by its
inverse rho on [-m, m]. The flipped function v*(x) = -v(-x) has inverse
rho*(lambda) = -rho(-lambda), and the rearrangement v^t, 0 <= t <= 1, is the
increasing function whose inverse is

    rho^t = B^-1(t B(rho) + (1 - t) B(rho*)),    B(x) = int_0^x b,

so v^1 = v, v^0 = v* and v^(1/2) is odd. All energies along t are evaluated
in lambda-space on a uniform grid of K samples.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
import polars as pl

from .exceptions import FlatRegionError
from .grid import GridFunction
from .quadrature import PrefixIntegral, element_points
from .weights import Constant, Potential, Problem, WeightFn, check_hypotheses

logger = logging.getLogger(__name__)

LAMBDA_SAMPLES = 2049
T_SAMPLES = 101
FLAT_SLOPE_FACTOR = 1e-8
EQUALITY_RTOL = 1e-6


@dataclass(frozen=True, eq=False)
class MonotoneGrid:
    """A strictly increasing piecewise-linear function with v(-L) = -m, v(L) = m."""

    nodes: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        nodes = np.array(self.nodes, dtype=float)
        values = np.array(self.values, dtype=float)
        if nodes.ndim != 1 or nodes.shape != values.shape or nodes.size < 2:
            raise ValueError("MonotoneGrid needs matching 1-D node and value arrays")
        if np.any(np.diff(nodes) <= 0):
            raise ValueError("MonotoneGrid nodes must be strictly increasing")
        if np.any(np.diff(values) <= 0):
            raise ValueError("MonotoneGrid values must be strictly increasing")
        if nodes[0] != -nodes[-1] or values[0] != -values[-1]:
            raise ValueError(
                f"MonotoneGrid must span [-L, L] with v(-L) = -v(L); got nodes "
                f"[{nodes[0]}, {nodes[-1]}], values [{values[0]}, {values[-1]}]"
            )
        nodes.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_grid_function(cls, u: GridFunction) -> "MonotoneGrid":
        return cls(u.x, u.values)

    @property
    def L(self) -> float:
        return float(self.nodes[-1])

    @property
    def m(self) -> float:
        return float(self.values[-1])

    @property
    def min_slope(self) -> float:
        """Least divided difference."""
        return float(np.min(np.diff(self.values) / np.diff(self.nodes)))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return np.interp(x.ravel(), self.nodes, self.values).reshape(x.shape)

    def inverse(self, lam):
        """rho(lambda), the exact inverse of the piecewise-linear interpolant."""
        lam = np.asarray(lam, dtype=float)
        return np.interp(lam.ravel(), self.values, self.nodes).reshape(lam.shape)

    def oddness_defect(self) -> float:
        """max |v(x) + v(-x)| over the nodes and their reflections."""
        x = np.union1d(self.nodes, -self.nodes)
        return float(np.max(np.abs(self(x) + self(-x))))

    def kinetic_energy(self, a: WeightFn, order: int = 4) -> float:
        """int (v')^2 a dx, with the element integrals of a by Gauss quadrature."""
        points, weights = element_points(self.nodes[:-1], self.nodes[1:], order)
        slope = np.diff(self.values) / np.diff(self.nodes)
        return float(np.sum(slope**2 * np.sum(weights * a.eval(points), axis=1)))


def flipped(v: MonotoneGrid) -> MonotoneGrid:
    """v*(x) = -v(-x) on the reflected node set."""
    return MonotoneGrid(-v.nodes[::-1], -v.values[::-1])


@dataclass(eq=False)
class RearrangementFamily:
    """The family v^t of continuous odd rearrangements of v with respect to b."""

    base: MonotoneGrid
    b: WeightFn
    lam: np.ndarray
    rho: np.ndarray
    rho_star: np.ndarray
    B: PrefixIntegral | None
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def L(self) -> float:
        return self.base.L

    @property
    def m(self) -> float:
        return self.base.m

    @property
    def step(self) -> float:
        return float(self.lam[1] - self.lam[0])

    def _B(self, x: np.ndarray) -> np.ndarray:
        if self.B is None:
            return self.b.value * x
        return self.B(x)

    def _B_inverse(self, y: np.ndarray) -> np.ndarray:
        if self.B is None:
            return y / self.b.value
        return self.B.inverse(y)

    def _chart(self) -> tuple[np.ndarray, np.ndarray]:
        if "chart" not in self._cache:
            self._cache["chart"] = (self._B(self.rho), self._B(self.rho_star))
        return self._cache["chart"]

    def chart_coordinate(self, t: float) -> np.ndarray:
        """B(rho^t(lambda)), which is affine in t."""
        y1, y0 = self._chart()
        return t * y1 + (1 - t) * y0

    def rho_t(self, t: float) -> np.ndarray:
        """rho^t on the lambda grid; rho^1 = rho and rho^0 = rho* exactly."""
        if not 0.0 <= t <= 1.0:
            raise ValueError(f"t must lie in [0, 1], got {t}")
        if t == 1.0:
            return self.rho.copy()
        if t == 0.0:
            return self.rho_star.copy()
        if self.B is None:
            rho = t * self.rho + (1 - t) * self.rho_star
        else:
            rho = self._B_inverse(self.chart_coordinate(t))
        rho[0], rho[-1] = -self.L, self.L
        return rho

    def v_t(self, t: float) -> MonotoneGrid:
        """v^t as a MonotoneGrid with nodes rho^t(lambda) and values lambda."""
        return MonotoneGrid(self.rho_t(t), self.lam)

    def weighted_level_measure(self, t: float) -> np.ndarray:
        """b({-lambda < v^t < lambda}) for lambda on the nonnegative half of the grid."""
        rho = self.rho_t(t)
        half = len(self.lam) // 2
        upper = self._B(rho[half:])
        lower = self._B(rho[: half + 1][::-1])
        return upper - lower

    def chart_derivative(self, t: float) -> np.ndarray:
        """Centered differences of B(rho^t) in lambda (one-sided at the ends)."""
        return np.gradient(self.chart_coordinate(t), self.step)


def build_family(v: MonotoneGrid, b: WeightFn, K: int = LAMBDA_SAMPLES) -> RearrangementFamily:
    """Sample rho, rho* and B for the rearrangement of v with respect to b.

    Raises:
        ValueError: If K < 101 or b is not positive on [-L, L].
        FlatRegionError: If v is too flat to be inverted reliably.
    """
    if K < 101:
        raise ValueError(f"K must be at least 101, got {K}")
    b.validate(v.L)
    threshold = FLAT_SLOPE_FACTOR * (2 * v.m) / (2 * v.L)
    if v.min_slope < threshold:
        raise FlatRegionError(v.min_slope, threshold)

    lam = np.linspace(-v.m, v.m, K)
    lam = 0.5 * (lam - lam[::-1])
    rho = v.inverse(lam)
    rho[0], rho[-1] = -v.L, v.L
    rho_star = -rho[::-1]

    B = None
    if not isinstance(b, Constant):
        B = PrefixIntegral(b.eval, -v.L, v.L)
    return RearrangementFamily(base=v, b=b, lam=lam, rho=rho, rho_star=rho_star, B=B)


def _trapezoid_weights(K: int, step: float) -> np.ndarray:
    w = np.full(K, step)
    w[0] = w[-1] = 0.5 * step
    return w


def potential_energy_along_t(f: RearrangementFamily, G: Potential, t: float) -> float:
    """int G(v^t) b dx, computed as the Stieltjes sum of G(lambda) against B(rho^t(lambda))."""
    y = f.chart_coordinate(t)
    g = G.eval(f.lam)
    return float(np.sum(0.5 * (g[1:] + g[:-1]) * np.diff(y)))


def kinetic_energy_along_t(f: RearrangementFamily, a: WeightFn, t: float) -> float:
    """h(t) = int (dv^t/dx)^2 a dx = int a(rho^t) / (rho^t)' dlambda.

    (rho^t)' is taken as the centered difference of B(rho^t) divided by
    b(rho^t); for constant b this is the centered difference of rho^t.

    Raises:
        RuntimeError: If (rho^t)' is not positive somewhere on the grid.
    """
    derivative = f.chart_derivative(t)
    if np.any(derivative <= 0):
        raise RuntimeError(f"rearrangement is not increasing at t={t}: (rho^t)' <= 0 on the lambda grid")
    rho = f.rho_t(t)
    integrand = a.eval(rho) * f.b.eval(rho) / derivative
    return float(np.sum(_trapezoid_weights(len(f.lam), f.step) * integrand))


@dataclass(frozen=True)
class RearrangementReport:
    """Kinetic and total energy along the rearrangement of one increasing function."""

    t: np.ndarray
    kinetic: np.ndarray
    potential: np.ndarray
    total: np.ndarray
    max_kinetic_excess: float
    min_total_second_difference: float
    kinetic_decreases: bool
    total_convex: bool
    equality_detected: bool
    oddness_defect: float
    equality_consistent: bool
    binding: bool
    reason: str | None

    def table(self) -> pl.DataFrame:
        return pl.DataFrame({"t": self.t, "kinetic": self.kinetic, "total": self.total})

    def summary(self) -> dict[str, object]:
        return {
            "max_kinetic_excess": self.max_kinetic_excess,
            "min_total_second_difference": self.min_total_second_difference,
            "kinetic_decreases": self.kinetic_decreases,
            "total_convex": self.total_convex,
            "equality_detected": self.equality_detected,
            "oddness_defect": self.oddness_defect,
            "equality_consistent": self.equality_consistent,
            "binding": self.binding,
            "reason": self.reason,
        }


def verify_odd_rearrangement(
    v: MonotoneGrid, p: Problem, t_points: int = T_SAMPLES, K: int = LAMBDA_SAMPLES
) -> RearrangementReport:
    """Check that odd rearrangement lowers the kinetic energy and that t -> E(v^t) is convex.

    The conclusions are binding only when (sqrt(ab))'/b is nondecreasing;
    otherwise the report is still computed and flagged non-binding.
    """
    if not np.isclose(v.L, p.L) or not np.isclose(v.m, p.m):
        raise ValueError(f"Function on [-{v.L}, {v.L}] with m={v.m} does not match problem L={p.L}, m={p.m}")

    hypotheses = check_hypotheses(p)
    binding = hypotheses.sqrt_convex.holds and hypotheses.even
    reason = None
    if not binding:
        failed = "a and b are not even" if not hypotheses.even else "(sqrt(ab))'/b is not nondecreasing"
        reason = f"{failed}: hypothesis not satisfied; theorem not applicable"
        logger.warning("Rearrangement report is non-binding: %s", reason)

    family = build_family(v, p.b, K)
    t = np.linspace(0.0, 1.0, t_points)
    kinetic = np.array([kinetic_energy_along_t(family, p.a, ti) for ti in t])
    potential = np.array([potential_energy_along_t(family, p.G, ti) for ti in t])
    total = 0.5 * kinetic + potential

    h1 = kinetic[-1]
    excess = float(np.max(kinetic - h1))
    second = float(np.min(total[2:] - 2 * total[1:-1] + total[:-2])) if t_points >= 3 else 0.0
    interior = kinetic[1:-1]
    equality = bool(np.any(np.abs(interior - h1) <= EQUALITY_RTOL * h1))
    defect = v.oddness_defect()

    return RearrangementReport(
        t=t,
        kinetic=kinetic,
        potential=potential,
        total=total,
        max_kinetic_excess=excess,
        min_total_second_difference=second,
        kinetic_decreases=excess <= 1e-8 * h1,
        total_convex=second >= -1e-8 * h1,
        equality_detected=equality,
        oddness_defect=defect,
        equality_consistent=(not equality) or defect <= EQUALITY_RTOL,
        binding=binding,
        reason=reason,
    )

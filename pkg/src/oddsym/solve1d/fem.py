"""P1 finite elements for E(u) = int 1/2 a (u')^2 + b G(u) on a uniform mesh.

Element integrals use the 2-point Gauss rule. The nodal gradient and the
tridiagonal Hessian (second variation) are exact derivatives of the
discrete energy.
"""

import numpy as np
from scipy.linalg import cho_solve_banded, cholesky_banded

from ..grid import GridFunction
from ..quadrature import element_points
from ..weights import Problem, symmetric_mesh


class Discretization:
    """Discrete energy on [lo, hi] with u(lo) = left and u(hi) = right pinned.

    By default the interval is [-L, L] with u = -m, m at the ends.
    """

    def __init__(
        self,
        p: Problem,
        n: int,
        lo: float | None = None,
        hi: float | None = None,
        left: float | None = None,
        right: float | None = None,
    ) -> None:
        if n < 2:
            raise ValueError(f"Mesh needs at least 2 elements, got {n}")
        self.p = p
        self.n = n
        self.lo = -p.L if lo is None else float(lo)
        self.hi = p.L if hi is None else float(hi)
        self.left = -p.m if left is None else float(left)
        self.right = p.m if right is None else float(right)
        if self.lo == -p.L and self.hi == p.L:
            self.x = symmetric_mesh(p.L, n)
        else:
            self.x = np.linspace(self.lo, self.hi, n + 1)
        self.h = (self.hi - self.lo) / n

        points, weights = element_points(self.x[:-1], self.x[1:], order=2)
        self.points = points
        self.weights = weights
        # P1 shape functions at the Gauss points of the reference element
        xi = (points - self.x[:-1, None]) / np.diff(self.x)[:, None]
        self.phi0 = 1.0 - xi
        self.phi1 = xi
        self.a_q = p.a.eval(points)
        self.b_q = p.b.eval(points)
        # int_e a, per element
        self.a_int = np.sum(weights * self.a_q, axis=1)
        self._preconditioner = None

    def grid_function(self, values: np.ndarray) -> GridFunction:
        return GridFunction(self.x, values)

    def pin(self, interior: np.ndarray) -> np.ndarray:
        values = np.empty(self.n + 1)
        values[0], values[-1] = self.left, self.right
        values[1:-1] = interior
        return values

    def _at_points(self, values: np.ndarray) -> np.ndarray:
        return values[:-1, None] * self.phi0 + values[1:, None] * self.phi1

    def energy(self, values: np.ndarray) -> float:
        slope = np.diff(values) / np.diff(self.x)
        kinetic = 0.5 * slope**2 * self.a_int
        potential = np.sum(self.weights * self.b_q * self.p.G.eval(self._at_points(values)), axis=1)
        return float(np.sum(kinetic + potential))

    def gradient(self, values: np.ndarray) -> np.ndarray:
        """dE/du at the interior nodes."""
        dx = np.diff(self.x)
        flux = np.diff(values) / dx**2 * self.a_int
        source = self.weights * self.b_q * self.p.G.d1(self._at_points(values))
        to_left = np.sum(source * self.phi0, axis=1) - flux
        to_right = np.sum(source * self.phi1, axis=1) + flux
        return to_left[1:] + to_right[:-1]

    def residual(self, values: np.ndarray) -> np.ndarray:
        """Interior gradient scaled to a pointwise Euler-Lagrange residual."""
        return self.gradient(values) / self.h

    def hessian_bands(self, values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """(diagonal, off-diagonal) of the interior Hessian."""
        dx = np.diff(self.x)
        stiff = self.a_int / dx**2
        curvature = self.weights * self.b_q * self.p.G.d2(self._at_points(values))
        m00 = np.sum(curvature * self.phi0**2, axis=1)
        m11 = np.sum(curvature * self.phi1**2, axis=1)
        m01 = np.sum(curvature * self.phi0 * self.phi1, axis=1)
        diagonal = (stiff + m11)[:-1] + (stiff + m00)[1:]
        off = (m01 - stiff)[1:-1]
        return diagonal, off

    def preconditioner(self):
        """Cholesky factor of the H1 matrix (a-weighted stiffness plus mass)."""
        if self._preconditioner is None:
            dx = np.diff(self.x)
            stiff = self.a_int / dx**2
            mass_diag = dx / 3.0
            mass_off = dx / 6.0
            diagonal = (stiff + mass_diag)[:-1] + (stiff + mass_diag)[1:]
            off = (mass_off - stiff)[1:-1]
            self._preconditioner = cholesky_banded(_upper_bands(diagonal, off))
        return self._preconditioner

    def precondition(self, vector: np.ndarray) -> np.ndarray:
        return cho_solve_banded((self.preconditioner(), False), vector)


def _upper_bands(diagonal: np.ndarray, off: np.ndarray) -> np.ndarray:
    bands = np.zeros((2, len(diagonal)))
    bands[0, 1:] = off
    bands[1] = diagonal
    return bands


def ldl_pivots(diagonal: np.ndarray, off: np.ndarray) -> np.ndarray:
    """Pivots D of the LDL^T factorization of a symmetric tridiagonal matrix.

    By Sylvester's law of inertia the number of negative pivots is the
    number of negative eigenvalues.
    """
    pivots = np.empty_like(diagonal)
    pivots[0] = diagonal[0]
    tiny = np.finfo(float).tiny
    for i in range(1, len(diagonal)):
        previous = pivots[i - 1] if pivots[i - 1] != 0.0 else tiny
        pivots[i] = diagonal[i] - off[i - 1] ** 2 / previous
    return pivots


def energy(p: Problem, u: GridFunction) -> float:
    """E(u) with 2-point Gauss per element.

    Raises:
        ValueError: If u is not on a uniform mesh of [-L, L] with u(-L) = -m, u(L) = m.
    """
    n = u.n
    if not np.allclose(u.x, symmetric_mesh(p.L, n), rtol=0, atol=1e-12 * p.L):
        raise ValueError(f"Grid function is not on the uniform mesh of [-{p.L}, {p.L}] with {n} elements")
    if u.values[0] != -p.m or u.values[-1] != p.m:
        raise ValueError(f"Grid function must satisfy u(-L) = -{p.m} and u(L) = {p.m}")
    return Discretization(p, n).energy(u.values)

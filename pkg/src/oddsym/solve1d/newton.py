"""Damped Newton minimization of the discrete energy.

Newton steps use the exact tridiagonal Hessian when it is positive definite
and a backtracking Armijo line search. When the Hessian is indefinite, or
the line search stalls, the solver takes a burst of H1-preconditioned
gradient steps with Barzilai-Borwein step lengths and then retries Newton.
"""

import logging
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.linalg import LinAlgError, cho_solve_banded, cholesky_banded

from ..exceptions import ConvergenceError, PreconditionError
from ..grid import GridFunction
from ..weights import Problem
from .diagnostics import HamiltonianTrace, ShapeDiagnostics, hamiltonian_trace, shape_diagnostics
from .fem import Discretization, _upper_bands, ldl_pivots

logger = logging.getLogger(__name__)

PRESETS = ("linear", "odd_tanh", "plus_one", "minus_one", "zero", "random")
DEFAULT_PRESETS = PRESETS

RESIDUAL_RTOL = 1e-9
MAX_NEWTON = 500
MAX_GRADIENT = 10_000
GRADIENT_BURST = 50
ARMIJO_C = 1e-4
MAX_BACKTRACKS = 60
SPOT_DIRECTIONS = 16
SPOT_AMPLITUDE = 1e-6


@dataclass
class Solution:
    """A computed critical point on a uniform mesh of [-L, L]."""

    u: GridFunction
    energy: float
    residual_inf: float
    tolerance: float
    iterations: int
    gradient_steps: int
    init: str
    method: str = "newton"
    local_min_check: bool | None = None
    hessian_negative_count: int | None = None
    hamiltonian: HamiltonianTrace | None = field(default=None, repr=False)

    @cached_property
    def diagnostics(self) -> ShapeDiagnostics:
        return shape_diagnostics(self)

    @property
    def converged(self) -> bool:
        return self.residual_inf <= self.tolerance

    def summary(self) -> dict[str, object]:
        d = self.diagnostics
        return {
            "init": self.init,
            "method": self.method,
            "n": self.u.n,
            "energy": self.energy,
            "residual_inf": self.residual_inf,
            "iterations": self.iterations,
            "gradient_steps": self.gradient_steps,
            "is_increasing": d.is_increasing,
            "zero_count": d.zero_count,
            "zero_location": d.zero_location,
            "oddness_defect": d.oddness_defect,
            "derivative_at_zero": d.derivative_at_zero,
            "u0": d.u0,
            "max_abs": d.max_abs,
            "local_min_check": self.local_min_check,
            "hessian_negative_count": self.hessian_negative_count,
            "max_hamiltonian_drift": None if self.hamiltonian is None else self.hamiltonian.max_drift,
        }


def initial_values(disc: Discretization, preset: str, seed: int = 0) -> np.ndarray:
    """Nodal starting values for a named preset, with the boundary values pinned."""
    x = disc.x
    p = disc.p
    span = max(p.m, p.M)
    if preset == "linear":
        values = disc.left + (disc.right - disc.left) * (x - disc.lo) / (disc.hi - disc.lo)
    elif preset == "odd_tanh":
        values = p.m * np.tanh(x / np.sqrt(2.0)) / np.tanh(p.L / np.sqrt(2.0))
    elif preset == "plus_one":
        values = np.full_like(x, p.M)
    elif preset == "minus_one":
        values = np.full_like(x, -p.M)
    elif preset == "zero":
        values = np.zeros_like(x)
    elif preset == "random":
        values = np.random.default_rng(seed).uniform(-span, span, size=x.shape)
    else:
        raise ValueError(f"Unknown initialization preset '{preset}'; expected one of {', '.join(PRESETS)}")
    return disc.pin(values[1:-1])


def residual_tolerance(disc: Discretization, values: np.ndarray) -> float:
    """1e-9 relative to max(1, |b f(u)|), floored at the round-off level of the stiffness operator."""
    scale = max(1.0, float(np.max(np.abs(disc.p.b.eval(disc.x) * disc.p.G.force(values)))))
    roundoff = 8 * np.finfo(float).eps * float(np.max(disc.a_int)) / disc.h**3 * max(1.0, float(np.max(np.abs(values))))
    return max(RESIDUAL_RTOL * scale, roundoff)


def _armijo(disc: Discretization, values: np.ndarray, direction: np.ndarray, gradient: np.ndarray) -> float | None:
    e0 = disc.energy(values)
    slope = float(gradient @ direction)
    if slope >= 0:
        return None
    slack = 16 * np.finfo(float).eps * max(1.0, abs(e0))
    alpha = 1.0
    trial = values.copy()
    for _ in range(MAX_BACKTRACKS):
        trial[1:-1] = values[1:-1] + alpha * direction
        if disc.energy(trial) <= e0 + ARMIJO_C * alpha * slope + slack:
            return alpha
        alpha *= 0.5
    return None


def _roundoff_step(disc: Discretization, values: np.ndarray, direction: np.ndarray, residual: float) -> np.ndarray | None:
    """The full Newton step when the energy change is lost in round-off but the residual drops."""
    e0 = disc.energy(values)
    noise = 64 * disc.n * np.finfo(float).eps * max(1.0, abs(e0))
    trial = values.copy()
    trial[1:-1] += direction
    if disc.energy(trial) > e0 + noise:
        return None
    if float(np.max(np.abs(disc.gradient(trial)))) / disc.h >= residual:
        return None
    return trial


def _newton_direction(disc: Discretization, values: np.ndarray, gradient: np.ndarray) -> np.ndarray | None:
    """Solve H d = -g, or None when H is not positive definite."""
    diagonal, off = disc.hessian_bands(values)
    try:
        factor = cholesky_banded(_upper_bands(diagonal, off))
    except LinAlgError:
        return None
    return cho_solve_banded((factor, False), -gradient)


def _gradient_burst(disc: Discretization, values: np.ndarray, steps: int, tolerance: float) -> tuple[np.ndarray, int]:
    """Preconditioned gradient descent with Barzilai-Borwein steps and backtracking."""
    gradient = disc.gradient(values)
    alpha = 1.0
    taken = 0
    while taken < steps:
        direction = -disc.precondition(gradient)
        e0 = disc.energy(values)
        slope = float(gradient @ direction)
        trial = values.copy()
        step = alpha
        for _ in range(MAX_BACKTRACKS):
            trial[1:-1] = values[1:-1] + step * direction
            if disc.energy(trial) <= e0 + ARMIJO_C * step * slope:
                break
            step *= 0.5
        else:
            break
        taken += 1
        new_gradient = disc.gradient(trial)
        s = trial[1:-1] - values[1:-1]
        y = new_gradient - gradient
        values, gradient = trial, new_gradient
        if np.max(np.abs(gradient)) / disc.h <= tolerance:
            break
        sy = float(s @ y)
        # BB1 in the preconditioner's metric
        alpha = float(np.clip((-step * slope * step) / sy, 1e-6, 1e6)) if sy > 0 else 1.0
    return values, taken


def newton_minimize(
    disc: Discretization,
    values: np.ndarray,
    max_newton: int = MAX_NEWTON,
    max_gradient: int = MAX_GRADIENT,
) -> tuple[np.ndarray, float, float, int, int]:
    """Drive the interior residual below tolerance.

    Returns:
        (values, residual_inf, tolerance, newton_iterations, gradient_steps)

    Raises:
        ConvergenceError: If the iteration limits are exhausted; the last
            iterate is attached as a GridFunction.
    """
    values = values.copy()
    newton_steps = 0
    gradient_steps = 0
    while True:
        gradient = disc.gradient(values)
        residual = float(np.max(np.abs(gradient), initial=0.0)) / disc.h
        tolerance = residual_tolerance(disc, values)
        if residual <= tolerance:
            return values, residual, tolerance, newton_steps, gradient_steps
        if newton_steps >= max_newton or gradient_steps >= max_gradient:
            raise ConvergenceError(
                f"No convergence after {newton_steps} Newton and {gradient_steps} gradient steps "
                f"(residual {residual:.3e} > {tolerance:.3e})",
                last_iterate=disc.grid_function(values),
            )
        newton_steps += 1
        direction = _newton_direction(disc, values, gradient)
        if direction is not None:
            alpha = _armijo(disc, values, direction, gradient)
            if alpha is not None:
                values[1:-1] += alpha * direction
                continue
            trial = _roundoff_step(disc, values, direction, residual)
            if trial is not None:
                values = trial
                continue
            logger.debug("Newton line search stalled at residual %.3e", residual)
        else:
            logger.debug("Indefinite Hessian at residual %.3e; taking gradient steps", residual)
        burst = min(GRADIENT_BURST, max_gradient - gradient_steps)
        values, taken = _gradient_burst(disc, values, burst, tolerance)
        gradient_steps += max(taken, 1)


def local_min_spot_check(disc: Discretization, values: np.ndarray, seed: int = 0) -> bool:
    """E(u + eps d) >= E(u) for 16 random interior directions d and both signs of eps."""
    rng = np.random.default_rng(seed)
    e0 = disc.energy(values)
    slack = 1e-12 * max(1.0, abs(e0))
    trial = values.copy()
    for _ in range(SPOT_DIRECTIONS):
        direction = rng.standard_normal(disc.n - 1)
        direction *= SPOT_AMPLITUDE / np.max(np.abs(direction))
        for sign in (1.0, -1.0):
            trial[1:-1] = values[1:-1] + sign * direction
            if disc.energy(trial) < e0 - slack:
                return False
    return True


def hessian_negative_count(disc: Discretization, values: np.ndarray) -> int:
    """Number of negative eigenvalues of the interior Hessian, by tridiagonal inertia."""
    return int(np.count_nonzero(ldl_pivots(*disc.hessian_bands(values)) < 0))


def _finish(
    p: Problem,
    disc: Discretization,
    values: np.ndarray,
    residual: float,
    tolerance: float,
    newton_steps: int,
    gradient_steps: int,
    init: str,
    method: str,
    seed: int,
    second_order: bool,
) -> Solution:
    solution = Solution(
        u=disc.grid_function(values),
        energy=disc.energy(values),
        residual_inf=residual,
        tolerance=tolerance,
        iterations=newton_steps,
        gradient_steps=gradient_steps,
        init=init,
        method=method,
    )
    solution.local_min_check = local_min_spot_check(disc, values, seed)
    if not solution.local_min_check and method == "newton":
        logger.warning("Solution from '%s' failed the local-minimality spot check", init)
    if second_order:
        solution.hessian_negative_count = hessian_negative_count(disc, values)
    solution.hamiltonian = hamiltonian_trace(p, solution)
    return solution


def minimize(
    p: Problem,
    init: str | GridFunction = "odd_tanh",
    n: int = 1024,
    seed: int = 0,
    second_order: bool = False,
    max_newton: int = MAX_NEWTON,
    max_gradient: int = MAX_GRADIENT,
) -> Solution:
    """Minimize the energy over u(-L) = -m, u(L) = m on a uniform mesh of n elements.

    ``init`` is a preset name (see PRESETS) or a GridFunction on the same mesh.

    Raises:
        ValueError: If n < 64, the preset is unknown or the initial guess is on another mesh.
        ConvergenceError: If the solver does not reach its tolerance.
    """
    if n < 64:
        raise ValueError(f"Mesh needs at least 64 elements, got {n}")
    disc = Discretization(p, n)
    if isinstance(init, GridFunction):
        if init.n != n or not np.allclose(init.x, disc.x, rtol=0, atol=1e-12 * p.L):
            raise ValueError(f"Initial guess is not on the {n}-element mesh of [-{p.L}, {p.L}]")
        values = disc.pin(init.values[1:-1])
        label = "custom"
    else:
        values = initial_values(disc, init, seed)
        label = init

    values, residual, tolerance, newton_steps, gradient_steps = newton_minimize(disc, values, max_newton, max_gradient)
    logger.debug("minimize(%s): %d Newton, %d gradient steps, residual %.3e", label, newton_steps, gradient_steps, residual)
    return _finish(p, disc, values, residual, tolerance, newton_steps, gradient_steps, label, "newton", seed, second_order)


def minimize_antisymmetric(
    p: Problem,
    n: int = 1024,
    init: str = "odd_tanh",
    seed: int = 0,
    second_order: bool = False,
) -> Solution:
    """Minimize over odd competitors only.

    Solves on [0, L] with u(0) = 0, u(L) = m and reflects; for even a, b, G
    the result is a critical point of the full energy.

    Raises:
        ValueError: If n is odd or below 64.
        PreconditionError: If a or b is not even.
    """
    if n < 64 or n % 2:
        raise ValueError(f"Antisymmetric minimization needs an even mesh of at least 64 elements, got {n}")
    if not p.even:
        raise PreconditionError("Antisymmetric minimization needs even weights a and b")
    half = Discretization(p, n // 2, lo=0.0, hi=p.L, left=0.0, right=p.m)
    values = initial_values(half, init, seed)
    values, _, _, newton_steps, gradient_steps = newton_minimize(half, values)

    full = Discretization(p, n)
    odd = np.concatenate([-values[:0:-1], values])
    odd[0], odd[n // 2], odd[-1] = -p.m, 0.0, p.m
    # residual of the full problem; the middle row vanishes by symmetry up to round-off
    residual = float(np.max(np.abs(full.gradient(odd)))) / full.h
    tolerance = residual_tolerance(full, odd)
    return _finish(
        p, full, odd, residual, tolerance, newton_steps, gradient_steps, init, "antisymmetric", seed, second_order
    )

"""Shooting for -(a u')' = b f(u) with u(-L) = -m, u(L) = m.

The equation is integrated in flux form, u' = q / a and q' = -b f(u), by the
classic fourth-order Runge-Kutta method on the uniform mesh of the problem.
Trajectories are advanced in batches, one per trial slope, so that a
bracket can be refined by multisection with a single sweep per pass.
"""

import logging

import numpy as np

from ..exceptions import ConvergenceError, NoSignChangeError, TrajectoryEscapedError
from ..weights import Problem
from .diagnostics import hamiltonian_trace
from .fem import Discretization
from .newton import Solution

logger = logging.getLogger(__name__)

DEFAULT_STEPS = 100_000
SHOOT_TOLERANCE = 1e-10
ESCAPE_FACTOR = 10.0
SECTIONS = 32
MAX_PASSES = 40
MAX_SECANT = 50


class _Integrator:
    """RK4 over the uniform mesh with the weights sampled at nodes and midpoints."""

    def __init__(self, p: Problem, steps: int) -> None:
        self.p = p
        self.steps = steps
        self.x = p.mesh(steps)
        self.h = 2 * p.L / steps
        mid = 0.5 * (self.x[:-1] + self.x[1:])
        self.a_node, self.a_mid = p.a.eval(self.x), p.a.eval(mid)
        self.b_node, self.b_mid = p.b.eval(self.x), p.b.eval(mid)
        self.bound = ESCAPE_FACTOR * max(p.m, p.M)

    def run(self, slopes: np.ndarray, record: bool = False):
        """Integrate from u(-L) = -m, u'(-L) = s for every slope s.

        Returns the end values u(L) (+/-inf for escaped trajectories) and,
        when ``record`` is set, the nodal values of the first trajectory.
        """
        force = self.p.G.force
        h = self.h
        u = np.full(slopes.shape, -self.p.m)
        q = self.a_node[0] * np.asarray(slopes, dtype=float)
        escaped = np.zeros(slopes.shape, dtype=bool)
        escape_sign = np.zeros(slopes.shape)
        path = np.empty(self.steps + 1) if record else None
        if record:
            path[0] = u[0]
        with np.errstate(over="ignore", invalid="ignore"):
            for i in range(self.steps):
                a0, am, a1 = self.a_node[i], self.a_mid[i], self.a_node[i + 1]
                b0, bm, b1 = self.b_node[i], self.b_mid[i], self.b_node[i + 1]
                k1u, k1q = q / a0, -b0 * force(u)
                u2, q2 = u + 0.5 * h * k1u, q + 0.5 * h * k1q
                k2u, k2q = q2 / am, -bm * force(u2)
                u3, q3 = u + 0.5 * h * k2u, q + 0.5 * h * k2q
                k3u, k3q = q3 / am, -bm * force(u3)
                u4, q4 = u + h * k3u, q + h * k3q
                k4u, k4q = q4 / a1, -b1 * force(u4)
                u = u + h / 6.0 * (k1u + 2 * k2u + 2 * k3u + k4u)
                q = q + h / 6.0 * (k1q + 2 * k2q + 2 * k3q + k4q)
                out = ~escaped & ~(np.abs(u) <= self.bound)
                if np.any(out):
                    escape_sign[out] = np.where(u[out] > 0, 1.0, -1.0)
                    escaped |= out
                    u = np.where(escaped, 0.0, u)
                    q = np.where(escaped, 0.0, q)
                if record:
                    path[i + 1] = u[0]
        end = np.where(escaped, escape_sign * np.inf, u)
        return end, (path if record else None)


def default_bracket(p: Problem) -> tuple[float, float]:
    """(-s, s) with s = 10 m / L * max a on the mesh (M replaces m when m = 0)."""
    x = np.linspace(-p.L, p.L, 1025)
    scale = p.m if p.m > 0 else p.M
    s = 10 * scale / p.L * float(np.max(p.a.eval(x)))
    return -s, s


def _find_root(integrator: _Integrator, lo: float, hi: float, m: float) -> tuple[float, float, int]:
    """Multisection on the sign of phi(s) = u_s(L) - m, then Illinois false position."""
    phi_lo, phi_hi = integrator.run(np.array([lo, hi]))[0] - m
    shots = 2
    if np.sign(phi_lo) == np.sign(phi_hi) or phi_lo == 0 and phi_hi == 0:
        raise NoSignChangeError(
            f"no sign change: phi({lo:.6g}) = {phi_lo:.3e} and phi({hi:.6g}) = {phi_hi:.3e}",
            last_iterate=(lo, hi),
        )
    for value, s in ((phi_lo, lo), (phi_hi, hi)):
        if abs(value) <= SHOOT_TOLERANCE:
            return s, float(value), shots

    for _ in range(MAX_PASSES):
        if np.isfinite(phi_lo) and np.isfinite(phi_hi) and hi - lo <= 1e-3 * max(1.0, abs(lo), abs(hi)):
            break
        trial = np.linspace(lo, hi, SECTIONS + 1)[1:-1]
        phi = integrator.run(trial)[0] - m
        shots += trial.size
        best = int(np.argmin(np.abs(phi)))
        if abs(phi[best]) <= SHOOT_TOLERANCE:
            return float(trial[best]), float(phi[best]), shots
        s_all = np.concatenate([[lo], trial, [hi]])
        phi_all = np.concatenate([[phi_lo], phi, [phi_hi]])
        change = int(np.flatnonzero(np.sign(phi_all[:-1]) != np.sign(phi_all[1:]))[0])
        lo, hi = s_all[change], s_all[change + 1]
        phi_lo, phi_hi = phi_all[change], phi_all[change + 1]
        if hi - lo <= 4 * np.finfo(float).eps * max(1.0, abs(lo), abs(hi)):
            if not (np.isfinite(phi_lo) and np.isfinite(phi_hi)):
                raise TrajectoryEscapedError(
                    f"trajectory escaped: |u| exceeded {integrator.bound:g} on both sides of slope {lo:.17g}",
                    last_iterate=(lo, hi),
                )
            break

    retained = 0
    for _ in range(MAX_SECANT):
        s = lo - phi_lo * (hi - lo) / (phi_hi - phi_lo) if np.isfinite(phi_lo) and np.isfinite(phi_hi) else np.nan
        if not lo < s < hi:
            s = 0.5 * (lo + hi)
        value = float(integrator.run(np.array([s]))[0][0] - m)
        shots += 1
        if abs(value) <= SHOOT_TOLERANCE:
            return float(s), value, shots
        # halve the stale end value when the same end is replaced twice running
        if np.sign(value) == np.sign(phi_lo):
            lo, phi_lo = s, value
            if retained == 1:
                phi_hi *= 0.5
            retained = 1
        else:
            hi, phi_hi = s, value
            if retained == -1:
                phi_lo *= 0.5
            retained = -1
        if hi - lo <= 4 * np.finfo(float).eps * max(1.0, abs(lo), abs(hi)):
            break
    raise ConvergenceError(
        f"shooting stalled with bracket [{lo:.17g}, {hi:.17g}], phi in [{phi_lo:.3e}, {phi_hi:.3e}]",
        last_iterate=(lo, hi),
    )


def shoot(
    p: Problem,
    slope_bracket: tuple[float, float] | None = None,
    integrator_steps: int = DEFAULT_STEPS,
) -> Solution:
    """Solve the boundary value problem by shooting on u'(-L).

    Raises:
        NoSignChangeError: If phi has the same sign at both ends of the bracket.
        TrajectoryEscapedError: If the bracket collapses onto escaping trajectories.
        ConvergenceError: If the secant phase cannot reach |phi| <= 1e-10.
    """
    if integrator_steps < 2:
        raise ValueError(f"integrator_steps must be at least 2, got {integrator_steps}")
    lo, hi = slope_bracket if slope_bracket is not None else default_bracket(p)
    if not lo < hi:
        raise ValueError(f"Slope bracket must satisfy lo < hi, got ({lo}, {hi})")

    integrator = _Integrator(p, integrator_steps)
    slope, residual, shots = _find_root(integrator, float(lo), float(hi), p.m)
    _, path = integrator.run(np.array([slope]), record=True)
    path[-1] = p.m
    logger.debug("shoot: slope %.17g after %d trajectories, |phi| = %.3e", slope, shots, abs(residual))

    disc = Discretization(p, integrator_steps)
    solution = Solution(
        u=disc.grid_function(path),
        energy=disc.energy(path),
        residual_inf=abs(residual),
        tolerance=SHOOT_TOLERANCE,
        iterations=shots,
        gradient_steps=0,
        init="shooting",
        method="shooting",
    )
    solution.hamiltonian = hamiltonian_trace(p, solution)
    return solution

"""Changes of variables y = gamma(x) that reduce (a, b) to a = b or to b = 1.

gamma1(x) = int_0^x sqrt(b/a) gives a~ = b~ = sqrt(ab) o gamma1^-1;
gamma2(x) = int_0^x b gives a~ = (ab) o gamma2^-1 and b~ = 1.
"""

import logging
from typing import Literal

import numpy as np

from ..exceptions import TransformMismatchError
from ..grid import GridFunction
from ..quadrature import PrefixIntegral, element_points
from .families import Constant, Tabulated
from .problem import Problem

logger = logging.getLogger(__name__)

Which = Literal["gamma1", "gamma2"]

EQUIVALENCE_RTOL = 1e-6
# Gauss order used on both charts by the equivalence self-test.
EQUIVALENCE_ORDER = 8


def _is_identity(p: Problem, which: Which) -> bool:
    if which == "gamma1":
        return p.a == p.b
    return p.b == Constant(1.0)


def gamma_map(p: Problem, which: Which) -> PrefixIntegral:
    """The prefix integral defining the change of variables."""
    if which == "gamma1":
        return p.gamma1
    if which == "gamma2":
        return p.B
    raise ValueError(f"Unknown change of variables: '{which}'. Must be 'gamma1' or 'gamma2'")


def change_of_variables(p: Problem, which: Which) -> Problem:
    """The problem in the variable y = gamma(x) on (-gamma(L), gamma(L)).

    Returns ``p`` itself when the transform is the identity. Constant weights
    stay Constant; otherwise the new weights are Tabulated on the image of the
    prefix-integral nodes.
    """
    gamma = gamma_map(p, which)
    if _is_identity(p, which):
        logger.debug("Change of variables %s is the identity", which)
        return p

    if isinstance(p.a, Constant) and isinstance(p.b, Constant):
        ca, cb = p.a.value, p.b.value
        if which == "gamma1":
            scale = np.sqrt(cb / ca)
            w = np.sqrt(ca * cb)
            return p.replace(L=p.L * scale, a=Constant(w), b=Constant(w))
        return p.replace(L=p.L * cb, a=Constant(ca * cb), b=Constant(1.0))

    x = gamma.nodes
    y = gamma.values
    a, b = p.a.eval(x), p.b.eval(x)
    if which == "gamma1":
        w = np.sqrt(a * b)
        new_a = new_b = Tabulated(y, w, even=p.even)
    else:
        new_a = Tabulated(y, a * b, even=p.even)
        new_b = Constant(1.0)
    return p.replace(L=float(y[-1]), a=new_a, b=new_b)


def _energy_x_chart(p: Problem, u: GridFunction, order: int) -> float:
    points, weights = element_points(u.x[:-1], u.x[1:], order)
    slope = np.diff(u.values) / np.diff(u.x)
    values = u(points)
    kinetic = 0.5 * slope[:, None] ** 2 * p.a.eval(points)
    return float(np.sum(weights * (kinetic + p.G.eval(values) * p.b.eval(points))))


def _energy_y_chart(p: Problem, q: Problem, gamma: PrefixIntegral, u: GridFunction, order: int) -> float:
    y_nodes = gamma(u.x)
    y_nodes[0], y_nodes[-1] = -q.L, q.L
    points, weights = element_points(y_nodes[:-1], y_nodes[1:], order)
    x_points = gamma.inverse(points)
    slope = np.diff(u.values) / np.diff(u.x)
    # u~'(y) = u'(x) / gamma'(x)
    u_tilde_prime = slope[:, None] / gamma.integrand(x_points)
    values = u(x_points)
    kinetic = 0.5 * u_tilde_prime**2 * q.a.eval(points)
    return float(np.sum(weights * (kinetic + p.G.eval(values) * q.b.eval(points))))


def evaluate_transform_equivalence(
    p: Problem, u: GridFunction, which: Which, rtol: float = EQUIVALENCE_RTOL
) -> tuple[float, float]:
    """Energy of u in the x chart and of u o gamma^-1 in the y chart.

    Raises:
        ValueError: If u does not live on [-L, L].
        TransformMismatchError: If the two energies differ by more than
            rtol * max(1, before).
    """
    if not np.isclose(u.x[0], -p.L) or not np.isclose(u.x[-1], p.L):
        raise ValueError(f"Grid function lives on [{u.x[0]}, {u.x[-1]}], not on [-{p.L}, {p.L}]")

    before = _energy_x_chart(p, u, EQUIVALENCE_ORDER)
    q = change_of_variables(p, which)
    if q is p:
        after = _energy_x_chart(p, u, EQUIVALENCE_ORDER)
    else:
        after = _energy_y_chart(p, q, gamma_map(p, which), u, EQUIVALENCE_ORDER)

    tolerance = rtol * max(1.0, abs(before))
    if abs(before - after) > tolerance:
        raise TransformMismatchError(before, after, tolerance)
    return before, after

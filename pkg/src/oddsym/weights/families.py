"""Closed weight families with hand-coded derivatives, plus tabulated data."""

import numpy as np
from numpy.polynomial import Polynomial as _Poly
from scipy.interpolate import PchipInterpolator

from .base import WeightFn


class Constant(WeightFn):
    """w(x) = c"""

    family = "constant"

    def __init__(self, value: float = 1.0) -> None:
        if not value > 0:
            raise ValueError(f"Constant weight must be positive, got {value}")
        self.value = float(value)

    def eval(self, x):
        return np.full_like(np.asarray(x, dtype=float), self.value)

    def d1(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))

    def d2(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))

    def params(self):
        return {"value": self.value}


class ExpQuadratic(WeightFn):
    """w(x) = exp(alpha x^2)"""

    family = "exp_quadratic"

    def __init__(self, alpha: float) -> None:
        self.alpha = float(alpha)

    def eval(self, x):
        return np.exp(self.alpha * np.asarray(x, dtype=float) ** 2)

    def d1(self, x):
        x = np.asarray(x, dtype=float)
        return 2 * self.alpha * x * self.eval(x)

    def d2(self, x):
        x = np.asarray(x, dtype=float)
        return (2 * self.alpha + 4 * self.alpha**2 * x**2) * self.eval(x)

    def params(self):
        return {"alpha": self.alpha}


class PowerAbs(WeightFn):
    """w(x) = (|x| + delta)^beta

    The derivative is taken as 0 at x = 0, where the family has a corner
    unless beta = 0.
    """

    family = "power_abs"

    def __init__(self, beta: float, delta: float = 0.0) -> None:
        if delta < 0:
            raise ValueError(f"PowerAbs offset must be nonnegative, got delta={delta}")
        self.beta = float(beta)
        self.delta = float(delta)

    def eval(self, x):
        return (np.abs(np.asarray(x, dtype=float)) + self.delta) ** self.beta

    def d1(self, x):
        x = np.asarray(x, dtype=float)
        r = np.abs(x) + self.delta
        return self.beta * r ** (self.beta - 1) * np.sign(x)

    def d2(self, x):
        r = np.abs(np.asarray(x, dtype=float)) + self.delta
        return self.beta * (self.beta - 1) * r ** (self.beta - 2)

    def params(self):
        return {"beta": self.beta, "delta": self.delta}


class Polynomial(WeightFn):
    """w(x) = sum_k c_k x^k with coefficients in ascending powers."""

    family = "polynomial"

    def __init__(self, coeffs) -> None:
        coeffs = np.trim_zeros(np.asarray(coeffs, dtype=float), "b")
        if coeffs.size == 0:
            raise ValueError("Polynomial weight needs at least one nonzero coefficient")
        if (coeffs.size - 1) % 2:
            raise ValueError(f"Polynomial weight must have even degree, got degree {coeffs.size - 1}")
        self.coeffs = coeffs
        self._p = _Poly(coeffs)
        self._dp = self._p.deriv(1)
        self._ddp = self._p.deriv(2)

    @property
    def declared_even(self) -> bool:
        return bool(np.all(self.coeffs[1::2] == 0))

    def eval(self, x):
        return self._p(np.asarray(x, dtype=float))

    def d1(self, x):
        return self._dp(np.asarray(x, dtype=float))

    def d2(self, x):
        return self._ddp(np.asarray(x, dtype=float))

    def params(self):
        return {"coeffs": self.coeffs.tolist()}


class Tabulated(WeightFn):
    """Monotone cubic (PCHIP) interpolant of sampled weight values.

    PCHIP keeps positive, monotone data positive and monotone. Its second
    derivative is only piecewise linear, so operations that need exact second
    derivatives reject this family.
    """

    family = "tabulated"
    exact_second_derivative = False
    extendable = False

    def __init__(self, nodes, values, even: bool | None = None) -> None:
        nodes = np.asarray(nodes, dtype=float)
        values = np.asarray(values, dtype=float)
        if nodes.ndim != 1 or nodes.shape != values.shape or nodes.size < 2:
            raise ValueError("Tabulated weight needs matching 1-D node and value arrays")
        if np.any(np.diff(nodes) <= 0):
            raise ValueError("Tabulated weight nodes must be strictly increasing")
        if np.any(values <= 0):
            raise ValueError("Tabulated weight values must be strictly positive")
        self.nodes = nodes
        self.values = values
        self._interp = PchipInterpolator(nodes, values, extrapolate=False)
        self._d1 = self._interp.derivative(1)
        self._d2 = self._interp.derivative(2)
        if even is None:
            even = bool(
                np.allclose(nodes, -nodes[::-1], rtol=0, atol=1e-12 * np.max(np.abs(nodes)))
                and np.allclose(values, values[::-1], rtol=1e-12, atol=0)
            )
        self._even = even

    @property
    def declared_even(self) -> bool:
        return self._even

    @property
    def domain_halfwidth(self) -> float:
        return float(min(-self.nodes[0], self.nodes[-1]))

    def eval(self, x):
        return self._interp(np.asarray(x, dtype=float))

    def d1(self, x):
        return self._d1(np.asarray(x, dtype=float))

    def d2(self, x):
        return self._d2(np.asarray(x, dtype=float))

    def params(self):
        return {"nodes": self.nodes.tolist(), "values": self.values.tolist()}


def weight_from_params(family: str, **params) -> WeightFn:
    """Build a weight from its family name and parameters."""
    builders = {
        Constant.family: Constant,
        ExpQuadratic.family: ExpQuadratic,
        PowerAbs.family: PowerAbs,
        Polynomial.family: Polynomial,
        Tabulated.family: Tabulated,
    }
    if family not in builders:
        raise ValueError(f"Unknown weight family: '{family}'. Must be one of {sorted(builders)}")
    return builders[family](**params)

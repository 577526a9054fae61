"""Even double-well potentials G with f = -G'."""

from abc import ABC, abstractmethod

import numpy as np
from scipy.interpolate import PchipInterpolator

# Sample count for the evenness and well checks on [-3M, 3M].
SAMPLE_POINTS = 2049


class Potential(ABC):
    """Abstract base class for an even potential G"""

    family: str = "abstract"

    def __init__(self, well_location: float, double_well: bool) -> None:
        if not well_location > 0:
            raise ValueError(f"Potential well location must be positive, got M={well_location}")
        self.well_location = float(well_location)
        self.double_well = bool(double_well)

    @abstractmethod
    def eval(self, s):
        """G(s)"""
        pass

    @abstractmethod
    def d1(self, s):
        """G'(s)"""
        pass

    @abstractmethod
    def d2(self, s):
        """G''(s)"""
        pass

    @abstractmethod
    def d3(self, s):
        """G'''(s)"""
        pass

    @abstractmethod
    def params(self) -> dict[str, object]:
        """Family parameters, as written in a config file"""
        pass

    def __call__(self, s):
        return self.eval(s)

    def force(self, s):
        """f(s) = -G'(s)"""
        return -self.d1(s)

    @property
    def well_value(self) -> float:
        """G(M)"""
        return float(self.eval(np.float64(self.well_location)))

    def validate(self, points: int = SAMPLE_POINTS) -> None:
        """Check evenness, f(0) = 0 and, for double wells, G >= G(M) on [-3M, 3M].

        Raises:
            ValueError: If any of the checks fail.
        """
        M = self.well_location
        s = np.linspace(-3 * M, 3 * M, points)
        g = self.eval(s)
        if not np.all(np.isfinite(g)):
            raise ValueError(f"Potential '{self.family}' must be finite on [-{3 * M}, {3 * M}]")
        if np.any(np.abs(g - g[::-1]) > 1e-12 * np.maximum(1.0, np.abs(g))):
            raise ValueError(f"Potential '{self.family}' must be even")
        if self.d1(np.zeros(1))[0] != 0.0:
            raise ValueError(f"Potential '{self.family}' must have f(0) = 0")
        if self.double_well and np.any(g < self.well_value - 1e-12 * max(1.0, abs(self.well_value))):
            raise ValueError(f"Potential '{self.family}' is declared a double well but G < G(M) somewhere")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Potential) or other.family != self.family:
            return False
        mine, theirs = self.params(), other.params()
        return mine.keys() == theirs.keys() and all(
            np.array_equal(np.asarray(mine[k]), np.asarray(theirs[k])) for k in mine
        )

    def __hash__(self) -> int:
        return hash((self.family, repr(sorted(self.params().items()))))

    def __repr__(self) -> str:
        args = ", ".join(f"{k}={v!r}" for k, v in self.params().items())
        return f"{type(self).__name__}({args})"


class Quartic(Potential):
    """G(s) = (M^2 - s^2)^2 / 4, the Allen-Cahn double well.

    The accessors use plain arithmetic so they also work on Python floats,
    which the shooting integrator relies on.
    """

    family = "quartic"

    def __init__(self, M: float = 1.0) -> None:
        super().__init__(M, double_well=True)
        self.M2 = self.well_location**2

    def eval(self, s):
        return 0.25 * (self.M2 - s * s) ** 2

    def d1(self, s):
        return -s * (self.M2 - s * s)

    def force(self, s):
        return s * (self.M2 - s * s)

    def d2(self, s):
        return 3 * s * s - self.M2

    def d3(self, s):
        return 6 * s

    def params(self):
        return {"M": self.well_location}


class EvenPolynomial(Potential):
    """G(s) = sum_k c_k s^(2k).

    ``coeffs`` are the coefficients of the even powers 1, s^2, s^4, ...
    With ``double_well=False`` the well location is nominal (used only to
    size sampling windows), e.g. for the convex potential G(s) = s^2.
    """

    family = "even_polynomial"

    def __init__(self, coeffs, well_location: float = 1.0, double_well: bool = False) -> None:
        super().__init__(well_location, double_well)
        coeffs = np.atleast_1d(np.asarray(coeffs, dtype=float))
        if coeffs.ndim != 1 or coeffs.size == 0:
            raise ValueError("EvenPolynomial needs a non-empty list of coefficients")
        self.coeffs = coeffs
        full = np.zeros(2 * coeffs.size - 1)
        full[::2] = coeffs
        self._p = np.polynomial.Polynomial(full)
        self._dp = [self._p.deriv(k) for k in (1, 2, 3)]

    def eval(self, s):
        return self._p(s)

    def d1(self, s):
        return self._dp[0](s)

    def d2(self, s):
        return self._dp[1](s)

    def d3(self, s):
        return self._dp[2](s)

    def params(self):
        return {
            "coeffs": self.coeffs.tolist(),
            "well_location": self.well_location,
            "double_well": self.double_well,
        }


class TabulatedEven(Potential):
    """Monotone cubic interpolant of G sampled on [0, s_max], mirrored to an even function.

    Extrapolation beyond +-s_max continues the end cubic.
    """

    family = "tabulated_even"

    def __init__(self, nodes, values, well_location: float, double_well: bool = True) -> None:
        super().__init__(well_location, double_well)
        nodes = np.asarray(nodes, dtype=float)
        values = np.asarray(values, dtype=float)
        if nodes.ndim != 1 or nodes.shape != values.shape or nodes.size < 2:
            raise ValueError("TabulatedEven needs matching 1-D node and value arrays")
        if nodes[0] != 0.0 or np.any(np.diff(nodes) <= 0):
            raise ValueError("TabulatedEven nodes must start at 0 and be strictly increasing")
        self.nodes = nodes
        self.values = values
        mirrored_nodes = np.concatenate([-nodes[:0:-1], nodes])
        mirrored_values = np.concatenate([values[:0:-1], values])
        self._interp = PchipInterpolator(mirrored_nodes, mirrored_values, extrapolate=True)
        self._derivs = [self._interp.derivative(k) for k in (1, 2, 3)]

    def eval(self, s):
        return self._interp(s)

    def d1(self, s):
        return self._derivs[0](s)

    def d2(self, s):
        return self._derivs[1](s)

    def d3(self, s):
        return self._derivs[2](s)

    def params(self):
        return {
            "nodes": self.nodes.tolist(),
            "values": self.values.tolist(),
            "well_location": self.well_location,
            "double_well": self.double_well,
        }


def potential_from_params(family: str, **params) -> Potential:
    """Build a potential from its family name and parameters."""
    builders = {
        Quartic.family: Quartic,
        EvenPolynomial.family: EvenPolynomial,
        TabulatedEven.family: TabulatedEven,
    }
    if family not in builders:
        raise ValueError(f"Unknown potential family: '{family}'. Must be one of {sorted(builders)}")
    return builders[family](**params)

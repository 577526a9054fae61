import dataclasses
import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ..quadrature import PrefixIntegral
from .base import WeightFn
from .potential import Potential

logger = logging.getLogger(__name__)

# Initial panel count for the prefix integrals (doubled until converged).
PREFIX_PANELS = 4096
PREFIX_RTOL = 1e-10


def symmetric_mesh(L: float, n: int) -> np.ndarray:
    x = np.linspace(-L, L, n + 1)
    return 0.5 * (x - x[::-1])


@dataclass(frozen=True, eq=True)
class Problem:
    """A variational instance: minimize int 1/2 a u'^2 + b G(u) over u(-L) = -m, u(L) = m.

    The prefix integrals int_0^x 1/a, int_0^x b and int_0^x sqrt(b/a) are
    tabulated on first use and cached on the instance.
    """

    L: float
    m: float
    a: WeightFn
    b: WeightFn
    G: Potential

    def __post_init__(self) -> None:
        if not self.L > 0:
            raise ValueError(f"Half-width L must be positive, got {self.L}")
        if not self.m >= 0:
            raise ValueError(f"Boundary value m must be nonnegative, got {self.m}")
        self.a.validate(self.L)
        self.b.validate(self.L)
        self.G.validate()

    @property
    def M(self) -> float:
        """Well location of G."""
        return self.G.well_location

    @property
    def even(self) -> bool:
        return self.a.declared_even and self.b.declared_even

    def mesh(self, n: int) -> np.ndarray:
        """Uniform mesh of n elements on [-L, L], exactly symmetric about 0."""
        return symmetric_mesh(self.L, n)

    def replace(self, **changes) -> "Problem":
        return dataclasses.replace(self, **changes)

    def _prefix(self, integrand) -> PrefixIntegral:
        return PrefixIntegral(integrand, -self.L, self.L, panels=PREFIX_PANELS, rtol=PREFIX_RTOL)

    @cached_property
    def inv_a(self) -> PrefixIntegral:
        """x -> int_0^x 1/a"""
        return self._prefix(self.a.reciprocal)

    @cached_property
    def B(self) -> PrefixIntegral:
        """x -> int_0^x b"""
        return self._prefix(self.b.eval)

    @cached_property
    def gamma1(self) -> PrefixIntegral:
        """x -> int_0^x sqrt(b/a)"""
        return self._prefix(self._sqrt_b_over_a)

    def _sqrt_b_over_a(self, x):
        return np.sqrt(self.b.eval(x) / self.a.eval(x))

    def describe(self) -> dict[str, object]:
        """Plain-data description (used in reports)."""
        return {
            "L": self.L,
            "m": self.m,
            "a": {"family": self.a.family, **self.a.params()},
            "b": {"family": self.b.family, **self.b.params()},
            "G": {"family": self.G.family, **self.G.params()},
        }

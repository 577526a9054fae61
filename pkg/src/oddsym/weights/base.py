from abc import ABC, abstractmethod

import numpy as np

# Uniform sample count used for positivity and evenness checks.
SAMPLE_POINTS = 2049


class WeightFn(ABC):
    """Abstract base class for positive weights a, b on [-L, L]"""

    family: str = "abstract"
    # Analytic families carry hand-coded second derivatives.
    exact_second_derivative: bool = True
    # Defined on the whole real line (needed by horizon scans and L1 norms).
    extendable: bool = True

    @abstractmethod
    def eval(self, x: np.ndarray) -> np.ndarray:
        """Weight values"""
        pass

    @abstractmethod
    def d1(self, x: np.ndarray) -> np.ndarray:
        """First derivative"""
        pass

    @abstractmethod
    def d2(self, x: np.ndarray) -> np.ndarray:
        """Second derivative"""
        pass

    @abstractmethod
    def params(self) -> dict[str, object]:
        """Family parameters, as written in a config file"""
        pass

    @property
    def declared_even(self) -> bool:
        """Whether the family claims w(x) = w(-x)"""
        return True

    @property
    def domain_halfwidth(self) -> float:
        """Largest L for which the weight is defined on [-L, L]"""
        return np.inf

    def __call__(self, x):
        return self.eval(np.asarray(x, dtype=float))

    def reciprocal(self, x):
        return 1.0 / self.eval(np.asarray(x, dtype=float))

    def log_d2(self, x: np.ndarray) -> np.ndarray:
        """(log w)'' from the exact derivatives."""
        w = self.eval(x)
        return (self.d2(x) * w - self.d1(x) ** 2) / w**2

    def validate(self, L: float, points: int = SAMPLE_POINTS) -> None:
        """Check positivity and declared evenness on [-L, L].

        Raises:
            ValueError: If the weight is not finite and strictly positive, is
                undefined beyond its domain, or breaks its declared evenness.
        """
        if L > self.domain_halfwidth * (1 + 1e-12):
            raise ValueError(
                f"Weight '{self.family}' is only defined on [-{self.domain_halfwidth}, "
                f"{self.domain_halfwidth}], not on [-{L}, {L}]"
            )
        x = np.linspace(-L, L, points)
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            w = self.eval(x)
        if not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise ValueError(f"Weight '{self.family}' must be finite and strictly positive on [-{L}, {L}]")
        if self.declared_even:
            defect = np.abs(w - w[::-1])
            if np.any(defect > 1e-12 * np.abs(w)):
                raise ValueError(f"Weight '{self.family}' is declared even but w(x) != w(-x)")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, WeightFn) or other.family != self.family:
            return False
        mine, theirs = self.params(), other.params()
        if mine.keys() != theirs.keys():
            return False
        return all(np.array_equal(np.asarray(mine[k]), np.asarray(theirs[k])) for k in mine)

    def __hash__(self) -> int:
        return hash((self.family, repr(sorted(self.params().items()))))

    def __repr__(self) -> str:
        args = ", ".join(f"{k}={v!r}" for k, v in self.params().items())
        return f"{type(self).__name__}({args})"

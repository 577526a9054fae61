from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Nodal values of a continuous piecewise-linear function on a uniform mesh."""

    x: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        x = np.array(self.x, dtype=float)
        values = np.array(self.values, dtype=float)
        if x.ndim != 1 or x.shape != values.shape or x.size < 2:
            raise ValueError("GridFunction needs matching 1-D node and value arrays with at least 2 nodes")
        if np.any(np.diff(x) <= 0):
            raise ValueError("GridFunction nodes must be strictly increasing")
        x.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "values", values)

    @classmethod
    def pinned(cls, x: np.ndarray, interior: np.ndarray, left: float, right: float) -> "GridFunction":
        """Grid function with the given interior values and exact boundary values."""
        values = np.empty(len(x))
        values[0], values[-1] = left, right
        values[1:-1] = interior
        return cls(x, values)

    @classmethod
    def from_function(cls, x: np.ndarray, fn) -> "GridFunction":
        return cls(x, fn(np.asarray(x, dtype=float)))

    @property
    def n(self) -> int:
        """Number of elements."""
        return len(self.x) - 1

    @property
    def h(self) -> float:
        return float((self.x[-1] - self.x[0]) / self.n)

    @property
    def L(self) -> float:
        return float(self.x[-1])

    @property
    def m(self) -> float:
        return float(self.values[-1])

    def __call__(self, points):
        points = np.asarray(points, dtype=float)
        return np.interp(points.ravel(), self.x, self.values).reshape(points.shape)

    def slopes(self) -> np.ndarray:
        """Derivative on each element."""
        return np.diff(self.values) / np.diff(self.x)

    def nodal_derivative(self) -> np.ndarray:
        """Second-order finite-difference derivative at the nodes."""
        return np.gradient(self.values, self.x, edge_order=2)

    def flipped(self) -> "GridFunction":
        """u*(x) = -u(-x) on the reflected nodes."""
        return GridFunction(-self.x[::-1], -self.values[::-1])

    def sup_distance(self, other: "GridFunction") -> float:
        if other.x.shape == self.x.shape and np.allclose(other.x, self.x, rtol=0, atol=1e-12 * abs(self.L)):
            return float(np.max(np.abs(self.values - other.values)))
        return float(np.max(np.abs(self.values - other(self.x))))

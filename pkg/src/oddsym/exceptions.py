"""Exception types raised by oddsym.

Each class subclasses the built-in exception a caller would otherwise expect,
so ``except ValueError`` keeps working for input problems and
``except RuntimeError`` for numerical failures.
"""

from typing import Any


class OddsymError(Exception):
    """Base mixin for every oddsym error."""


class InsufficientSmoothnessError(OddsymError, ValueError):
    """A weight without exact second derivatives was used where they are required."""

    def __init__(self, condition: str, family: str) -> None:
        self.condition = condition
        self.family = family
        super().__init__(
            f"insufficient smoothness: condition '{condition}' needs exact second "
            f"derivatives, but weight family '{family}' only has interpolant derivatives"
        )


class FlatRegionError(OddsymError, ValueError):
    """An increasing function is too flat to be inverted reliably."""

    def __init__(self, min_slope: float, threshold: float) -> None:
        self.min_slope = min_slope
        self.threshold = threshold
        super().__init__(
            f"flat region: inverse ill-conditioned (min slope {min_slope:.3e} "
            f"< {threshold:.3e})"
        )


class PreconditionError(OddsymError, ValueError):
    """A structural hypothesis required by an operation does not hold."""


class NonIntegrableError(OddsymError, ValueError):
    """A weight family is not integrable over the real line."""


class ConvergenceError(OddsymError, RuntimeError):
    """An iterative solver stopped before reaching its tolerance."""

    def __init__(self, message: str, last_iterate: Any = None) -> None:
        self.last_iterate = last_iterate
        super().__init__(message)


class NoSignChangeError(ConvergenceError):
    """The shooting bracket does not straddle a root."""


class TrajectoryEscapedError(ConvergenceError):
    """A shooting trajectory left the admissible band."""


class TransformMismatchError(OddsymError, RuntimeError):
    """Energies before and after a change of variables disagree."""

    def __init__(self, before: float, after: float, tolerance: float) -> None:
        self.before = before
        self.after = after
        self.tolerance = tolerance
        super().__init__(
            f"energy mismatch under change of variables: before={before!r}, "
            f"after={after!r}, |difference| > {tolerance:.3e}"
        )


class CertificateContradiction(OddsymError, RuntimeError):
    """A certified uniqueness instance produced several distinct solutions."""


class ConfigError(OddsymError, ValueError):
    """An experiment config file could not be parsed or validated."""

    def __init__(self, message: str, key: str | None = None, line: int | None = None) -> None:
        self.key = key
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key '{key}'")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(f"{prefix}{message}")

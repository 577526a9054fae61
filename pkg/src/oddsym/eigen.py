"""First Dirichlet eigenvalue of -(a xi')' = lambda b xi and the uniqueness certificates built on it.

A critical point is unique as soon as lambda_1 >= -G''(0) and G'' is
strictly larger away from 0. lambda_1 is computed numerically or bounded
from below in closed form; the Muckenhoupt constant brackets it from both
sides.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
import polars as pl
from scipy.integrate import quad
from scipy.linalg import cho_solve_banded, cholesky_banded
from scipy.optimize import minimize_scalar

from .exceptions import ConvergenceError, InsufficientSmoothnessError, NonIntegrableError
from .grid import GridFunction
from .quadrature import element_points
from .weights import Constant, ExpQuadratic, Polynomial, Potential, PowerAbs, Problem, WeightFn

logger = logging.getLogger(__name__)

RAYLEIGH_RTOL = 1e-12
MAX_ITERATIONS = 10_000
MUCKENHOUPT_POINTS = 2048
ANNA_POINTS = 2049
STRICTNESS_SAMPLES = 4097
STRICTNESS_EXCLUSION = 1e-6
AGREEMENT_TOLERANCE = 1e-10
L1_RTOL = 1e-10


def _assemble(p: Problem, n: int):
    """Interior P1 stiffness (weight a) and consistent mass (weight b) bands."""
    x = p.mesh(n)
    dx = np.diff(x)
    points, weights = element_points(x[:-1], x[1:], order=3)
    xi = (points - x[:-1, None]) / dx[:, None]
    stiff = np.sum(weights * p.a.eval(points), axis=1) / dx**2
    b_q = weights * p.b.eval(points)
    m00 = np.sum(b_q * (1 - xi) ** 2, axis=1)
    m11 = np.sum(b_q * xi**2, axis=1)
    m01 = np.sum(b_q * xi * (1 - xi), axis=1)
    k_diag = stiff[:-1] + stiff[1:]
    k_off = -stiff[1:-1]
    m_diag = m11[:-1] + m00[1:]
    m_off = m01[1:-1]
    return x, (k_diag, k_off), (m_diag, m_off)


def _band_product(diagonal: np.ndarray, off: np.ndarray, v: np.ndarray) -> np.ndarray:
    out = diagonal * v
    out[:-1] += off * v[1:]
    out[1:] += off * v[:-1]
    return out


def _inverse_power(p: Problem, n: int) -> tuple[float, np.ndarray, np.ndarray]:
    x, (k_diag, k_off), (m_diag, m_off) = _assemble(p, n)
    bands = np.zeros((2, len(k_diag)))
    bands[0, 1:] = k_off
    bands[1] = k_diag
    factor = cholesky_banded(bands)

    v = np.ones_like(k_diag)
    lam = np.inf
    for iteration in range(1, MAX_ITERATIONS + 1):
        w = cho_solve_banded((factor, False), _band_product(m_diag, m_off, v))
        w /= np.max(np.abs(w))
        new = float(w @ _band_product(k_diag, k_off, w)) / float(w @ _band_product(m_diag, m_off, w))
        v = w
        if abs(new - lam) <= RAYLEIGH_RTOL * abs(new):
            logger.debug("Inverse power iteration converged after %d steps (n=%d)", iteration, n)
            return new, x, v
        lam = new
    raise ConvergenceError(
        f"Inverse power iteration did not converge in {MAX_ITERATIONS} steps (n={n})",
        last_iterate=lam,
    )


@dataclass(frozen=True)
class EigenResult:
    lambda1: float
    lambda1_n: float
    lambda1_2n: float
    eigenvector: GridFunction
    muckenhoupt_M: float
    lower_bound_anna: float | None
    semistable: bool

    @property
    def bracket(self) -> tuple[float, float]:
        """(1/(16 M), 4/M)"""
        return 1.0 / (16 * self.muckenhoupt_M), 4.0 / self.muckenhoupt_M

    @property
    def in_bracket(self) -> bool:
        lo, hi = self.bracket
        return 0.95 * lo <= self.lambda1 <= 1.05 * hi

    def eigenvector_table(self) -> pl.DataFrame:
        return pl.DataFrame({"x": self.eigenvector.x, "xi": self.eigenvector.values})

    def summary(self) -> dict[str, object]:
        lo, hi = self.bracket
        return {
            "lambda1": self.lambda1,
            "lambda1_n": self.lambda1_n,
            "lambda1_2n": self.lambda1_2n,
            "muckenhoupt_M": self.muckenhoupt_M,
            "bracket_lower": lo,
            "bracket_upper": hi,
            "in_bracket": self.in_bracket,
            "lower_bound_anna": self.lower_bound_anna,
            "semistable": self.semistable,
        }


def lambda1(p: Problem, n: int = 1024) -> EigenResult:
    """Smallest eigenvalue on meshes of n and 2n elements, Richardson-extrapolated.

    Raises:
        ValueError: If n < 128.
        ConvergenceError: If inverse power iteration does not settle.
    """
    if n < 128:
        raise ValueError(f"Eigenvalue mesh needs at least 128 elements, got {n}")
    coarse, _, _ = _inverse_power(p, n)
    fine, x, v = _inverse_power(p, 2 * n)
    extrapolated = (4 * fine - coarse) / 3

    values = np.zeros(2 * n + 1)
    values[1:-1] = v * np.sign(v[np.argmax(np.abs(v))])
    try:
        anna = anna_lower_bound(p).value
    except InsufficientSmoothnessError as error:
        logger.info("Closed-form eigenvalue bound skipped: %s", error)
        anna = None
    return EigenResult(
        lambda1=extrapolated,
        lambda1_n=coarse,
        lambda1_2n=fine,
        eigenvector=GridFunction(x, values),
        muckenhoupt_M=muckenhoupt_constant(p),
        lower_bound_anna=anna,
        semistable=bool(extrapolated >= -float(p.G.d2(0.0))),
    )


def muckenhoupt_constant(p: Problem, n: int = MUCKENHOUPT_POINTS) -> float:
    """sup over alpha < beta of (int_alpha^beta b)(int_c^L 1/a), c = max(|alpha|, |beta|).

    Exhaustive search over pairs of an n-point grid, then a bounded 1-D
    refinement: for a fixed c the first factor is largest at alpha = -c, beta = c.
    """
    s = np.linspace(-p.L, p.L, n)
    B = p.B(s)
    tail = p.inv_a(p.L) - p.inv_a(np.abs(s))
    inside = B[None, :] - B[:, None]
    c_tail = np.minimum(tail[:, None], tail[None, :])
    product = np.where(inside > 0, inside * c_tail, 0.0)
    i, j = np.unravel_index(int(np.argmax(product)), product.shape)
    best = float(product[i, j])

    def symmetric(c):
        return -float((p.B(c) - p.B(-c)) * (p.inv_a(p.L) - p.inv_a(c)))

    c0 = max(abs(s[i]), abs(s[j]))
    step = 2 * p.L / (n - 1)
    lo, hi = max(0.0, c0 - step), min(p.L, c0 + step)
    result = minimize_scalar(symmetric, bounds=(lo, hi), method="bounded", options={"xatol": 1e-12 * p.L})
    return max(best, -float(result.fun))


@dataclass(frozen=True)
class AnnaBound:
    value: float
    x_at: float
    sqrt_value: float | None = None


def anna_lower_bound(p: Problem, points: int = ANNA_POINTS) -> AnnaBound:
    """lambda_1 >= 1/4 inf {2 (a b'/b^2)' + a b'^2/b^3}.

    When a and b are the same weight the infimum is also computed as
    inf (sqrt a)''/sqrt a, and the two must agree.

    Raises:
        InsufficientSmoothnessError: If a weight has no exact second derivative.
        ArithmeticError: If the two forms disagree for a = b.
    """
    condition = "2 (a b'/b^2)' + a b'^2/b^3"
    for w in (p.a, p.b):
        if not w.exact_second_derivative:
            raise InsufficientSmoothnessError(condition, w.family)
    x = p.mesh(points - 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        a, a1 = p.a.eval(x), p.a.d1(x)
        b, b1, b2 = p.b.eval(x), p.b.d1(x), p.b.d2(x)
        q = 0.25 * (2 * a1 * b1 / b**2 + 2 * a * b2 / b**2 - 3 * a * b1**2 / b**3)
    finite = np.isfinite(q)
    i = int(np.argmin(np.where(finite, q, np.inf)))
    value = float(q[i])

    sqrt_value = None
    if p.a == p.b:
        with np.errstate(divide="ignore", invalid="ignore"):
            r = p.a.d2(x) / (2 * a) - a1**2 / (4 * a**2)
        sqrt_value = float(np.min(r[np.isfinite(r)]))
        if abs(sqrt_value - value) > AGREEMENT_TOLERANCE * max(1.0, abs(value)):
            raise ArithmeticError(f"Eigenvalue bound forms disagree: {value!r} vs {sqrt_value!r}")
    return AnnaBound(value=value, x_at=float(x[i]), sqrt_value=sqrt_value)


@dataclass(frozen=True)
class RadialForms:
    scaling_exponent: float
    lambda1_critical: float | None


def radial_closed_forms(alpha: float, beta: float, N: int) -> RadialForms:
    """Weights |x|^alpha, |x|^beta in dimension N.

    lambda_1 scales like tau^(alpha - beta - 2) under dilation by tau; when
    alpha - beta = 2 it is (N - 2 + alpha)^2 / 4 on every domain.

    Raises:
        ValueError: If N < 1, or alpha <= 2 - N or beta <= -N in the critical case.
    """
    if N < 1:
        raise ValueError(f"Dimension must be at least 1, got {N}")
    critical = None
    if np.isclose(alpha - beta, 2.0, rtol=0, atol=1e-12):
        if not (alpha > 2 - N and beta > -N):
            raise ValueError(f"Critical radial form needs alpha > 2 - N and beta > -N; got alpha={alpha}, beta={beta}, N={N}")
        critical = (N - 2 + alpha) ** 2 / 4
    return RadialForms(scaling_exponent=alpha - beta - 2, lambda1_critical=critical)


def _inverse_integrable(a: WeightFn) -> bool:
    if isinstance(a, PowerAbs):
        return a.beta > 1 and a.delta > 0
    if isinstance(a, ExpQuadratic):
        return a.alpha > 0
    if isinstance(a, Polynomial):
        return a.coeffs.size - 1 >= 2
    return False


def _integrable(b: WeightFn) -> bool:
    if isinstance(b, PowerAbs):
        return b.beta < -1 and b.delta > 0
    if isinstance(b, ExpQuadratic):
        return b.alpha < 0
    return False


def _l1_norm(fn) -> float:
    total = 0.0
    for lo, hi in ((-np.inf, -1.0), (-1.0, 1.0), (1.0, np.inf)):
        value, _ = quad(fn, lo, hi, epsabs=0.0, epsrel=L1_RTOL, limit=200)
        total += value
    return total


@dataclass(frozen=True)
class L1Certificate:
    certified: bool
    lhs: float
    norm_inv_a: float
    norm_b: float
    target: float


def l1_product_certificate(a: WeightFn, b: WeightFn, G: Potential) -> L1Certificate:
    """1 / (16 |1/a|_1 |b|_1) >= -G''(0), with both norms over the real line.

    Raises:
        NonIntegrableError: If 1/a or b is not integrable for its family.
    """
    if not _inverse_integrable(a):
        raise NonIntegrableError(f"1/a is not integrable on the real line for {a!r}")
    if not _integrable(b):
        raise NonIntegrableError(f"b is not integrable on the real line for {b!r}")
    norm_inv_a = _l1_norm(lambda x: 1.0 / float(a.eval(np.float64(x))))
    norm_b = _l1_norm(lambda x: float(b.eval(np.float64(x))))
    lhs = 1.0 / (16 * norm_inv_a * norm_b)
    target = -float(G.d2(0.0))
    return L1Certificate(
        certified=bool(lhs >= target - 1e-9 * max(abs(lhs), abs(target))),
        lhs=lhs,
        norm_inv_a=norm_inv_a,
        norm_b=norm_b,
        target=target,
    )


@dataclass(frozen=True)
class Certificate:
    """Outcome of the uniqueness certificate; margin = route value + G''(0)."""

    certified: bool
    route: str | None
    margin: float | None
    strict_margin: float
    reason: str | None = None
    attempts: dict[str, float] = field(default_factory=dict)

    def summary(self) -> dict[str, object]:
        return {
            "certified": self.certified,
            "route": self.route,
            "margin": self.margin,
            "strict_margin": self.strict_margin,
            "reason": self.reason,
            **{f"margin_{k}": v for k, v in self.attempts.items()},
        }


def _closed_form_value(p: Problem) -> float | None:
    try:
        value = anna_lower_bound(p).value
    except InsufficientSmoothnessError:
        return None
    if isinstance(p.a, ExpQuadratic) and p.a == p.b and p.a.alpha > 0:
        # supersolution exp(-alpha x^2) gives 2 alpha N with N = 1
        value = max(value, 2 * p.a.alpha)
    return value


def _radial_value(p: Problem) -> float | None:
    a, b = p.a, p.b
    if isinstance(a, PowerAbs) and isinstance(b, PowerAbs) and a.delta == 0 and b.delta == 0:
        return radial_closed_forms(a.beta, b.beta, 1).lambda1_critical
    return None


def uniqueness_certificate(p: Problem, n: int = 1024) -> Certificate:
    """Certify a unique critical point from lambda_1 >= -G''(0).

    Routes are tried in order: closed-form bound, radial closed form, L1
    product, numeric lambda_1. G'' must exceed G''(0) on [-3M, 3M] away from
    a 1e-6 neighbourhood of 0.
    """
    M = p.M
    s = np.linspace(-3 * M, 3 * M, STRICTNESS_SAMPLES)
    s = s[np.abs(s) >= STRICTNESS_EXCLUSION]
    g0 = float(p.G.d2(0.0))
    gap = p.G.d2(s) - g0
    strict_margin = float(np.min(gap))
    if not strict_margin > 0:
        return Certificate(
            certified=False,
            route=None,
            margin=None,
            strict_margin=strict_margin,
            reason=f"G'' does not exceed G''(0) away from 0 (min gap {strict_margin:.3e})",
        )

    attempts: dict[str, float] = {}
    routes = (
        ("anna_bound", lambda: _closed_form_value(p)),
        ("radial_closed_form", lambda: _radial_value(p)),
        ("L1_product", lambda: _l1_value(p)),
        ("lambda1_numeric", lambda: lambda1(p, n).lambda1),
    )
    for route, compute in routes:
        value = compute()
        if value is None:
            continue
        margin = value + g0
        attempts[route] = margin
        if margin >= -1e-12 * max(1.0, abs(g0)):
            return Certificate(True, route, margin, strict_margin, attempts=attempts)

    best = max(attempts, key=attempts.get)
    return Certificate(
        certified=False,
        route=best,
        margin=attempts[best],
        strict_margin=strict_margin,
        reason=f"lambda_1 bounds stay below -G''(0) = {-g0:g}",
        attempts=attempts,
    )


def _l1_value(p: Problem) -> float | None:
    try:
        return l1_product_certificate(p.a, p.b, p.G).lhs
    except NonIntegrableError:
        return None


@dataclass(frozen=True)
class ScalingCheck:
    lambda_base: float
    lambda_scaled: float
    tau: float
    expected_ratio: float
    ratio: float

    @property
    def holds(self) -> bool:
        return abs(self.ratio - self.expected_ratio) <= 1e-4 * self.expected_ratio


def scaled_eigenvalue_check(p: Problem, tau: float = 2.0, n: int = 512) -> ScalingCheck:
    """lambda_1 on [-tau L, tau L] is tau^-2 times lambda_1 on [-L, L] for constant weights.

    Raises:
        ValueError: If a or b is not constant.
    """
    if not (isinstance(p.a, Constant) and isinstance(p.b, Constant)):
        raise ValueError("Dilation check needs constant weights")
    base = lambda1(p, n).lambda1
    scaled = lambda1(p.replace(L=tau * p.L), n).lambda1
    return ScalingCheck(
        lambda_base=base, lambda_scaled=scaled, tau=tau, expected_ratio=tau**-2.0, ratio=scaled / base
    )

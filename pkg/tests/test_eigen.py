import numpy as np
import pytest

from oddsym.eigen import (
    anna_lower_bound,
    l1_product_certificate,
    lambda1,
    muckenhoupt_constant,
    radial_closed_forms,
    scaled_eigenvalue_check,
    uniqueness_certificate,
)
from oddsym.exceptions import InsufficientSmoothnessError, NonIntegrableError
from oddsym.weights import Constant, EvenPolynomial, ExpQuadratic, PowerAbs, Problem, Quartic, Tabulated

from .conftest import allen_cahn

GAUSSIAN_WELL = EvenPolynomial([0.0, -1 / (32 * np.pi), 1.0], well_location=1 / (8 * np.sqrt(np.pi)), double_well=True)


class TestLambda1:
    """Test the first Dirichlet eigenvalue."""

    def test_unweighted(self):
        """Test lambda_1 = pi^2 / 4 on (-1, 1)."""
        result = lambda1(allen_cahn(1.0), n=256)
        assert result.lambda1 == pytest.approx(np.pi**2 / 4, rel=1e-6)
        assert result.lambda1_n > result.lambda1_2n > result.lambda1
        assert result.semistable

    def test_muckenhoupt_bracket(self):
        """Test M = 1/2 for a = b = 1 on (-1, 1) and that lambda_1 lies in the bracket."""
        result = lambda1(allen_cahn(1.0), n=256)
        assert result.muckenhoupt_M == pytest.approx(0.5, rel=1e-8)
        assert result.in_bracket

    def test_eigenvector_positive(self, expquad_problem):
        """Test that the first eigenvector has one sign and vanishes at the ends."""
        result = lambda1(expquad_problem, n=128)
        values = result.eigenvector.values
        assert values[0] == 0.0 and values[-1] == 0.0
        assert np.all(values[1:-1] > 0)
        assert result.eigenvector_table().columns == ["x", "xi"]

    def test_dilation(self):
        """Test lambda_1 on (-2, 2) is a quarter of lambda_1 on (-1, 1)."""
        check = scaled_eigenvalue_check(allen_cahn(1.0), tau=2.0, n=256)
        assert check.holds
        assert check.ratio == pytest.approx(0.25, rel=1e-6)

    def test_dilation_needs_constant_weights(self, expquad_problem):
        """Test that the dilation check rejects weighted problems."""
        with pytest.raises(ValueError, match="constant weights"):
            scaled_eigenvalue_check(expquad_problem)

    def test_mesh_minimum(self, expquad_problem):
        """Test that meshes below 128 elements are rejected."""
        with pytest.raises(ValueError, match="128"):
            lambda1(expquad_problem, n=64)

    def test_muckenhoupt_gaussian_positive(self, expquad_problem):
        """Test that the Muckenhoupt constant is positive and brackets lambda_1."""
        assert muckenhoupt_constant(expquad_problem) > 0
        assert lambda1(expquad_problem, n=256).in_bracket


class TestAnnaBound:
    """Test the closed-form lower bound on lambda_1."""

    def test_exp_quadratic(self, expquad_problem):
        """Test inf = 1 at x = 0 for a = b = e^{x^2}, with both forms agreeing."""
        bound = anna_lower_bound(expquad_problem)
        assert bound.value == pytest.approx(1.0, abs=1e-12)
        assert bound.x_at == pytest.approx(0.0, abs=1e-12)
        assert bound.sqrt_value == pytest.approx(bound.value, abs=1e-10)

    def test_bound_below_lambda1(self):
        """Test bound <= lambda_1 for a = 1, b = e^{x^2}."""
        p = Problem(1.0, 1.0, Constant(1.0), ExpQuadratic(1.0), Quartic(1.0))
        assert anna_lower_bound(p).value <= lambda1(p, n=256).lambda1

    def test_constant_weights(self):
        """Test that constant weights give the trivial bound 0."""
        assert anna_lower_bound(allen_cahn(1.0)).value == 0.0

    def test_needs_exact_derivatives(self):
        """Test that tabulated weights are rejected."""
        nodes = np.linspace(-1.0, 1.0, 21)
        p = Problem(1.0, 1.0, Tabulated(nodes, np.exp(nodes**2)), Constant(1.0), Quartic(1.0))
        with pytest.raises(InsufficientSmoothnessError):
            anna_lower_bound(p)


class TestRadialForms:
    """Test the power-weight closed forms."""

    def test_critical_value(self):
        """Test (N - 2 + alpha)^2 / 4 = 16 for alpha = 2, beta = 0, N = 8."""
        forms = radial_closed_forms(2.0, 0.0, 8)
        assert forms.lambda1_critical == pytest.approx(16.0)
        assert forms.scaling_exponent == pytest.approx(0.0)

    def test_non_critical(self):
        """Test that alpha - beta != 2 only gives the scaling exponent."""
        forms = radial_closed_forms(0.0, 0.0, 1)
        assert forms.scaling_exponent == -2.0
        assert forms.lambda1_critical is None

    def test_invalid(self):
        """Test that the critical form needs alpha > 2 - N and N >= 1."""
        with pytest.raises(ValueError, match="alpha > 2 - N"):
            radial_closed_forms(-5.0, -7.0, 1)
        with pytest.raises(ValueError, match="at least 1"):
            radial_closed_forms(2.0, 0.0, 0)


class TestL1Certificate:
    """Test the L1 product certificate."""

    def test_gaussian_equality(self):
        """Test 1/a = b = e^{-x^2}: 1 / (16 pi) against -G''(0) = 1 / (16 pi)."""
        certificate = l1_product_certificate(ExpQuadratic(1.0), ExpQuadratic(-1.0), GAUSSIAN_WELL)
        assert certificate.norm_inv_a == pytest.approx(np.sqrt(np.pi), rel=1e-9)
        assert certificate.norm_b == pytest.approx(np.sqrt(np.pi), rel=1e-9)
        assert certificate.lhs == pytest.approx(1 / (16 * np.pi), rel=1e-8)
        assert certificate.target == pytest.approx(1 / (16 * np.pi), rel=1e-12)
        assert certificate.certified

    def test_convex_potential_trivially_certified(self):
        """Test that G''(0) >= 0 always certifies."""
        certificate = l1_product_certificate(PowerAbs(2.0, 1.0), PowerAbs(-2.0, 1.0), EvenPolynomial([0.0, 1.0]))
        assert certificate.certified

    def test_not_integrable(self):
        """Test that constant weights are not integrable on the line."""
        with pytest.raises(NonIntegrableError, match="1/a"):
            l1_product_certificate(Constant(1.0), ExpQuadratic(-1.0), Quartic(1.0))
        with pytest.raises(NonIntegrableError, match="b is not"):
            l1_product_certificate(ExpQuadratic(1.0), Constant(1.0), Quartic(1.0))


class TestUniquenessCertificate:
    """Test the route selection of the uniqueness certificate."""

    def test_closed_form_route(self, expquad_problem):
        """Test a = b = e^{x^2}: certified by the closed-form bound."""
        certificate = uniqueness_certificate(expquad_problem)
        assert certificate.certified
        assert certificate.route == "anna_bound"
        assert certificate.margin == pytest.approx(1.0)

    def test_numeric_route(self):
        """Test a = b = 1 on (-1, 1): pi^2 / 4 > 1 only numerically."""
        certificate = uniqueness_certificate(allen_cahn(1.0), n=256)
        assert certificate.certified
        assert certificate.route == "lambda1_numeric"
        assert certificate.margin == pytest.approx(np.pi**2 / 4 - 1, rel=1e-5)
        assert certificate.attempts["anna_bound"] == pytest.approx(-1.0)

    def test_long_interval_not_certified(self):
        """Test a = b = 1 on (-4, 4): lambda_1 = pi^2 / 64 < 1."""
        certificate = uniqueness_certificate(allen_cahn(4.0), n=256)
        assert not certificate.certified
        assert certificate.route == "lambda1_numeric"
        assert "below" in certificate.reason

    def test_l1_route(self):
        """Test the Gaussian pair certified through the L1 product."""
        p = Problem(3.0, 0.0, ExpQuadratic(1.0), ExpQuadratic(-1.0), GAUSSIAN_WELL)
        certificate = uniqueness_certificate(p)
        assert certificate.certified
        assert certificate.route in ("anna_bound", "L1_product")
        assert certificate.strict_margin > 0

    def test_strictness_required(self):
        """Test that a constant G'' cannot certify."""
        p = Problem(1.0, 1.0, Constant(1.0), Constant(1.0), EvenPolynomial([0.0, 1.0]))
        certificate = uniqueness_certificate(p)
        assert not certificate.certified
        assert certificate.route is None
        assert "G''" in certificate.reason

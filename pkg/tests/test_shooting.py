import numpy as np
import pytest
from scipy.special import erf

from oddsym.exceptions import NoSignChangeError
from oddsym.solve1d import default_bracket, minimize, shoot
from oddsym.weights import Constant, EvenPolynomial, ExpQuadratic, Problem

from .conftest import allen_cahn


def linear_problem(a) -> Problem:
    """G = 0, so that u solves (a u')' = 0."""
    return Problem(1.0, 1.0, a, Constant(1.0), EvenPolynomial([0.0]))


class TestShoot:
    """Test the shooting solver."""

    def test_linear_unweighted(self):
        """Test that u'' = 0 gives u(x) = x."""
        sol = shoot(linear_problem(Constant(1.0)), integrator_steps=1000)
        assert sol.method == "shooting"
        assert sol.residual_inf <= 1e-10
        np.testing.assert_allclose(sol.u.values, sol.u.x, atol=1e-9)

    def test_linear_weighted(self):
        """Test that (e^{x^2} u')' = 0 gives u(x) = erf(x) / erf(1)."""
        sol = shoot(linear_problem(ExpQuadratic(1.0)), integrator_steps=2000)
        np.testing.assert_allclose(sol.u.values, erf(sol.u.x) / erf(1.0), atol=1e-8)

    def test_agrees_with_minimizer(self):
        """Test shooting against the Newton minimizer on (-2, 2)."""
        p = allen_cahn(2.0)
        shot = shoot(p, integrator_steps=4096)
        newton = minimize(p, "odd_tanh", n=2048)
        assert shot.u.sup_distance(newton.u) <= 1e-4
        assert shot.energy == pytest.approx(newton.energy, rel=1e-4)

    def test_default_bracket_scales_with_weight(self):
        """Test s = 10 m / L * max a."""
        lo, hi = default_bracket(Problem(2.0, 1.0, Constant(3.0), Constant(1.0), EvenPolynomial([0.0])))
        assert (lo, hi) == pytest.approx((-15.0, 15.0))

    def test_no_sign_change(self):
        """Test a bracket on which phi keeps its sign."""
        with pytest.raises(NoSignChangeError, match="no sign change") as info:
            shoot(linear_problem(Constant(1.0)), slope_bracket=(2.0, 3.0), integrator_steps=100)
        assert info.value.last_iterate == (2.0, 3.0)

    def test_invalid_arguments(self):
        """Test that bad step counts and brackets are rejected."""
        p = linear_problem(Constant(1.0))
        with pytest.raises(ValueError, match="integrator_steps"):
            shoot(p, integrator_steps=1)
        with pytest.raises(ValueError, match="lo < hi"):
            shoot(p, slope_bracket=(1.0, -1.0))

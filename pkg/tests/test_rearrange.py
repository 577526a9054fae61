import numpy as np
import pytest
from scipy.integrate import quad

from oddsym.exceptions import FlatRegionError
from oddsym.rearrange import (
    MonotoneGrid,
    build_family,
    flipped,
    kinetic_energy_along_t,
    potential_energy_along_t,
    verify_odd_rearrangement,
)
from oddsym.weights import Constant, ExpQuadratic, PowerAbs, Problem, Quartic, symmetric_mesh


def quadratic_grid(n: int = 4096) -> MonotoneGrid:
    """v(x) = (x + 1)^2 / 2 - 1 on (-1, 1)."""
    x = symmetric_mesh(1.0, n)
    return MonotoneGrid(x, (x + 1) ** 2 / 2 - 1)


def identity_grid(n: int = 256) -> MonotoneGrid:
    x = symmetric_mesh(1.0, n)
    return MonotoneGrid(x, x)


class TestMonotoneGrid:
    """Test increasing grid functions."""

    def test_requires_increasing_values(self):
        """Test that a non-increasing function is rejected."""
        with pytest.raises(ValueError, match="strictly increasing"):
            MonotoneGrid([-1.0, 0.0, 1.0], [-1.0, -1.0, 1.0])

    def test_requires_symmetric_span(self):
        """Test that v(-L) = -v(L) is required."""
        with pytest.raises(ValueError, match="must span"):
            MonotoneGrid([-1.0, 0.0, 1.0], [-1.0, 0.0, 2.0])

    def test_flip_of_odd_function(self):
        """Test that an odd function is its own flip."""
        v = identity_grid()
        w = flipped(v)
        assert np.array_equal(w.nodes, v.nodes)
        assert np.array_equal(w.values, v.values)
        assert v.oddness_defect() == 0.0

    def test_flip_of_quadratic(self):
        """Test v*(x) = 1 - (1 - x)^2 / 2 for the quadratic."""
        w = flipped(quadratic_grid(64))
        np.testing.assert_allclose(w.values, 1 - (1 - w.nodes) ** 2 / 2, atol=1e-14)

    def test_kinetic_energy(self):
        """Test int (v')^2 dx = 2 for v(x) = x."""
        assert identity_grid().kinetic_energy(Constant(1.0)) == pytest.approx(2.0, rel=1e-12)


class TestRearrangementFamily:
    """Test the family v^t and its level sets."""

    def test_midpoint_is_odd_closed_form(self):
        """Test rho^(1/2) = (sqrt(2(1 + l)) - sqrt(2(1 - l))) / 2 for b = 1."""
        family = build_family(quadratic_grid(), Constant(1.0))
        lam = family.lam
        inner = np.abs(lam) <= 0.9
        expected = 0.5 * (np.sqrt(2 * (1 + lam)) - np.sqrt(2 * (1 - lam)))
        np.testing.assert_allclose(family.rho_t(0.5)[inner], expected[inner], atol=1e-6)

    @pytest.mark.parametrize("b", [Constant(1.0), ExpQuadratic(1.0)])
    def test_midpoint_is_odd(self, b):
        """Test that rho^(1/2) is odd in lambda."""
        family = build_family(quadratic_grid(1024), b, K=1025)
        rho = family.rho_t(0.5)
        assert np.max(np.abs(rho + rho[::-1])) <= 1e-10

    def test_endpoints_are_exact(self):
        """Test rho^1 = rho and rho^0 = rho*."""
        family = build_family(quadratic_grid(256), ExpQuadratic(1.0), K=257)
        assert np.array_equal(family.rho_t(1.0), family.rho)
        assert np.array_equal(family.rho_t(0.0), family.rho_star)
        with pytest.raises(ValueError, match="t must lie"):
            family.rho_t(1.5)

    def test_level_measure_is_preserved(self):
        """Test that b({-l < v^t < l}) does not depend on t."""
        family = build_family(quadratic_grid(1024), ExpQuadratic(1.0), K=1025)
        reference = family.weighted_level_measure(1.0)
        scale = family.B.total
        for t in (0.0, 0.3, 0.5, 0.8):
            np.testing.assert_allclose(family.weighted_level_measure(t), reference, rtol=0, atol=1e-8 * scale)

    def test_potential_energy_matches_direct_integral(self):
        """Test the Stieltjes sum against int G(v) dx."""
        family = build_family(quadratic_grid(), Constant(1.0))
        G = Quartic(1.0)
        expected, _ = quad(lambda x: G.eval((x + 1) ** 2 / 2 - 1), -1.0, 1.0, epsabs=1e-13)
        assert potential_energy_along_t(family, G, 1.0) == pytest.approx(expected, rel=1e-5)

    @pytest.mark.parametrize("b", [Constant(1.0), ExpQuadratic(1.0)])
    def test_potential_energy_is_invariant(self, b):
        """Test that int G(v^t) b does not depend on t."""
        family = build_family(quadratic_grid(1024), b, K=1025)
        G = Quartic(1.0)
        reference = potential_energy_along_t(family, G, 1.0)
        for t in (0.0, 0.25, 0.5):
            assert potential_energy_along_t(family, G, t) == pytest.approx(reference, rel=1e-10)

    def test_kinetic_energy_of_identity(self):
        """Test h(t) = 2 for v(x) = x and a = b = 1."""
        family = build_family(identity_grid(), Constant(1.0), K=257)
        for t in (0.0, 0.5, 1.0):
            assert kinetic_energy_along_t(family, Constant(1.0), t) == pytest.approx(2.0, rel=1e-12)

    def test_minimum_samples(self):
        """Test that fewer than 101 lambda samples are rejected."""
        with pytest.raises(ValueError, match="101"):
            build_family(identity_grid(), Constant(1.0), K=50)

    def test_flat_region(self):
        """Test that a nearly flat piece cannot be inverted."""
        v = MonotoneGrid([-1.0, -0.5, 0.0, 0.5, 1.0], [-1.0, -0.5, -0.5 + 1e-12, 0.5, 1.0])
        with pytest.raises(FlatRegionError, match="flat region"):
            build_family(v, Constant(1.0))


class TestVerifyOddRearrangement:
    """Test the kinetic-energy decrease along the rearrangement."""

    def test_expquad_weights(self, expquad_problem):
        """Test a = b = e^{x^2} with a non-odd increasing v."""
        report = verify_odd_rearrangement(quadratic_grid(1024), expquad_problem, t_points=41, K=1025)
        assert report.binding
        assert report.reason is None
        assert report.kinetic_decreases
        assert report.total_convex
        assert report.equality_consistent
        assert report.kinetic[0] == pytest.approx(report.kinetic[-1], rel=1e-9)
        assert report.kinetic[20] < report.kinetic[-1]

    def test_equality_for_odd_function(self, expquad_problem):
        """Test that h(t) is flat when v is already odd."""
        report = verify_odd_rearrangement(identity_grid(), expquad_problem, t_points=11, K=257)
        assert report.equality_detected
        assert report.equality_consistent
        assert report.oddness_defect == 0.0

    def test_non_binding_weights(self):
        """Test that the report is produced but flagged for (|x| + 1)^2 weights."""
        p = Problem(1.0, 1.0, PowerAbs(2.0, 1.0), PowerAbs(2.0, 1.0), Quartic(1.0))
        report = verify_odd_rearrangement(quadratic_grid(512), p, t_points=11, K=257)
        assert not report.binding
        assert report.reason == "(sqrt(ab))'/b is not nondecreasing: hypothesis not satisfied; theorem not applicable"

    def test_table_columns(self, expquad_problem):
        """Test the artifact table layout."""
        report = verify_odd_rearrangement(identity_grid(), expquad_problem, t_points=5, K=257)
        table = report.table()
        assert table.columns == ["t", "kinetic", "total"]
        assert table.height == 5

    def test_mismatched_problem(self):
        """Test that v must live on the problem's interval."""
        p = Problem(2.0, 1.0, Constant(1.0), Constant(1.0), Quartic(1.0))
        with pytest.raises(ValueError, match="does not match"):
            verify_odd_rearrangement(identity_grid(), p)

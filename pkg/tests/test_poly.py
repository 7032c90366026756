"""Tests for the polynomial method: acceptance polynomials, approximate degree and duals."""

import numpy as np
import pytest

from qqlab.boolfn import BooleanFunction, make_named, multilinear_coeffs
from qqlab.errors import CapExceededError, ValidationError
from qqlab.models import all_passed
from qqlab.poly import (
    DualPolynomial,
    InputDistribution,
    acceptance_polynomial,
    approx_degree,
    bs_restriction,
    chebyshev,
    chebyshev_or_witness,
    degree_sandwich,
    distinguishing_advantage,
    dual_polynomial_check,
    even_parity_distribution,
    ez_rc_degree_bound,
    k_wise_independence,
    lp_dual_polynomial,
    or_witness_check,
    symmetric_approx_degree,
    symmetrize,
    walsh_hadamard,
)
from qqlab.qsim import acceptance_probabilities, deutsch_parity, random_algorithm


class TestAcceptancePolynomial:
    """Tests for polynomials extracted from algorithms."""

    def test_deutsch_gives_parity(self):
        p = acceptance_polynomial(deutsch_parity())
        assert np.allclose(p.values(), [0, 1, 1, 0])
        assert p.degree(tol=1e-9) == 2

    @pytest.mark.parametrize("T", [0, 1, 2])
    def test_degree_at_most_twice_queries(self, T):
        alg = random_algorithm(4, T, d=2, seed=T)
        p = acceptance_polynomial(alg, strict=True)
        assert p.degree(tol=1e-9) <= 2 * T

    @pytest.mark.slow
    def test_random_sweep_matches_simulator(self, rng):
        """200 random algorithms with n <= 3, T <= 3 and d <= 2."""
        for _ in range(200):
            n, T, d = int(rng.integers(1, 4)), int(rng.integers(0, 4)), int(rng.integers(1, 3))
            kind = "phase" if rng.random() < 0.5 else "binary"
            alg = random_algorithm(n, T, d=d, kind=kind, seed=rng)
            p = acceptance_polynomial(alg)
            assert np.max(np.abs(p.values() - acceptance_probabilities(alg))) <= 1e-10
            assert p.degree(tol=1e-9) <= 2 * T

    def test_requires_boolean_alphabet(self):
        with pytest.raises(ValidationError):
            acceptance_polynomial(random_algorithm(2, 1, m=3, seed=0))


class TestApproximateDegree:
    """Tests for the approximate degree LP scan."""

    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_parity_is_maximal(self, n):
        result = approx_degree(make_named("PARITY", n=n))
        assert result.adeg == n
        assert all_passed(result.assertions)

    def test_or_two(self):
        result = approx_degree(make_named("OR", n=2))
        assert result.adeg == 1
        assert result.optima[-1] == pytest.approx(0.25, abs=1e-7)

    def test_or_four_matches_symmetric(self):
        full = approx_degree(make_named("OR", n=4))
        sym = symmetric_approx_degree(4, [0, 1, 1, 1, 1])
        assert full.adeg == sym.adeg == 2
        assert sym.optima[1] == pytest.approx(3 / 8, abs=1e-7)

    def test_witness_error_within_eps(self):
        f = make_named("MAJ", n=3)
        result = approx_degree(f)
        error = np.max(np.abs(result.witness.values() - f.table))
        assert error <= 1 / 3 + 1e-9

    def test_cap(self):
        with pytest.raises(CapExceededError):
            approx_degree(make_named("OR", n=6))

    def test_symmetric_value_count(self):
        with pytest.raises(ValidationError):
            symmetric_approx_degree(3, [0, 1, 1])

    def test_degree_sandwich(self):
        assert all_passed(degree_sandwich(make_named("OR", n=3)))


class TestUnivariate:
    """Tests for symmetrisation, Chebyshev witnesses and the derivative bound."""

    def test_symmetrize_or(self):
        q = symmetrize(multilinear_coeffs(make_named("OR", n=3)))
        assert np.allclose(q(np.arange(4)), [0, 1, 1, 1])

    def test_chebyshev(self):
        t3 = chebyshev(3)
        assert np.allclose(t3.coeffs, [0, -3, 0, 4])
        assert t3.degree == 3

    @pytest.mark.parametrize("n", [1, 4, 16, 64])
    def test_or_witness(self, n):
        q = chebyshev_or_witness(n)
        assert all_passed(or_witness_check(q, n))

    def test_ez_rc_bound(self):
        q = chebyshev_or_witness(16)
        result = ez_rc_degree_bound(q, 16, 0.0, 1.0, 1 / 3)
        assert result.bound == pytest.approx(2.0)
        assert all_passed(result.assertions)

    def test_ez_rc_hypotheses_fail(self):
        q = chebyshev_or_witness(16)
        result = ez_rc_degree_bound(q, 16, 0.5, 1.0, 1 / 3)
        assert result.bound is None
        assert not all_passed(result.assertions)

    def test_bs_restriction_of_or(self):
        g = bs_restriction(make_named("OR", n=3))
        assert np.array_equal(g.table, make_named("OR", n=3).table)

    def test_bs_restriction_of_constant(self):
        with pytest.raises(ValidationError):
            bs_restriction(BooleanFunction(n=2, table=[0, 0, 0, 0]))


class TestDualPolynomials:
    """Tests for dual polynomial certificates."""

    def test_walsh_hadamard(self):
        spectrum = walsh_hadamard([1, -1, -1, 1])
        assert np.allclose(spectrum, [0, 0, 0, 4])

    def test_parity_dual(self):
        phi, report = lp_dual_polynomial(make_named("PARITY", n=3), 3)
        assert report.ok
        assert report.correlation == pytest.approx(1.0)
        assert report.implied_adeg == 3
        assert phi.normalization == pytest.approx(1.0)

    def test_or_dual_certifies_two(self):
        _, report = lp_dual_polynomial(make_named("OR", n=4), 2)
        assert report.ok
        assert report.correlation == pytest.approx(0.75, abs=1e-6)

    def test_bad_dual_rejected(self):
        phi = DualPolynomial(n=2, values=[0.25] * 4)
        report = dual_polynomial_check(phi, make_named("PARITY", n=2), 1)
        assert not report.ok
        assert report.implied_adeg is None


class TestDistributions:
    """Tests for k-wise independence and distinguishing advantage."""

    def test_even_parity_independence(self):
        dist = even_parity_distribution(5)
        assert k_wise_independence(dist) == 4
        assert np.isclose(dist.weights.sum(), 1.0)

    def test_uniform_marginal(self):
        assert np.allclose(InputDistribution.uniform(3).marginal([1, 3]), 0.25)

    def test_normalized_tolerance(self):
        dist = InputDistribution.normalized(1, [0.5, 0.5000001])
        assert dist.weights.sum() == pytest.approx(1.0, abs=1e-15)
        with pytest.raises(ValidationError):
            InputDistribution.normalized(1, [0.5, 0.6])

    def test_low_degree_cannot_distinguish(self):
        """Degree 2T <= 4 polynomials agree on even parity and uniform at n = 5."""
        uniform = InputDistribution.uniform(5)
        even = even_parity_distribution(5)
        for seed in range(3):
            alg = random_algorithm(5, 2, seed=seed)
            assert distinguishing_advantage(alg, uniform, even) <= 1e-10

    @pytest.mark.slow
    def test_low_degree_sweep(self, rng):
        """100 random algorithms at n = 5 with 2T <= 4."""
        uniform = InputDistribution.uniform(5)
        even = even_parity_distribution(5)
        for _ in range(100):
            T = int(rng.integers(0, 3))
            kind = "phase" if rng.random() < 0.5 else "binary"
            alg = random_algorithm(5, T, d=int(rng.integers(1, 3)), kind=kind, seed=rng)
            assert distinguishing_advantage(alg, uniform, even) <= 1e-10

    def test_parity_distinguishes(self):
        """One phase query reads PARITY_2, which even parity fixes to 0."""
        advantage = distinguishing_advantage(
            deutsch_parity(), InputDistribution.uniform(2), even_parity_distribution(2)
        )
        assert advantage == pytest.approx(0.5)

"""Tests for the reflection system and the phase-estimation algorithm built from realizations."""

import numpy as np
import pytest

from qqlab.adversary import VectorRealization, connectivity_realization, or_realization, rebalance
from qqlab.dual import (
    build_reflection_system,
    dual_query_count,
    effective_spectral_gap_check,
    phase_estimation_bits,
    phase_gap_check,
    phase_gap_report,
    qpe_distribution,
    random_gap_instance,
    run_dual_algorithm,
    two_query_decomposition_check,
)
from qqlab.boolfn import BooleanFunction
from qqlab.errors import NotApplicableError, ValidationError
from qqlab.linalg import is_projector, is_unitary


# === Fixtures ===
@pytest.fixture
def or2_system():
    """Reflection system of the balanced OR_2 realization."""
    return build_reflection_system(rebalance(or_realization(2)))


class TestReflectionSystem:
    """Tests for Pi_x, Delta and R_x."""

    def test_invariants_hold(self, or2_system):
        assert or2_system.ok, [a.name for a in or2_system.assertions if not a.passed]
        assert or2_system.T == pytest.approx(np.sqrt(2))
        assert or2_system.dim == 2 * 2 * 2

    def test_delta_rank(self, or2_system):
        # inputs 01 and 11 share their first 1-bit, hence their t^+ vector
        assert is_projector(or2_system.delta)
        assert np.trace(or2_system.delta).real == pytest.approx(2.0)

    def test_reflections_are_unitary(self, or2_system):
        for x in range(4):
            assert is_unitary(or2_system.reflection(x))

    def test_pi_keeps_spectators(self, or2_system):
        diagonal = or2_system.pi_diagonal(0)
        for i in (1, 2):
            for b in (0, 1):
                assert diagonal[or2_system.index(i, b, 2)] == 1.0
        assert diagonal[or2_system.index(1, 1, 1)] == 0.0

    def test_special_state(self, or2_system):
        assert or2_system.s[or2_system.index(1, 0, 2)] == 1.0
        assert np.linalg.norm(or2_system.s) == 1.0

    def test_rejects_infeasible(self):
        w = or_realization(2)
        broken = VectorRealization(f=w.f, d=1, vectors=2 * w.vectors)
        with pytest.raises(ValidationError, match="infeasible"):
            build_reflection_system(broken)

    @pytest.mark.parametrize("value", [0, 1])
    def test_constant_function_is_not_compiled(self, value):
        constant = BooleanFunction(n=2, table=[value] * 4)
        w = VectorRealization(f=constant, d=1, vectors=np.zeros((4, 2, 1)))
        with pytest.raises(NotApplicableError, match="T = 0") as info:
            build_reflection_system(w)
        assert info.value.details == {"constant": value}

    def test_rejects_unknown_variant(self):
        with pytest.raises(ValidationError):
            build_reflection_system(or_realization(2), variant="both")

    def test_minus_variant_still_projects(self):
        system = build_reflection_system(rebalance(or_realization(2)), variant="minus")
        assert system.variant == "minus"
        assert system.assertions[0].name == "Delta projector"
        assert system.assertions[0].passed

    def test_two_query_decomposition(self, or2_system):
        for x in range(4):
            assert two_query_decomposition_check(or2_system, x).passed


class TestPhaseGap:
    """Tests for the spectral mass of s."""

    def test_each_input(self, or2_system):
        for x in range(4):
            gap = phase_gap_check(or2_system, x)
            assert gap.assertion.passed
            assert gap.value == int(x != 0)

    def test_report(self, or2_system):
        report = phase_gap_report(or2_system)
        assert report.ok
        assert len(report.results["rows"]) == 4

    def test_effective_gap_random(self, rng):
        for _ in range(25):
            pi, delta, t, theta = random_gap_instance(6, rng)
            assert effective_spectral_gap_check(pi, delta, t, theta).assertion.passed

    @pytest.mark.slow
    def test_effective_gap_many(self, rng):
        for k in range(500):
            dim = 2 + k % 7
            pi, delta, t, theta = random_gap_instance(dim, rng)
            result = effective_spectral_gap_check(pi, delta, t, theta)
            assert result.lhs <= result.rhs + 1e-9

    def test_effective_gap_needs_orthogonal_vector(self):
        delta = np.diag([1.0, 0.0])
        with pytest.raises(ValidationError):
            effective_spectral_gap_check(np.eye(2), delta, [1.0, 0.0], 0.5)


class TestPhaseEstimation:
    """Tests for the phase estimation distribution and the full algorithm."""

    def test_exact_phase_is_sharp(self):
        phi = 2 * np.pi * 3 / 8
        r = np.diag([np.exp(1j * phi), 1.0])
        dist = qpe_distribution(r, [1.0, 0.0], 3)
        assert dist.probabilities.sum() == pytest.approx(1.0)
        assert dist.mass_within(phi, 1e-6) == pytest.approx(1.0)

    def test_mixture(self):
        r = np.diag([-1.0, 1.0])
        dist = qpe_distribution(r, np.array([1.0, 1.0]) / np.sqrt(2), 2)
        assert dist.mass_within(0.0, 0.1) == pytest.approx(0.5)
        assert dist.mass_within(np.pi, 0.1) == pytest.approx(0.5)

    def test_input_validation(self):
        with pytest.raises(ValidationError):
            qpe_distribution(np.eye(2), [1.0, 0.0], 0)
        with pytest.raises(ValidationError):
            qpe_distribution(np.eye(2), [1.0, 1.0], 2)

    def test_bit_count(self):
        assert phase_estimation_bits(1.0) == 8
        assert phase_estimation_bits(np.sqrt(2)) == 8
        assert dual_query_count(1.0) == 2 * 255

    def test_bit_count_needs_positive_value(self):
        with pytest.raises(ValidationError):
            phase_estimation_bits(0.0)

    @pytest.mark.parametrize("value", [0, 1])
    def test_constant_function_run(self, value):
        constant = BooleanFunction(n=2, table=[value] * 4)
        w = VectorRealization(f=constant, d=1, vectors=np.zeros((4, 2, 1)))
        with pytest.raises(NotApplicableError):
            run_dual_algorithm(w)

    def test_or_two(self):
        report = run_dual_algorithm(rebalance(or_realization(2)))
        assert report.ok, report.failed()
        assert len(report.results["rows"]) == 4
        assert report.results["queries"] == 510

    def test_or_three(self):
        report = run_dual_algorithm(rebalance(or_realization(3)))
        assert report.ok, report.failed()

    def test_single_input(self):
        report = run_dual_algorithm(rebalance(or_realization(2)), inputs=[0])
        assert [row["x"] for row in report.results["rows"]] == [0]
        assert report.results["rows"][0]["p_correct"] >= 2 / 3

    def test_connectivity_triangle(self):
        report = run_dual_algorithm(rebalance(connectivity_realization(3)))
        assert report.ok, report.failed()

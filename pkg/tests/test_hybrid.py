"""Tests for hybrid-argument traces and query-weight certificates."""

import math

import pytest

from qqlab.boolfn import BooleanFunction, make_named
from qqlab.errors import NotApplicableError, ValidationError
from qqlab.experiments import or_hybrid_experiment
from qqlab.hybrid import (
    bs_hybrid_report,
    grover_weight_growth,
    hybrid_of_hybrids_check,
    hybrid_trace,
    or_hybrid_report,
    query_weight_average,
    query_weight_certificate,
)
from qqlab.models import all_passed
from qqlab.qsim import classical_lookup, constant_algorithm, deutsch_parity, grover_or, random_algorithm


# === Fixtures ===
@pytest.fixture
def or_algorithm():
    """Coherent OR algorithm on four bits."""
    return grover_or(4)


class TestHybridTrace:
    """Tests for single-pair traces."""

    def test_random_algorithm_obeys_progress(self):
        alg = random_algorithm(3, 4, d=2, seed=11)
        trace = hybrid_trace(alg, [0, 1, 0], [1, 1, 1])
        assert trace.ok
        assert trace.distances[0] == pytest.approx(0.0, abs=1e-12)
        assert len(trace.cross_terms) == alg.T + 1

    def test_final_distance_asserted_when_computing(self, or_algorithm):
        trace = hybrid_trace(or_algorithm, [0, 0, 0, 0], [0, 0, 1, 0], make_named("OR", n=4))
        names = [a.name for a in trace.assertions]
        assert "final distance" in names
        assert trace.ok

    def test_final_distance_skipped_for_equal_values(self, or_algorithm):
        trace = hybrid_trace(or_algorithm, [1, 0, 0, 0], [0, 0, 1, 0], make_named("OR", n=4))
        assert "final distance" not in [a.name for a in trace.assertions]

    def test_identical_inputs_rejected(self, or_algorithm):
        with pytest.raises(ValidationError):
            hybrid_trace(or_algorithm, [0, 0, 0, 0], [0, 0, 0, 0])

    def test_oracle_switch_bound(self):
        alg = random_algorithm(2, 3, seed=5)
        rows = hybrid_of_hybrids_check(alg, [0, 1], [1, 1])
        assert len(rows) == 3
        assert all_passed(rows)


class TestQueryWeights:
    """Tests for the query-weight certificate."""

    def test_deutsch_certificate(self):
        """The first query puts half the weight on index 1."""
        parity = make_named("PARITY", n=2)
        cert = query_weight_certificate(deutsch_parity(), parity, [0, 0], [1, 0])
        assert cert.value == pytest.approx(1 / math.sqrt(2))
        assert cert.average_witness_probability == pytest.approx(0.5)
        assert all_passed(cert.assertions)

    def test_requires_different_values(self):
        parity = make_named("PARITY", n=2)
        with pytest.raises(NotApplicableError):
            query_weight_certificate(deutsch_parity(), parity, [0, 0], [1, 1])

    def test_requires_computing_algorithm(self):
        f = make_named("OR", n=2)
        with pytest.raises(NotApplicableError, match="does not compute"):
            query_weight_certificate(constant_algorithm(2, 0, T=1), f, [0, 0], [1, 0])

    def test_zero_queries_average(self):
        assert query_weight_average(constant_algorithm(2, 1), [0, 0], [1, 0]) == 0.0


class TestProgressReports:
    """Tests for aggregated OR and block-sensitivity progress."""

    def test_or_report_passes(self, or_algorithm):
        report = or_hybrid_report(or_algorithm, 4)
        assert report.ok, report.failed()
        assert report.results["implied_lower_bound"] == pytest.approx(2 / 6)
        assert report.results["progress"][0] == pytest.approx(0.0, abs=1e-12)

    def test_or_report_flags_constant_algorithm(self):
        report = or_hybrid_report(constant_algorithm(4, 0), 4)
        assert not report.ok
        assert "final progress" in report.failed()
        assert any("does not compute" in note for note in report.notes)

    @pytest.mark.parametrize("n", [4, 8])
    def test_or_experiment_on_grover_or(self, n):
        report = or_hybrid_experiment(n)
        assert report.ok, report.failed()
        assert report.results["progress"][0] == pytest.approx(0.0, abs=1e-12)
        assert min(report.results["query_weight_sums"]) >= 1 / 6 - 1e-9
        assert any(a.name.startswith("Grover query weight") for a in report.assertions)

    def test_or_report_checks_n(self, or_algorithm):
        with pytest.raises(ValidationError):
            or_hybrid_report(or_algorithm, 8)

    def test_bs_report_on_lookup(self):
        f = make_named("AND_OR", n=4)
        report = bs_hybrid_report(classical_lookup(f), f)
        assert report.ok, report.failed()
        assert report.results["s"] >= 2

    def test_bs_report_constant(self):
        f = BooleanFunction(n=2, table=[1, 1, 1, 1], name="ONE")
        report = bs_hybrid_report(constant_algorithm(2, 1), f)
        assert report.results["s"] == 0
        assert report.notes


class TestGroverWeights:
    """Tests for the growth of Grover query weights on single-marked inputs."""

    @pytest.mark.parametrize("n", [4, 8, 16])
    def test_within_factor_three(self, n):
        rows = grover_weight_growth(n)
        assert all_passed(rows), [a.name for a in rows if not a.passed]
        assert len(rows) == 2 * n * math.floor(math.sqrt(n) / 2)

    def test_first_query_is_uniform(self):
        rows = grover_weight_growth(16)
        assert rows[0].measured == pytest.approx(1 / 16)

    def test_second_query_grows(self):
        rows = grover_weight_growth(16)
        second = [a for a in rows if a.name == "Grover query weight t=2 (e_1)"]
        assert second[0].measured == pytest.approx(math.sin(3 * math.asin(1 / 4)) ** 2)

    def test_needs_room_for_one_query(self):
        with pytest.raises(ValidationError):
            grover_weight_growth(2)

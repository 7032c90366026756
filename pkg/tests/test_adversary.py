"""Tests for adversary certificates, hardness graphs, vector realizations and the dual SDP."""

import math

import numpy as np
import pytest
from inline_snapshot import snapshot

from qqlab.adversary import (
    AdversaryCertificate,
    VectorRealization,
    adversary_progress_check,
    adversary_ratio,
    ambainis_bound,
    connectivity_cycle_graph,
    connectivity_realization,
    connectivity_value_rows,
    dual_feasibility,
    hardness_graph_certificate,
    negate_certificate,
    negate_realization,
    or_adversary,
    or_hardness_graph,
    or_realization,
    principal_eigenvector,
    puncture,
    realization_check,
    realization_from_gram,
    realization_report,
    rebalance,
    solve_dual_sdp,
    ss06_check,
    weak_duality_check,
)
from qqlab.boolfn import compose, make_named
from qqlab.errors import CapExceededError, ValidationError
from qqlab.models import all_passed
from qqlab.qsim import grover, grover_or
from qqlab.settings import settings


class TestCertificates:
    """Tests for adversary matrices and their ratio."""

    @pytest.mark.parametrize("n", [1, 4, 9, 16])
    def test_or_value_is_sqrt_n(self, n):
        value = adversary_ratio(or_adversary(n))
        assert value.norm == pytest.approx(math.sqrt(n))
        assert value.max_punctured_norm == pytest.approx(1.0)
        assert value.value == pytest.approx(math.sqrt(n))
        assert value.implied_lower_bound == pytest.approx(math.sqrt(n) / 36)

    def test_rejects_asymmetric(self, or2):
        with pytest.raises(ValidationError, match="symmetric"):
            AdversaryCertificate(f=or2, support=(0, 1), matrix=np.array([[0, 1.0], [0, 0]]))

    def test_rejects_same_value_pairs(self, or2):
        with pytest.raises(ValidationError, match="vanish"):
            AdversaryCertificate(f=or2, support=(1, 2), matrix=np.array([[0, 1.0], [1.0, 0]]))

    def test_puncture(self):
        cert = or_adversary(3)
        gamma_2 = puncture(cert, 2)
        # only the pair (0, e_2) differs in coordinate 2
        assert gamma_2.sum() == pytest.approx(2.0)
        with pytest.raises(ValidationError):
            puncture(cert, 4)

    def test_principal_eigenvector_of_or(self):
        principal = principal_eigenvector(or_adversary(4))
        assert principal.eigenvalue == pytest.approx(2.0)
        assert principal.multiplicity == 1
        assert principal.distribution[0] == pytest.approx(0.5)
        assert principal.distribution.sum() == pytest.approx(1.0)

    def test_negated_certificate_is_and(self):
        cert = negate_certificate(or_adversary(3), complement_inputs=True)
        assert cert.f.name == "AND_3"
        assert cert.f == make_named("AND", n=3)
        assert adversary_ratio(cert).value == pytest.approx(math.sqrt(3))

    @pytest.mark.parametrize("T", [0, 1, 2])
    def test_progress_check_with_grover(self, T):
        report = adversary_progress_check(grover(4, T), or_adversary(4))
        assert report.ok, report.failed()
        assert report.results["deltas"][0] == pytest.approx(0.0, abs=1e-9)

    def test_progress_check_with_or_algorithm(self):
        report = adversary_progress_check(grover_or(4), or_adversary(4))
        assert report.ok, report.failed()


class TestHardnessGraphs:
    """Tests for the Ambainis bound and the SS06 norm bound."""

    def test_or_graph(self):
        result = ambainis_bound(or_hardness_graph(9), make_named("OR", n=9))
        assert result.value == pytest.approx(3.0)
        assert result.min_degree_product == 9
        assert result.max_punctured_product == 1
        assert all_passed(result.assertions)

    def test_isolated_vertex_is_vacuous(self):
        graph = or_hardness_graph(3).model_copy(update={"zeros": [0, 7]})
        result = ambainis_bound(graph)
        assert result.value is None
        assert result.notes

    def test_connectivity_cycles(self):
        graph = connectivity_cycle_graph(6)
        f = make_named("CONNECTIVITY", v=6)
        assert all(f(x) == 0 for x in graph.zeros)
        assert all(f(y) == 1 for y in graph.ones)
        assert len(graph.zeros) == 10
        result = ambainis_bound(graph, f)
        assert result.value > 1
        assert all_passed(result.assertions)

    def test_cycle_graph_needs_even_v(self):
        with pytest.raises(ValidationError):
            connectivity_cycle_graph(7)

    def test_hardness_certificate_is_adjacency(self):
        graph = or_hardness_graph(4)
        cert = hardness_graph_certificate(graph, make_named("OR", n=4))
        assert adversary_ratio(cert).value == pytest.approx(2.0)

    def test_ss06(self, rng):
        a = (rng.random((8, 8)) < 0.4).astype(float)
        a = np.triu(a, 1)
        a = a + a.T
        assert ss06_check(a).passed
        with pytest.raises(ValidationError):
            ss06_check(0.5 * a)


class TestRealizations:
    """Tests for vector realizations of the dual adversary."""

    @pytest.mark.parametrize("n", [1, 2, 5])
    def test_or_realization(self, n):
        check = realization_check(or_realization(n))
        assert check.feasible
        assert check.T0 == pytest.approx(n)
        assert check.T1 == pytest.approx(1.0)

    def test_rebalance_reaches_geometric_mean(self):
        balanced = realization_check(rebalance(or_realization(9)))
        assert balanced.feasible
        assert balanced.T == pytest.approx(3.0)
        assert balanced.T0 == pytest.approx(balanced.T1)

    def test_infeasible_pairs_reported(self):
        w = or_realization(3)
        broken = VectorRealization(f=w.f, d=1, vectors=w.vectors * 0.5)
        check = realization_check(broken)
        assert not check.feasible
        assert check.violation_count == 7
        assert check.max_deviation == pytest.approx(0.75)

    def test_feasibility_tolerance_follows_settings(self, monkeypatch):
        w = or_realization(3)
        nudged = VectorRealization(f=w.f, d=1, vectors=w.vectors * (1 + 1e-6))
        assert not realization_check(nudged).feasible
        monkeypatch.setattr(settings, "identity_tol", 1e-4)
        assert realization_check(nudged).feasible
        assert realization_report(nudged, balance=False).ok

    def test_shape_validation(self, or2):
        with pytest.raises(ValidationError):
            VectorRealization(f=or2, d=2, vectors=np.zeros((4, 2, 1)))

    def test_negated_realization_is_and(self):
        w = negate_realization(or_realization(3), complement_inputs=True)
        check = realization_check(w)
        assert w.f == make_named("AND", n=3)
        assert check.feasible
        assert check.T1 == pytest.approx(3.0)
        assert check.T0 == pytest.approx(1.0)

    @pytest.mark.parametrize("v", [3, 4, 5])
    def test_connectivity_realization(self, v):
        w = connectivity_realization(v)
        check = realization_check(w)
        assert check.feasible, check.violations
        assert all_passed(connectivity_value_rows(check, v))

    def test_connectivity_vertex_range(self):
        with pytest.raises(ValidationError):
            connectivity_realization(2)

    def test_gram_round_trip(self):
        w = or_realization(3)
        rebuilt = realization_from_gram([w.gram(i) for i in range(1, 4)], w.f)
        assert realization_check(rebuilt).feasible
        for i in range(1, 4):
            assert np.allclose(rebuilt.gram(i), w.gram(i))

    def test_weak_duality(self):
        assert weak_duality_check(or_adversary(4), or_realization(4)).passed

    def test_report_layout(self):
        report = realization_report(or_realization(2))
        assert report.parameters == snapshot({"f": "OR_2", "n": 2, "d": 1})
        assert [a.name for a in report.assertions] == snapshot(
            ["feasibility", "feasibility after rebalance", "balanced value"]
        )

    def test_report_rebalances(self):
        report = realization_report(or_realization(4), balance=True)
        assert report.ok
        assert report.results["balanced_T"] == pytest.approx(2.0)


class TestDualSDP:
    """Tests for the dual adversary SDP."""

    def test_realization_grams_are_feasible(self):
        w = or_realization(2)
        check = dual_feasibility([w.gram(i) for i in (1, 2)], w.f)
        assert check.feasible
        assert check.objective == pytest.approx(2.0)

    def test_negative_matrix_not_psd(self, or2):
        w = or_realization(2)
        matrices = [w.gram(1), -np.eye(4)]
        assert not dual_feasibility(matrices, or2).feasible

    @pytest.mark.parametrize("name", ["OR", "AND"])
    def test_two_bit_value(self, name):
        result = solve_dual_sdp(make_named(name, n=2))
        assert result.value == pytest.approx(math.sqrt(2), abs=1e-3)
        assert result.feasibility.feasible
        if result.primal_certificate_value is not None:
            assert result.primal_certificate_value <= result.dual_certificate_value + 1e-6

    @pytest.mark.slow
    def test_and_of_ors(self):
        f = compose(make_named("AND", n=2), make_named("OR", n=2))
        result = solve_dual_sdp(f)
        assert result.value == pytest.approx(2.0, abs=5e-3)

    def test_cap(self):
        with pytest.raises(CapExceededError):
            solve_dual_sdp(make_named("OR", n=5))

"""Tests for Boolean functions, block sensitivity and decision trees."""

import numpy as np
import pytest

from qqlab.boolfn import (
    BooleanFunction,
    MultilinearPolynomial,
    Relation,
    bits_to_index,
    block_sensitivity,
    compose,
    deterministic_query_complexity,
    exact_degree,
    index_to_bits,
    input_bits,
    make_named,
    multilinear_coeffs,
    rubinstein_inner,
    vertices_for_edges,
)
from qqlab.errors import CapExceededError, ValidationError


class TestEncoding:
    """Tests for the bit-order conventions."""

    def test_coordinate_one_is_least_significant(self):
        assert bits_to_index([1, 0, 0]) == 1
        assert bits_to_index([0, 0, 1]) == 4
        assert index_to_bits(6, 3) == (0, 1, 1)

    def test_input_bits_columns(self):
        bits = input_bits(3)
        assert bits.shape == (8, 3)
        assert list(bits[5]) == [1, 0, 1]

    def test_evaluate_by_bits_and_index(self, parity3):
        assert parity3([1, 1, 0]) == 0
        assert parity3([1, 1, 1]) == 1
        assert parity3(7) == 1

    def test_evaluate_out_of_range(self, or2):
        with pytest.raises(ValidationError):
            or2.evaluate(4)


class TestBooleanFunction:
    """Tests for the truth table model."""

    def test_rejects_wrong_length(self):
        with pytest.raises(ValueError):
            BooleanFunction(n=2, table=[0, 1, 1])

    def test_rejects_non_boolean_entries(self):
        with pytest.raises(ValueError):
            BooleanFunction(n=1, table=[0, 2])

    def test_negate_and_describe(self, or2):
        neg = or2.negate()
        assert neg.name == "NOT_OR_2"
        assert list(neg.table) == [1, 0, 0, 0]
        assert or2.describe() == {
            "name": "OR_2", "n": 2, "ones": 3, "zeros": 1, "table": "0111"
        }

    def test_equality_ignores_name(self, or2):
        assert or2 == BooleanFunction(n=2, table=[0, 1, 1, 1])

    def test_preimage(self, and2):
        assert list(and2.preimage(1)) == [3]


class TestNamedFamilies:
    """Tests for make_named."""

    @pytest.mark.parametrize("n", [1, 2, 3, 5])
    def test_or_and_parity(self, n):
        weight = input_bits(n).sum(axis=1)
        assert np.array_equal(make_named("or", n=n).table, weight > 0)
        assert np.array_equal(make_named("AND", n=n).table, weight == n)
        assert np.array_equal(make_named("parity", n=n).table, weight % 2)

    def test_majority_needs_odd_n(self):
        assert make_named("MAJ", n=3)([1, 1, 0]) == 1
        with pytest.raises(ValidationError):
            make_named("MAJ", n=4)

    def test_connectivity_triangle(self):
        """On three vertices the graph is connected iff at least two edges are present."""
        f = make_named("CONNECTIVITY", v=3)
        assert f.name == "CONNECTIVITY_v3"
        assert f.n == 3
        assert np.array_equal(f.table, input_bits(3).sum(axis=1) >= 2)

    def test_connectivity_path_on_four_vertices(self):
        f = make_named("CONNECTIVITY", v=4)
        # edges in order 12,13,14,23,24,34; the path 1-2-3-4 uses 12,23,34
        assert f([1, 0, 0, 1, 0, 1]) == 1
        assert f([1, 1, 0, 1, 0, 0]) == 0

    def test_vertices_for_edges(self):
        assert vertices_for_edges(6) == 4
        with pytest.raises(ValidationError):
            vertices_for_edges(5)

    def test_and_or_is_composition(self):
        composed = compose(make_named("AND", n=2), make_named("OR", n=2))
        assert make_named("AND_OR", n=4) == composed
        assert composed([1, 0, 0, 0]) == 0
        assert composed([1, 0, 0, 1]) == 1

    def test_unknown_family(self):
        with pytest.raises(ValidationError, match="unknown function family"):
            make_named("XOR_TREE", n=2)

    def test_rubinstein_needs_even_square(self):
        with pytest.raises(ValidationError):
            make_named("RUBINSTEIN", n=9)

    def test_rubinstein_inner_pairs(self):
        """Ones sit on the consecutive pairs (1,2) and (3,4), never straddling them."""
        g = rubinstein_inner(4)
        assert list(g.preimage(1)) == [3, 12]
        assert g([1, 1, 0, 0]) == 1
        assert g([0, 1, 1, 0]) == 0

    def test_search_relation(self):
        rel = make_named("SEARCH", n=2, m=2)
        assert isinstance(rel, Relation)
        assert rel.labels([1, 0]) == frozenset({1})
        assert rel.labels([0, 0]) == frozenset()

    def test_collision_relation(self):
        rel = make_named("COLLISION", n=3, m=2)
        assert (1, 3) in rel.labels([0, 1, 0])
        assert rel.size == 8


class TestPolynomials:
    """Tests for the multilinear representation."""

    def test_parity_coefficients(self):
        coeffs = multilinear_coeffs(make_named("PARITY", n=2)).coefficients()
        assert coeffs == {
            frozenset({1}): 1.0, frozenset({2}): 1.0, frozenset({1, 2}): -2.0
        }

    @pytest.mark.parametrize("name,n,degree", [("OR", 3, 3), ("PARITY", 4, 4), ("AND", 2, 2)])
    def test_exact_degree(self, name, n, degree):
        assert exact_degree(make_named(name, n=n)) == degree

    def test_constant_has_degree_zero(self):
        assert exact_degree(BooleanFunction(n=3, table=[1] * 8)) == 0

    def test_values_round_trip(self, rng):
        values = rng.normal(size=8)
        p = MultilinearPolynomial.from_values(3, values)
        assert np.allclose(p.values(), values)
        assert np.isclose(p.evaluate([1, 0, 1]), values[5])


class TestBlockSensitivity:
    """Tests for exact block sensitivity."""

    def test_or(self):
        result = block_sensitivity(make_named("OR", n=8))
        assert result.s == 8
        assert result.witness == (0,) * 8
        assert result.classes == [list(range(1, 9))]

    def test_parity(self):
        assert block_sensitivity(make_named("PARITY", n=6)).s == 6

    def test_majority(self):
        result = block_sensitivity(make_named("MAJ", n=3))
        assert result.s == 2
        assert all(len(b) == 1 for b in result.blocks)

    def test_blocks_are_disjoint_and_sensitive(self):
        f = make_named("AND_OR", n=4)
        result = block_sensitivity(f)
        seen = set()
        x = bits_to_index(result.witness)
        for block in result.blocks:
            assert not seen & set(block)
            seen |= set(block)
            flipped = x ^ sum(1 << (i - 1) for i in block)
            assert f(flipped) != f(x)

    @pytest.mark.slow
    def test_rubinstein(self):
        assert block_sensitivity(make_named("RUBINSTEIN", n=16)).s == 8


class TestDecisionTrees:
    """Tests for the exact deterministic query complexity search."""

    def test_or_is_evasive(self, or3):
        depth, tree = deterministic_query_complexity(or3)
        assert depth == 3
        assert tree.depth == 3

    def test_tree_computes_function(self):
        f = make_named("AND_OR", n=4)
        depth, tree = deterministic_query_complexity(f)
        assert depth <= 4
        for x, bits in enumerate(input_bits(4)):
            assert tree.evaluate(bits) == f(x)

    def test_dictator(self):
        f = BooleanFunction(n=3, table=[b[1] for b in input_bits(3)])
        depth, tree = deterministic_query_complexity(f)
        assert depth == 1
        assert tree.index == 2
        assert "x2?" in tree.render()

    def test_constant(self):
        depth, tree = deterministic_query_complexity(BooleanFunction(n=2, table=[0] * 4))
        assert depth == 0
        assert tree.is_leaf

    def test_cap(self):
        with pytest.raises(CapExceededError):
            deterministic_query_complexity(make_named("OR", n=5))

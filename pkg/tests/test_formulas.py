import pytest
from hypothesis import given
from hypothesis import strategies as st

from trunkqbf import (
    Clause,
    Matrix,
    Prefix,
    QbfInstance,
    ground_truth,
    is_tautological,
    matrix_of,
    primal_graph,
    qparity,
    remove_tautologies,
    restrict,
)

from _util import edge_set


def literals():
    return st.integers(min_value=1, max_value=6).flatmap(
        lambda v: st.sampled_from([v, -v])
    )


def clauses():
    return st.lists(literals(), max_size=5).map(lambda ls: Clause(tuple(ls)))


def matrices():
    return st.lists(clauses(), max_size=6).map(lambda cs: Matrix(tuple(cs)))


class TestClause:
    def test_canonical_order_puts_negative_first(self):
        assert Clause((2, -1, 1)).lits == (-1, 1, 2)

    def test_duplicates_collapse(self):
        assert Clause((3, 3, -2, -2)).lits == (-2, 3)

    def test_equality_is_canonical(self):
        assert Clause((1, 2)) == Clause((2, 1))
        assert hash(Clause((1, 2))) == hash(Clause((2, 1)))

    def test_rejects_zero_literal(self):
        with pytest.raises(ValueError):
            Clause((1, 0))

    def test_double_negation_is_identity(self):
        lit = -4
        assert -(-lit) == lit


class TestTautologies:
    def test_both_polarities(self):
        assert is_tautological(Clause((1, -1, 2)))

    def test_plain_clause(self):
        assert not is_tautological(Clause((1, 2)))

    def test_empty_clause(self):
        assert not is_tautological(Clause(()))

    def test_remove_tautologies(self):
        m = matrix_of((1, -1), (2,))
        assert remove_tautologies(m) == matrix_of((2,))

    def test_remove_tautologies_empty(self):
        assert remove_tautologies(Matrix(())) == Matrix(())

    def test_remove_tautologies_no_change(self):
        m = matrix_of((1, 2), (-1, 2))
        assert remove_tautologies(m) == m


class TestRestrict:
    def test_satisfied_clause_removed_falsified_literal_deleted(self):
        m = matrix_of((1,), (-1, 2))
        assert restrict(m, {1: 1}) == matrix_of((2,))

    def test_falsified_unit_leaves_empty_clause(self):
        assert restrict(matrix_of((1,)), {1: 0}) == matrix_of(())

    def test_qparity2_branch(self):
        # Setting x1 = 0 keeps the unit (-z1) plus the u/z2 equality and
        # the xor block untouched.
        m = qparity(2).matrix
        expected = matrix_of(
            (-4,),
            (3, -5),
            (-3, 5),
            (-5, 2, 4),
            (5, -2, 4),
            (5, 2, -4),
            (-5, -2, -4),
        )
        assert restrict(m, {1: 0}) == expected

    @given(matrices(), st.dictionaries(st.integers(1, 3), st.integers(0, 1)),
           st.dictionaries(st.integers(4, 6), st.integers(0, 1)))
    def test_composition_on_disjoint_domains(self, m, a, b):
        assert restrict(restrict(m, a), b) == restrict(m, {**a, **b})

    @given(matrices(), st.dictionaries(st.integers(1, 6), st.integers(0, 1)))
    def test_never_creates_tautologies(self, m, a):
        clean = remove_tautologies(m)
        assert remove_tautologies(restrict(clean, a)) == restrict(clean, a)


class TestGroundTruth:
    def test_empty_matrix_is_true(self):
        assert ground_truth(Matrix(())) is True

    def test_empty_clause_is_false(self):
        assert ground_truth(matrix_of(())) is False

    def test_variables_left_is_an_error(self):
        with pytest.raises(ValueError):
            ground_truth(matrix_of((1,)))


class TestPrimalGraph:
    def test_qparity5_matches_known_graph(self):
        q = qparity(5)
        adj = primal_graph(q)
        u, z = 6, {i: 6 + i for i in range(1, 6)}
        expected = {(i, z[i]) for i in range(1, 6)}
        expected |= {tuple(sorted((z[i], z[i + 1]))) for i in range(1, 5)}
        expected |= {tuple(sorted((i + 1, z[i]))) for i in range(1, 5)}
        expected.add(tuple(sorted((u, z[5]))))
        assert edge_set(adj) == {tuple(sorted(e)) for e in expected}
        assert u in adj[z[5]]
        assert 2 not in adj[1]

    def test_empty_matrix_is_edgeless_on_prefix_variables(self):
        q = QbfInstance(Prefix((("e", (1, 2, 3)),)), Matrix(()))
        adj = primal_graph(q)
        assert set(adj) == {1, 2, 3}
        assert all(not ns for ns in adj.values())

    def test_one_clause_forms_a_clique(self):
        q = QbfInstance(Prefix((("e", (1, 2, 3)),)), matrix_of((1, 2, 3)))
        assert edge_set(primal_graph(q)) == {(1, 2), (1, 3), (2, 3)}

    @given(matrices())
    def test_symmetric_and_bounded(self, m):
        q = QbfInstance(Prefix((("e", tuple(range(1, 7))),)), m)
        adj = primal_graph(q)
        for u, ns in adj.items():
            for v in ns:
                assert u in adj[v]
        assert 2 * len(edge_set(adj)) <= sum(len(c) ** 2 for c in m.clauses)


class TestCanonicalEncoding:
    @given(st.lists(st.lists(literals(), max_size=4), max_size=5))
    def test_construction_is_order_insensitive(self, raw):
        m1 = Matrix(tuple(Clause(tuple(c)) for c in raw))
        m2 = Matrix(tuple(Clause(tuple(reversed(c))) for c in reversed(raw)))
        assert m1 == m2
        assert m1.encoding() == m2.encoding()

    def test_reencoding_is_stable(self):
        m = matrix_of((2, 1), (1,), (-2, 1))
        again = Matrix(tuple(Clause(c.lits) for c in m.clauses))
        assert again.encoding() == m.encoding()


class TestPrefix:
    def test_adjacent_same_quantifier_blocks_merge(self):
        p = Prefix((("e", (1,)), ("e", (2,)), ("a", (3,))))
        assert p.blocks == (("e", (1, 2)), ("a", (3,)))

    def test_remove_collapses_blocks(self):
        p = Prefix((("e", (1,)), ("a", (2,)), ("e", (3,))))
        assert p.remove((2,)).blocks == (("e", (1, 3)),)

    def test_duplicate_variable_rejected(self):
        with pytest.raises(ValueError):
            Prefix((("e", (1,)), ("a", (1,))))

    def test_instance_requires_quantified_matrix(self):
        with pytest.raises(ValueError):
            QbfInstance(Prefix((("e", (1,)),)), matrix_of((2,)))

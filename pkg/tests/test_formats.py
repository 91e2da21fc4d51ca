import io
import json

import pytest

from trunkqbf import (
    Matrix,
    ParseError,
    Prefix,
    QbfInstance,
    TraceEvent,
    is_tautological,
    matrix_of,
    parse_btd,
    parse_poset,
    parse_qdimacs,
    poset_from_pairs,
    qparity,
    qparity_td,
    random_instance,
    single_bag_td,
    trivial_poset,
    write_btd,
    write_poset,
    write_qdimacs,
    write_trace,
)


class TestQdimacsParsing:
    def test_minimal_instance(self):
        q = parse_qdimacs("p cnf 1 1\ne 1 0\n1 0\n")
        assert q == QbfInstance(Prefix((("e", (1,)),)), matrix_of((1,)))

    def test_comments_and_blank_lines(self):
        q = parse_qdimacs("c hello\n\np cnf 2 1\nc mid\na 1 2 0\n1 -2 0\n")
        assert q.prefix.blocks == (("a", (1, 2)),)

    def test_adjacent_same_quantifier_lines_merge(self):
        q = parse_qdimacs("p cnf 3 0\ne 1 0\ne 2 0\na 3 0\n")
        assert q.prefix.blocks == (("e", (1, 2)), ("a", (3,)))

    def test_free_variables_become_outermost_existentials(self):
        q = parse_qdimacs("p cnf 2 1\na 1 0\n1 2 0\n")
        assert q.prefix.blocks == (("e", (2,)), ("a", (1,)))

    def test_duplicate_literals_collapse(self):
        q = parse_qdimacs("p cnf 1 1\ne 1 0\n1 1 0\n")
        assert q.matrix == matrix_of((1,))

    def test_tautological_clause_retained(self):
        q = parse_qdimacs("p cnf 1 1\ne 1 0\n1 -1 0\n")
        assert len(q.matrix.clauses) == 1
        assert is_tautological(q.matrix.clauses[0])

    @pytest.mark.parametrize(
        "text,line",
        [
            ("p cnf x 1\ne 1 0\n1 0\n", 1),               # malformed header
            ("p cnf 1 1\ne 1 0\n2 0\n", 3),               # variable out of range
            ("p cnf 1 1\ne 1 0\n1\n", 3),                 # missing clause terminator
            ("p cnf 2 0\ne 1 2\n", 2),                    # missing quantifier terminator
            ("p cnf 2 0\ne 1 0\na 1 0\n", 3),             # quantified twice
            ("e 1 0\n", 1),                               # content before header
            ("p cnf 1 2\ne 1 0\n1 0\n", 1),               # clause count mismatch
            ("p cnf 2 0\ne 3 0\n", 2),                    # quantified var out of range
        ],
    )
    def test_rejections_name_the_line(self, text, line):
        with pytest.raises(ParseError) as info:
            parse_qdimacs(text)
        assert info.value.line == line
        assert f"line {line}:" in str(info.value)


class TestQdimacsWriting:
    def test_round_trip_of_generated_instances(self):
        for n in range(2, 6):
            q = qparity(n)
            assert parse_qdimacs(write_qdimacs(q)) == q

    def test_round_trip_of_random_instances(self):
        for seed in range(60):
            q = random_instance(seed, 2 + seed % 9, seed % 12, 1 + seed % 3, 1 + seed % 4)
            assert parse_qdimacs(write_qdimacs(q)) == q

    def test_empty_matrix(self):
        q = QbfInstance(Prefix((("e", (1, 2)),)), Matrix(()))
        text = write_qdimacs(q)
        assert text.startswith("p cnf 2 0\n")
        assert parse_qdimacs(text) == q

    def test_empty_clause_round_trips(self):
        q = QbfInstance(Prefix((("e", (1,)),)), matrix_of(()))
        assert parse_qdimacs(write_qdimacs(q)) == q

    def test_byte_deterministic(self):
        a = write_qdimacs(qparity(3))
        b = write_qdimacs(qparity(3))
        assert a == b
        assert a == write_qdimacs(parse_qdimacs(a))
        assert a.endswith("\n") and "\r" not in a


class TestBtd:
    def test_round_trip(self):
        for make in (lambda: qparity_td(2), lambda: qparity_td(5), lambda: single_bag_td(qparity(3))):
            td = make()
            assert parse_btd(write_btd(td)) == td

    def test_byte_deterministic(self):
        text = write_btd(qparity_td(4))
        assert text == write_btd(parse_btd(text))

    def test_single_node(self):
        from trunkqbf import TrunkTreeDecomposition

        td = TrunkTreeDecomposition({1: ()}, {}, 1, (1,))
        assert parse_btd(write_btd(td)) == td

    def test_sparse_node_ids_round_trip(self):
        from trunkqbf import TrunkTreeDecomposition

        td = TrunkTreeDecomposition({2: (), 5: (1,), 9: ()}, {2: 5, 5: 9}, 9, (2, 5, 9))
        assert parse_btd(write_btd(td)) == td

    @pytest.mark.parametrize(
        "text,fragment",
        [
            # trunk t 3 1 skips node 2 on the path
            ("s btd 3 0 0\nb 1\nb 2\nb 3\ne 2 1\ne 3 2\nr 3\nt 3 1\n", "trunk"),
            ("s btd 2 0 0\nb 1\nb 1\ne 2 1\nr 2\nt 1 2\n", "duplicate node"),
            ("s btd 3 0 0\nb 1\nb 2\nb 3\ne 1 2\ne 2 1\nr 3\nt 3\n", "cycle"),
            ("s btd 2 1 2\nb 1\nb 2 1 2\ne 2 1\nr 2\nt 1 2\n", "header allows"),
            ("s btd 2 0 0\nb 1\nb 2\ne 2 1\nr 2\n", "missing trunk"),
            ("s btd 3 0 0\nb 1\nb 2\nb 3\ne 3 1\ne 2 1\nr 3\nt 2 3\n", "two parents"),
            ("b 1\n", "before 's btd' header"),
            ("s btd 2 0 0\nb 1\nb 2\nr 2\nt 1 2\n", "no parent"),
        ],
    )
    def test_rejections(self, text, fragment):
        with pytest.raises(ParseError) as info:
            parse_btd(text)
        assert fragment in str(info.value)

    def test_multiple_roots_rejected(self):
        text = "s btd 3 0 0\nb 1\nb 2\nb 3\ne 3 1\ne 3 2\nr 1\nt 2 3\n"
        with pytest.raises(ParseError) as info:
            parse_btd(text)
        assert "root" in str(info.value)


class TestPosetFiles:
    def test_zero_generators_is_the_identity_relation(self):
        prefix = qparity(2).prefix
        d = parse_poset("p dep 5\n", prefix)
        assert all(d.dep(v) == {v} for v in prefix.variables)
        assert d != trivial_poset(prefix)

    def test_single_pair(self):
        prefix = qparity(2).prefix
        d = parse_poset("p dep 5\nd 1 3\n", prefix)
        assert d.dep(3) == {1, 3}

    def test_prefix_inconsistent_pair_names_the_line(self):
        prefix = qparity(2).prefix
        with pytest.raises(ParseError) as info:
            parse_poset("p dep 5\nd 3 1\n", prefix)
        assert info.value.line == 2
        assert "prefix-consistent" in str(info.value)

    def test_round_trip_trivial_posets(self):
        for n in (2, 3, 4):
            prefix = qparity(n).prefix
            d = trivial_poset(prefix)
            assert parse_poset(write_poset(d), prefix) == d

    def test_round_trip_sparse_poset(self):
        prefix = qparity(2).prefix
        d = poset_from_pairs(prefix.variables, [(1, 3), (3, 4)])
        assert parse_poset(write_poset(d), prefix) == d

    def test_closure_then_write_is_idempotent(self):
        prefix = qparity(3).prefix
        d = poset_from_pairs(prefix.variables, [(1, 4), (4, 5), (2, 4)])
        text = write_poset(d)
        assert write_poset(parse_poset(text, prefix)) == text

    def test_unquantified_variable_rejected(self):
        prefix = Prefix((("e", (1, 2)),))
        with pytest.raises(ParseError):
            parse_poset("p dep 9\nd 1 9\n", prefix)


def mutate_token(text, index, replacement):
    tokens_seen = 0
    out_lines = []
    for line in text.splitlines():
        if line.startswith("c"):
            out_lines.append(line)
            continue
        tokens = line.split()
        for i in range(len(tokens)):
            if tokens_seen == index:
                tokens[i] = replacement
            tokens_seen += 1
        out_lines.append(" ".join(tokens))
    return "\n".join(out_lines) + "\n", tokens_seen


class TestSingleTokenCorruptions:
    """Replacing any one token with junk must be rejected with a
    diagnostic that names a line."""

    def _count_tokens(self, text):
        return sum(len(l.split()) for l in text.splitlines() if not l.startswith("c"))

    def test_qdimacs_rejects_junk_in_every_position(self):
        text = write_qdimacs(qparity(2))
        total = self._count_tokens(text)
        for index in range(total):
            corrupted, _ = mutate_token(text, index, "x")
            with pytest.raises(ParseError) as info:
                parse_qdimacs(corrupted)
            assert info.value.line >= 1

    def test_btd_rejects_junk_in_every_position(self):
        text = write_btd(qparity_td(2))
        total = self._count_tokens(text)
        for index in range(total):
            corrupted, _ = mutate_token(text, index, "x")
            with pytest.raises(ParseError) as info:
                parse_btd(corrupted)
            assert info.value.line >= 1

    def test_poset_rejects_junk_in_every_position(self):
        prefix = qparity(2).prefix
        text = write_poset(trivial_poset(prefix))
        total = self._count_tokens(text)
        for index in range(total):
            corrupted, _ = mutate_token(text, index, "x")
            with pytest.raises(ParseError) as info:
                parse_poset(corrupted, prefix)
            assert info.value.line >= 1

    def test_numeric_corruptions_are_caught(self):
        text = write_qdimacs(qparity(2))
        header_nvars_down, _ = mutate_token(text, 2, "1")
        with pytest.raises(ParseError):
            parse_qdimacs(header_nvars_down)
        header_count_up, _ = mutate_token(text, 3, "9")
        with pytest.raises(ParseError):
            parse_qdimacs(header_count_up)
        td_text = write_btd(qparity_td(2))
        bad_node, _ = mutate_token(td_text, 2, "999")
        with pytest.raises(ParseError):
            parse_btd(bad_node)


class TestTrace:
    def test_json_lines(self):
        events = [
            TraceEvent(1, 4, "R2", 2, 2, 1, 17),
            TraceEvent(2, 3, "R3", 2, 1, 1, 9),
        ]
        sink = io.StringIO()
        write_trace(events, sink)
        lines = sink.getvalue().splitlines()
        assert len(lines) == 2
        first = json.loads(lines[0])
        assert first == {
            "step": 1, "variable": 4, "rule": "R2",
            "family_before": 2, "family_after": 2, "max_set": 1, "micros": 17,
        }

    def test_writes_to_path(self, tmp_path):
        path = tmp_path / "trace.jsonl"
        write_trace([TraceEvent(1, 1, "R1", 1, 1, 1, 0)], str(path))
        assert json.loads(path.read_text().splitlines()[0])["rule"] == "R1"

"""
Tests for the strategy, truth-table and proof text formats.
"""
import os
import sys

import numpy as np
import pytest

# Add parent directory to path for imports
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from mres.complexity import TruthTable, parity_table
from mres.errors import ParseError
from mres.families import FamilyId, gen_family
from mres.formats.proof import emit_proof, parse_proof
from mres.formats.strategy import emit_strategy, parse_strategy
from mres.formats.truthtable import emit_truth_table, emit_truth_tables, parse_truth_table, parse_truth_tables
from mres.mergemap import Leaf, Node, evaluate, isomorphic
from mres.proof import Axiom, Choice, Resolution, generate_equality_refutation, strip

STRATEGY = """c u_1 = x_1
s 3
l 1 0
l 2 1
n 5 1 1 2
e
s 4
l 7 *
e
"""


class TestStrategyFormat:

    def test_parse(self):
        strategy = parse_strategy(STRATEGY)
        assert sorted(strategy) == [3, 4]
        m = strategy[3]
        assert m.leading == 5
        assert m.instructions[5] == Node(1, 1, 2)
        assert evaluate(m, {1: 1}) == 1
        assert strategy[4].is_trivial()

    def test_emit_then_parse(self):
        strategy = parse_strategy(STRATEGY)
        again = parse_strategy(emit_strategy(strategy))
        assert again.keys() == strategy.keys()
        for u in strategy:
            assert again[u] == strategy[u]

    def test_unreachable_instructions_are_dropped(self):
        strategy = parse_strategy("s 3\nl 1 0\nl 2 1\nl 4 0\nn 6 1 1 2\ne\n")
        assert sorted(strategy[3].instructions) == [1, 2, 6]

    @pytest.mark.parametrize("text, line", [
        ("l 1 0\n", 1),                          # record outside a block
        ("s 3\nl 2 0\nl 1 1\ne\n", 3),           # ids not ascending
        ("s 3\nl 1 0\nn 2 1 1 5\ne\n", 3),       # undefined child
        ("s 3\nl 1 2\ne\n", 2),                  # bad leaf value
        ("s 3\nl 1 0\ns 4\n", 3),                # block not closed
        ("s 3\nl 1 0\ne\ns 3\nl 1 0\ne\n", 4),   # duplicate owner
        ("s 3\nx 1\ne\n", 2),                    # unknown record
    ])
    def test_errors(self, text, line):
        with pytest.raises(ParseError) as excinfo:
            parse_strategy(text)
        assert excinfo.value.line == line

    def test_unclosed_block_at_end(self):
        with pytest.raises(ParseError):
            parse_strategy("s 3\nl 1 0\n")

    def test_invalid_utf8(self):
        with pytest.raises(ParseError) as excinfo:
            parse_strategy(b"s 3\nl 1 \xc3\ne\n")
        assert (excinfo.value.line, excinfo.value.column) == (2, 5)


class TestTruthTableFormat:

    def test_parse_single(self):
        table = parse_truth_table("c parity\nt 2 5 6\n0110\n")
        assert table.vars == (5, 6)
        assert table.bit_string() == "0110"

    def test_bits_may_span_lines(self):
        table = parse_truth_table("t 3 1 2 3\n0110\n1001\n")
        assert table == parity_table(3)

    def test_emit_wraps_long_tables(self):
        table = parity_table(7)
        text = emit_truth_table(table)
        assert all(len(row) <= 64 for row in text.splitlines()[1:])
        assert parse_truth_table(text) == table

    def test_several_tables(self):
        tables = [parity_table(1), TruthTable((4,), np.array([1, 1], dtype=np.uint8))]
        assert parse_truth_tables(emit_truth_tables(tables)) == tables

    def test_zero_variable_table(self):
        table = parse_truth_table("t 0\n1\n")
        assert table.arity == 0
        assert table.is_constant()

    @pytest.mark.parametrize("text", [
        "0110\n",                   # bits before header
        "t 2 1 2\n011\n",           # too few bits
        "t 2 1\n0110\n",            # header count mismatch
        "t 1 1\n0x\n",              # bad character
        "",                         # empty
        "t 1 1\n01\nt 1 2\n10\n",   # two tables where one is expected
    ])
    def test_errors(self, text):
        with pytest.raises(ParseError):
            parse_truth_table(text)


class TestProofFormat:

    @pytest.fixture
    def equality(self):
        return gen_family(FamilyId.EQUALITY, 2).qbf

    def test_emit_golden_proof(self, equality):
        text = emit_proof(strip(generate_equality_refutation(2)))
        records = [l for l in text.splitlines() if l[0] in "ar"]
        assert text.splitlines()[0] == "p mres"
        assert len(records) == 9
        assert records[0] == "a 0 5"
        assert records[5] == "r 5 1 2 1 u3=M u4=L"

    def test_emit_then_parse(self, equality):
        proof = strip(generate_equality_refutation(2))
        again = parse_proof(emit_proof(proof, comments=["golden"]), equality)
        assert again.lines == proof.lines

    def test_parse_records(self, equality):
        proof = parse_proof("c x\np mres\na 1 1\na 2 2\nr 3 1 2 1 u3=M u4=L\n", equality)
        assert proof.lines[0].justification == Axiom(1)
        j = proof.lines[2].justification
        assert j == Resolution(1, 2, 1, {3: Choice.MERGE, 4: Choice.SELECT_LEFT})

    @pytest.mark.parametrize("text, line", [
        ("a 1 1\n", 1),                                  # missing header
        ("p mres\na 1\n", 2),                            # short axiom record
        ("p mres\na 1 1\nr 2 1 3 1\n", 3),               # forward reference
        ("p mres\na 1 1\na 2 2\nr 3 1 2 1 u1=M\n", 4),   # choice for an existential
        ("p mres\na 1 1\na 2 2\nr 3 1 2 1 u3=M u3=L\n", 4),
        ("p mres\na 1 1\na 2 2\nr 3 1 2 1 u3=X\n", 4),
        ("p mres\nq 1\n", 2),                            # unknown record
        ("p mres\na -1 1\n", 2),
    ])
    def test_errors(self, equality, text, line):
        with pytest.raises(ParseError) as excinfo:
            parse_proof(text, equality)
        assert excinfo.value.line == line

    def test_empty_file(self, equality):
        with pytest.raises(ParseError):
            parse_proof("c nothing\n", equality)

    def test_invalid_utf8(self, equality):
        with pytest.raises(ParseError) as excinfo:
            parse_proof(b"p mres\na 1 1\n\xe9 2 2\n", equality)
        assert (excinfo.value.line, excinfo.value.column) == (3, 1)

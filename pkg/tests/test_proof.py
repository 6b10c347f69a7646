"""
Tests for MRes rule application, proof checking, strategy extraction and
countermodel verification.
"""
import os
import sys
from dataclasses import replace

import pytest

# Add parent directory to path for imports
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from mres.diagnostics import is_regular, is_tree_like
from mres.errors import (CapExceededError, FailureKind, RuleError, StrategyShapeError, UncheckedProofError)
from mres.families import FamilyId, gen_family
from mres.formats.proof import parse_proof
from mres.mergemap import Leaf, Node, evaluate, make_leaf, merge, trivial
from mres.proof import (Axiom, CheckMode, Choice, Proof, ProofLine, Resolution, axiom_line, check_proof,
                        check_soundness_invariant, extract_strategy, generate_equality_refutation, infer_choice,
                        leaf_clauses, resolve_lines, strip, sub_derivation, verify_countermodel)
from mres.qbf import QBF, Clause, Prefix, Quantifier

# Equality n=1: x=1, u=2, t=3; clauses {1,2,3}, {-1,-2,3}, {-3}
EQ1_PROOF = "p mres\na 1 1\na 2 2\na 3 3\nr 4 1 2 1 u2=M\nr 5 4 3 3\n"


@pytest.fixture
def eq1():
    return gen_family(FamilyId.EQUALITY, 1).qbf


@pytest.fixture
def eq2():
    return gen_family(FamilyId.EQUALITY, 2)


def make_qbf(blocks, clauses):
    return QBF(Prefix.from_blocks(blocks), tuple(Clause(tuple(c)) for c in clauses))


def check_text(qbf, text, mode=CheckMode.INFER):
    return check_proof(qbf, parse_proof(text, qbf), mode)


class TestRules:

    def test_axiom_maps(self, eq2):
        qbf = eq2.qbf
        u1 = eq2.var("U", 1)
        line = axiom_line(qbf, 1, 1)
        assert line.clause.as_set == {eq2.var("X", 1), eq2.var("T", 1)}
        assert line.maps[u1].root == Leaf(0)
        assert line.maps[eq2.var("U", 2)].is_trivial()
        assert axiom_line(qbf, 2, 2).maps[u1].root == Leaf(1)
        long_line = axiom_line(qbf, 5, 0)
        assert long_line.clause.as_set == {-t for t in eq2.var_roles["T"]}
        assert all(m.is_trivial() for m in long_line.maps.values())

    def test_axiom_index_out_of_range(self, eq1):
        with pytest.raises(RuleError) as excinfo:
            axiom_line(eq1, 4, 1)
        assert excinfo.value.kind == FailureKind.BAD_AXIOM

    def test_merge_resolution(self, eq1):
        left, right = axiom_line(eq1, 1, 1), axiom_line(eq1, 2, 2)
        line = resolve_lines(eq1, left, right, 1, {2: Choice.MERGE}, 3)
        assert line.clause.as_set == {3}
        assert line.maps[2].instructions[3] == Node(1, 1, 2)
        assert line.justification == Resolution(1, 2, 1, {2: Choice.MERGE})

    def test_inferred_choices(self, eq1):
        left, right = axiom_line(eq1, 1, 1), axiom_line(eq1, 2, 2)
        assert infer_choice(eq1, 2, 1, left.maps[2], right.maps[2]) == Choice.MERGE
        assert infer_choice(eq1, 2, 1, left.maps[2], trivial(2, 9)) == Choice.SELECT_LEFT
        assert infer_choice(eq1, 2, 1, trivial(2, 9), right.maps[2]) == Choice.SELECT_RIGHT
        assert infer_choice(eq1, 2, 3, make_leaf(2, 1, 0), make_leaf(2, 4, 0)) == Choice.SELECT_LEFT
        with pytest.raises(RuleError) as excinfo:
            infer_choice(eq1, 2, 3, make_leaf(2, 1, 0), make_leaf(2, 4, 1))
        assert excinfo.value.kind == FailureKind.MERGE_BLOCKED

    def test_inferred_resolution_records_choices(self, eq1):
        merged = resolve_lines(eq1, axiom_line(eq1, 1, 1), axiom_line(eq1, 2, 2), 1, new_id=4)
        sink = resolve_lines(eq1, merged, axiom_line(eq1, 3, 3), 3, new_id=5)
        assert len(sink.clause) == 0
        assert sink.justification.choices == {2: Choice.SELECT_LEFT}
        assert sink.maps[2] is merged.maps[2]

    def test_both_trivial_gives_fresh_trivial_map(self, eq2):
        qbf = eq2.qbf
        u1 = eq2.var("U", 1)
        left, right = axiom_line(qbf, 3, 3), axiom_line(qbf, 4, 4)
        line = resolve_lines(qbf, left, right, eq2.var("X", 2), {u1: Choice.SELECT_LEFT}, 7)
        assert line.maps[u1].is_trivial()
        assert line.maps[u1].leading == 7

    def test_both_trivial_is_recorded_as_select_left(self, eq2):
        qbf = eq2.qbf
        u1, u2 = eq2.var("U", 1), eq2.var("U", 2)
        line = resolve_lines(qbf, axiom_line(qbf, 3, 3), axiom_line(qbf, 4, 4), eq2.var("X", 2),
                             {u2: Choice.MERGE}, 7, CheckMode.STRICT)
        assert line.justification.choices == {u1: Choice.SELECT_LEFT, u2: Choice.MERGE}
        assert line.maps[u1].is_trivial()
        assert line.maps[u1].leading == 7

    def test_inconsistent_stores(self, eq1):
        left = ProofLine(1, Axiom(1), Clause((1, 3)), {2: make_leaf(2, 7, 0)})
        right = ProofLine(2, Axiom(2), Clause((-1, 3)), {2: make_leaf(2, 7, 1)})
        with pytest.raises(RuleError) as excinfo:
            resolve_lines(eq1, left, right, 1, {2: Choice.MERGE}, 8)
        assert excinfo.value.kind == FailureKind.INCONSISTENT_STORES

    def test_new_id_must_follow_antecedents(self, eq1):
        with pytest.raises(RuleError) as excinfo:
            resolve_lines(eq1, axiom_line(eq1, 1, 1), axiom_line(eq1, 2, 2), 1, None, 2)
        assert excinfo.value.kind == FailureKind.NON_INCREASING_ID


class TestGoldenProof:

    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_equality_refutation_checks(self, n):
        qbf = gen_family(FamilyId.EQUALITY, n).qbf
        report = check_proof(qbf, strip(generate_equality_refutation(n)), CheckMode.STRICT)
        assert report.ok, report.failures
        assert report.stats["lines"] == 4 * n + 1
        assert report.stats["axioms"] == 2 * n + 1
        assert report.stats["merges"] == n
        assert report.proof.verified
        assert len(report.proof.lines[-1].clause) == 0

    def test_builder_lines_match_checker(self, eq2):
        built = generate_equality_refutation(2)
        report = check_proof(eq2.qbf, built)
        assert report.ok
        for ours, checked in zip(built.lines, report.proof.lines):
            assert ours.clause.same_literals(checked.clause)

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_extracted_strategy_is_identity(self, n):
        inst = gen_family(FamilyId.EQUALITY, n)
        report = check_proof(inst.qbf, strip(generate_equality_refutation(n)))
        strategy = extract_strategy(report.proof)
        assert sorted(strategy) == sorted(inst.var_roles["U"])
        for x, u in zip(inst.var_roles["X"], inst.var_roles["U"]):
            assert evaluate(strategy[u], {x: 0}) == 0
            assert evaluate(strategy[u], {x: 1}) == 1
        assert verify_countermodel(inst.qbf, strategy).winning

    def test_n1_strategy_shape(self, eq1):
        report = check_text(eq1, EQ1_PROOF)
        assert report.ok
        m = extract_strategy(report.proof)[2]
        assert dict(m.instructions) == {1: Leaf(0), 2: Leaf(1), 4: Node(1, 1, 2)}

    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_soundness_invariant_holds(self, n):
        qbf = gen_family(FamilyId.EQUALITY, n).qbf
        report = check_proof(qbf, strip(generate_equality_refutation(n)))
        sound = check_soundness_invariant(qbf, report.proof, threads=2)
        assert sound.ok
        assert sound.stats["assignments"] == 1 << (2 * n)

    def test_sub_derivation_and_leaves(self, eq2):
        proof = generate_equality_refutation(2)
        assert sub_derivation(proof, 5) == {1, 2, 5}
        assert sub_derivation(proof, 8) == frozenset(range(9))
        leaves = leaf_clauses(proof)
        assert leaves[5] == {1, 2}
        assert leaves[8] == {1, 2, 3, 4, 5}

    @pytest.mark.slow
    def test_equality_pipeline_up_to_100(self):
        for n in range(1, 101):
            qbf = gen_family(FamilyId.EQUALITY, n).qbf
            report = check_proof(qbf, strip(generate_equality_refutation(n)))
            assert report.ok, (n, report.failures)
            assert len(report.proof.lines) == 4 * n + 1
            assert is_tree_like(report.proof) and is_regular(report.proof)
            if n <= 8:
                assert verify_countermodel(qbf, extract_strategy(report.proof)).winning


class TestRejections:

    def test_accepts_inferred_choices(self, eq1):
        assert check_text(eq1, EQ1_PROOF).ok

    def test_strict_mode_needs_every_choice(self, eq1):
        report = check_text(eq1, EQ1_PROOF, CheckMode.STRICT)
        assert report.kinds() == {FailureKind.MISSING_CHOICE}
        assert report.failures[0].line_id == 5
        assert check_text(eq1, EQ1_PROOF.replace("r 5 4 3 3", "r 5 4 3 3 u2=L"), CheckMode.STRICT).ok

    @pytest.mark.parametrize("text, kind, line_id", [
        ("p mres\na 1 1\na 2 3\nr 3 1 2 1\n", FailureKind.PIVOT_MISSING, 3),
        ("p mres\na 1 1\na 2 2\nr 3 1 2 2\n", FailureKind.PIVOT_NOT_EXISTENTIAL, 3),
        ("p mres\na 1 1\na 2 2\nr 3 1 2 1 u2=L\n", FailureKind.ISOMORPHISM_FAILURE, 3),
        ("p mres\na 1 1\n", FailureKind.NON_EMPTY_SINK, 1),
        ("p mres\na 2 1\na 1 2\n", FailureKind.NON_INCREASING_ID, 1),
        ("p mres\na 1 9\n", FailureKind.BAD_AXIOM, 1),
    ])
    def test_single_failure(self, eq1, text, kind, line_id):
        report = check_text(eq1, text)
        assert not report.ok
        assert kind in report.kinds()
        assert any(f.kind == kind and f.line_id == line_id for f in report.failures)
        assert report.proof is None

    def test_underivable_antecedent(self, eq1):
        report = check_text(eq1, "p mres\na 1 9\na 2 2\nr 3 1 2 1\n")
        assert report.kinds() == {FailureKind.BAD_AXIOM, FailureKind.UNDERIVABLE_ANTECEDENT}

    def test_tautological_resolvent(self):
        qbf = make_qbf([(Quantifier.EXISTS, [1, 2])], [[1, 2], [-1, -2]])
        report = check_text(qbf, "p mres\na 1 1\na 2 2\nr 3 1 2 1\n")
        assert FailureKind.TAUTOLOGICAL_RESOLVENT in report.kinds()

    def test_merge_blocked(self):
        # E 1 A 2 E 3: the pivot 3 comes after the universal
        qbf = make_qbf([(Quantifier.EXISTS, [1]), (Quantifier.FORALL, [2]), (Quantifier.EXISTS, [3])],
                       [[3, 2], [-3, -2]])
        assert FailureKind.MERGE_BLOCKED in check_text(qbf, "p mres\na 1 1\na 2 2\nr 3 1 2 3\n").kinds()
        explicit = check_text(qbf, "p mres\na 1 1\na 2 2\nr 3 1 2 3 u2=M\n")
        assert FailureKind.MERGE_BLOCKED in explicit.kinds()

    def test_trivial_merge(self, eq2):
        u1, x2 = eq2.var("U", 1), eq2.var("X", 2)
        report = check_text(eq2.qbf, f"p mres\na 3 3\na 4 4\nr 5 3 4 {x2} u{u1}=M\n")
        assert FailureKind.TRIVIAL_MERGE in report.kinds()

    def test_empty_proof(self, eq1):
        report = check_proof(eq1, Proof(eq1, ()))
        assert report.kinds() == {FailureKind.EMPTY_PROOF}

    def test_forward_and_dangling_references(self, eq1):
        forward = Proof(eq1, (ProofLine(1, Axiom(1)), ProofLine(2, Axiom(2)),
                              ProofLine(3, Resolution(1, 5, 1))))
        assert FailureKind.FORWARD_REFERENCE in check_proof(eq1, forward).kinds()
        dangling = Proof(eq1, (ProofLine(1, Axiom(1)), ProofLine(3, Axiom(2)),
                               ProofLine(4, Resolution(1, 2, 1))))
        assert FailureKind.DANGLING_REFERENCE in check_proof(eq1, dangling).kinds()

    def test_claimed_clause_and_map_mismatches(self, eq1):
        universal = Proof(eq1, (ProofLine(1, Axiom(1), Clause((1, 2, 3))),))
        assert FailureKind.UNIVERSAL_LITERAL in check_proof(eq1, universal).kinds()

        wrong_axiom = Proof(eq1, (ProofLine(1, Axiom(1), Clause((1,))),))
        assert FailureKind.BAD_AXIOM in check_proof(eq1, wrong_axiom).kinds()

        wrong_clause = Proof(eq1, (ProofLine(1, Axiom(1)), ProofLine(2, Axiom(2)),
                                   ProofLine(3, Resolution(1, 2, 1, {2: Choice.MERGE}), Clause((1, 3)))))
        assert FailureKind.CLAUSE_MISMATCH in check_proof(eq1, wrong_clause).kinds()

        wrong_map = Proof(eq1, (ProofLine(1, Axiom(1), None, {2: make_leaf(2, 1, 1)}),))
        assert FailureKind.MAP_MISMATCH in check_proof(eq1, wrong_map).kinds()

    def test_claimed_values_that_match_are_accepted(self, eq1):
        built = generate_equality_refutation(1)
        assert check_proof(eq1, built).ok


class TestCountermodels:

    def test_negated_identity_loses(self, eq1):
        strategy = {2: merge(2, 3, 1, make_leaf(2, 1, 1), make_leaf(2, 2, 0))}
        result = verify_countermodel(eq1, strategy)
        assert not result.winning
        assert result.witness == {1: 0, 3: 0}
        assert result.checked == 1

    def test_missing_universal_is_unset(self, eq1):
        assert not verify_countermodel(eq1, {}).winning

    def test_qparity_parity_wins(self):
        from mres.families import intended_strategy
        inst = gen_family(FamilyId.QPARITY, 3)
        assert verify_countermodel(inst.qbf, intended_strategy(inst), threads=4).winning

    def test_shape_and_cap_errors(self, eq1):
        reads_t = {2: merge(2, 3, 3, make_leaf(2, 1, 0), make_leaf(2, 2, 1))}
        with pytest.raises(StrategyShapeError):
            verify_countermodel(eq1, reads_t)
        with pytest.raises(StrategyShapeError):
            verify_countermodel(eq1, {1: make_leaf(1, 1, 0)})
        with pytest.raises(CapExceededError):
            verify_countermodel(eq1, {}, cap=1)

    def test_extraction_needs_a_checked_proof(self):
        with pytest.raises(UncheckedProofError):
            extract_strategy(generate_equality_refutation(1))
        with pytest.raises(UncheckedProofError):
            check_soundness_invariant(gen_family(FamilyId.EQUALITY, 1).qbf, generate_equality_refutation(1))

    def test_soundness_violation_is_reported(self, eq1):
        report = check_text(eq1, EQ1_PROOF)
        lines = list(report.proof.lines)
        lines[0] = replace(lines[0], maps={2: make_leaf(2, 1, 1)})
        tampered = replace(report.proof, lines=tuple(lines))
        sound = check_soundness_invariant(eq1, tampered)
        assert not sound.ok
        assert sound.kinds() == {FailureKind.SOUNDNESS_VIOLATION}
        assert sound.failures[0].line_id == 1

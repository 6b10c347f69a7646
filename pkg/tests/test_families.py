"""
Tests for the formula family generators.
"""
import os
import sys

import pytest

# Add parent directory to path for imports
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from mres.complexity import table_from_function
from mres.errors import MResError
from mres.families import (FamilyId, count_clauses, emit_instance, gen_family, hat_parity_clauses,
                           intended_strategy, parity_clauses, truth_assignment_check, uci_grouping)
from mres.formats.qdimacs import parse_qdimacs, read_annotations
from mres.mergemap import evaluate, make_leaf


def _literal_sets(qbf):
    return [c.as_set for c in qbf.matrix]


@pytest.mark.parametrize("family", list(FamilyId))
def test_clause_counts_match_definitions(family):
    formulas = {
        FamilyId.EQUALITY: lambda n: 2 * n + 1,
        FamilyId.QPARITY: lambda n: 4 * n,
        FamilyId.LQPARITY: lambda n: 8 * n - 2,
        FamilyId.CR: lambda n: 2 * n * n + 2,
        FamilyId.KBKF_LQ: lambda n: 4 * n + 1,
    }
    for n in range(family.min_n, 51):
        generated = len(gen_family(family, n).qbf.matrix)
        assert generated == count_clauses(family, n) == formulas[family](n)


def test_parity_clause_order():
    assert parity_clauses([1, 2]) == [[-1, 2], [1, -2]]
    assert parity_clauses([1, 2, 3]) == [[-1, 2, 3], [1, -2, 3], [1, 2, -3], [-1, -2, -3]]
    assert hat_parity_clauses([1, 2], 9) == [[-1, 2, 9], [-1, 2, -9], [1, -2, 9], [1, -2, -9]]


def test_qparity_2():
    inst = gen_family(FamilyId.QPARITY, 2)
    x1, t1 = inst.var("X", 1), inst.var("T", 1)
    assert len(inst.qbf.matrix) == 8
    phi_1 = [inst.qbf.clause(i).as_set for i in inst.clause_groups["phi_1"]]
    assert phi_1 == [frozenset({-x1, t1}), frozenset({x1, -t1})]
    assert inst.qbf.universals == (inst.var("Z"),)


def test_cr_2():
    inst = gen_family(FamilyId.CR, 2)
    assert inst.qbf.num_vars == 9
    assert len(inst.qbf.matrix) == 10
    assert set(inst.clause_groups) == {"A_1_1", "A_1_2", "A_2_1", "A_2_2", "B_1_1", "B_1_2", "B_2_1", "B_2_2",
                                       "L_A", "L_B"}
    text = emit_instance(inst)
    assert text.startswith("c family: cr 2\n")
    assert "\np cnf 9 10\n" in text


def test_kbkf_lq_2():
    inst = gen_family(FamilyId.KBKF_LQ, 2)
    assert len(inst.qbf.matrix) == 9
    (b0_2,) = inst.clause_groups["B0_2"]
    assert inst.qbf.clause(b0_2).as_set == {inst.var("X", 2), inst.var("F", 2)}
    (a0,) = inst.clause_groups["A_0"]
    assert inst.qbf.clause(a0).as_set == {-inst.var("D", 1), -inst.var("E", 1), -inst.var("F", 1),
                                          -inst.var("F", 2)}


def test_equality_3_ends_with_long_clause():
    inst = gen_family(FamilyId.EQUALITY, 3)
    assert len(inst.qbf.matrix) == 7
    assert inst.qbf.matrix[-1].as_set == {-t for t in inst.var_roles["T"]}


@pytest.mark.parametrize("family", list(FamilyId))
def test_roles_and_groups_partition(family):
    inst = gen_family(family, 3)
    roles = sorted(v for vs in inst.var_roles.values() for v in vs)
    assert roles == sorted(inst.qbf.prefix.variables)
    groups = sorted(i for idx in inst.clause_groups.values() for i in idx)
    assert groups == list(range(1, len(inst.qbf.matrix) + 1))


@pytest.mark.parametrize("family", list(FamilyId))
def test_emitted_instance_reparses(family):
    inst = gen_family(family, 2)
    qbf = parse_qdimacs(emit_instance(inst))
    assert qbf.prefix == inst.qbf.prefix
    assert _literal_sets(qbf) == _literal_sets(inst.qbf)
    notes = read_annotations(qbf)
    assert notes.family == family.value
    assert notes.n == 2
    assert notes.roles == inst.var_roles
    assert notes.groups == inst.clause_groups


@pytest.mark.parametrize("family", [FamilyId.QPARITY, FamilyId.LQPARITY])
@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_phi_clauses_mention_their_variables(family, n):
    inst = gen_family(family, n)
    for i in range(1, n + 1):
        needed = {inst.var("X", i), inst.var("T", i)}
        if i >= 2:
            needed.add(inst.var("T", i - 1))
        for index in inst.clause_groups[f"phi_{i}"]:
            variables = {abs(l) for l in inst.qbf.clause(index).literals}
            assert needed <= variables, (i, index)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_kbkf_lq_clauses_are_horn(n):
    inst = gen_family(FamilyId.KBKF_LQ, n)
    prefix = inst.qbf.prefix
    (a0,) = inst.clause_groups["A_0"]
    for index, clause in enumerate(inst.qbf.matrix, start=1):
        positive = [l for l in clause.existential_part(prefix).literals if l > 0]
        if index == a0:
            assert positive == []
        else:
            assert len(positive) == 1, index


@pytest.mark.parametrize("family", list(FamilyId))
@pytest.mark.parametrize("n", [2, 3])
def test_generation_is_deterministic(family, n):
    assert emit_instance(gen_family(family, n)) == emit_instance(gen_family(family, n))


def test_gen_family_rejects_bad_arguments():
    with pytest.raises(MResError):
        gen_family("nonsense", 2)
    with pytest.raises(MResError):
        gen_family(FamilyId.KBKF_LQ, 1)
    with pytest.raises(MResError):
        gen_family(FamilyId.EQUALITY, 0)


def test_uci_grouping_schemes():
    inst = gen_family(FamilyId.LQPARITY, 2)
    grouping = uci_grouping(inst, "phi")
    assert set(grouping.values()) == {1, 2, 3}
    assert len(grouping) == len(inst.qbf.matrix)

    kbkf = gen_family(FamilyId.KBKF_LQ, 2)
    grouping = uci_grouping(kbkf, "A")
    assert set(grouping.values()) == {0, 1, 2}
    assert kbkf.clause_groups["B0_1"][0] not in grouping
    with pytest.raises(MResError):
        uci_grouping(kbkf, "phi")


@pytest.mark.parametrize("family, n", [
    (FamilyId.EQUALITY, 2),
    (FamilyId.QPARITY, 3),
    (FamilyId.LQPARITY, 2),
    (FamilyId.KBKF_LQ, 2),
])
def test_intended_strategies_win(family, n):
    strategy = intended_strategy(gen_family(family, n))
    assert truth_assignment_check(family, n, strategy)


def test_constant_strategy_loses_qparity():
    inst = gen_family(FamilyId.QPARITY, 3)
    z = inst.var("Z")
    assert not truth_assignment_check(FamilyId.QPARITY, 3, {z: make_leaf(z, 1, 0)})
    assert not truth_assignment_check("qparity", 3, {z: table_from_function(inst.var_roles["X"], lambda a: 0)})


def test_intended_parity_strategy_computes_parity():
    inst = gen_family(FamilyId.QPARITY, 3)
    (m,) = intended_strategy(inst).values()
    xs = inst.var_roles["X"]
    for bits in range(8):
        a = {x: (bits >> i) & 1 for i, x in enumerate(xs)}
        assert evaluate(m, a) == bin(bits).count("1") % 2

"""
MRes proof lines, rule application and proof checking.

A line pairs an existential clause with one merge map per universal
variable. Axiom lines come from matrix clauses; resolution lines resolve
two earlier lines on an existential pivot and, per universal, either
select one antecedent's map or merge both under a Node on the pivot.

Also here: strategy extraction, exhaustive countermodel verification,
the per-line soundness invariant and the golden Equality refutation.
"""
import logging
from collections import Counter
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Dict, FrozenSet, List, Mapping, NamedTuple, Optional, Set, Tuple, Union

import numpy as np

from .config import DEFAULT_EXHAUSTIVE_CAP
from .errors import (CapExceededError, FailureKind, FreshIdError, InconsistentStoresError, MResError, RuleError,
                     UncheckedProofError)
from .evaluation import (check_strategy_shape, clause_falsified, falsified_any, make_chunk, map_over_chunks,
                         row_assignment, strategy_codes)
from .mergemap import MergeMap, isomorphic, make_leaf, merge, trivial
from .qbf import QBF, Clause

logger = logging.getLogger(__name__)

Strategy = Dict[int, MergeMap]


class Choice(str, Enum):
    SELECT_LEFT = "L"
    SELECT_RIGHT = "R"
    MERGE = "M"

    def __str__(self):
        return self.value


class CheckMode(str, Enum):
    STRICT = "strict_choices"
    INFER = "infer_choices"


@dataclass(frozen=True)
class Axiom:
    clause_index: int


@dataclass(frozen=True)
class Resolution:
    left: int
    right: int
    pivot: int
    choices: Mapping[int, Choice] = field(default_factory=dict)

    def __hash__(self):
        return hash((self.left, self.right, self.pivot, tuple(sorted(self.choices.items()))))


Justification = Union[Axiom, Resolution]


@dataclass(frozen=True)
class ProofLine:
    """
    One proof line. clause and maps are None when a proof only records
    justifications (as parsed proof files do); check_proof derives them.
    """
    id: int
    justification: Justification
    clause: Optional[Clause] = None
    maps: Optional[Mapping[int, MergeMap]] = field(default=None, compare=False)

    @property
    def materialised(self) -> bool:
        return self.clause is not None and self.maps is not None

    @property
    def antecedents(self) -> Tuple[int, ...]:
        j = self.justification
        return (j.left, j.right) if isinstance(j, Resolution) else ()


@dataclass(frozen=True)
class Proof:
    qbf: QBF = field(compare=False, repr=False)
    lines: Tuple[ProofLine, ...]
    verified: bool = field(default=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "lines", tuple(self.lines))

    def __len__(self):
        return len(self.lines)

    @property
    def sink(self) -> int:
        if not self.lines:
            raise MResError("empty proof has no sink")
        return self.lines[-1].id

    def index(self) -> Dict[int, ProofLine]:
        return {line.id: line for line in self.lines}

    def line(self, line_id: int) -> ProofLine:
        for line in self.lines:
            if line.id == line_id:
                return line
        raise MResError(f"no line with id {line_id}")


class Failure(NamedTuple):
    line_id: Optional[int]
    kind: FailureKind
    message: str


@dataclass
class CheckReport:
    ok: bool
    failures: List[Failure] = field(default_factory=list)
    stats: Dict[str, object] = field(default_factory=dict)
    proof: Optional[Proof] = None

    def kinds(self) -> Set[FailureKind]:
        return {f.kind for f in self.failures}


class CountermodelResult(NamedTuple):
    winning: bool
    witness: Optional[Dict[int, int]]
    checked: int


def axiom_line(qbf: QBF, clause_index: int, line_id: int) -> ProofLine:
    """
    Axiom rule: existential part of a matrix clause; for each universal u
    the simple map giving the value u must take to falsify the clause.
    """
    if not 1 <= clause_index <= len(qbf.matrix):
        raise RuleError(FailureKind.BAD_AXIOM, f"clause index {clause_index} out of range 1..{len(qbf.matrix)}")
    clause = qbf.clause(clause_index)
    maps = {}
    for u in qbf.universals:
        if u in clause:
            maps[u] = make_leaf(u, line_id, 0)
        elif -u in clause:
            maps[u] = make_leaf(u, line_id, 1)
        else:
            maps[u] = trivial(u, line_id)
    return ProofLine(line_id, Axiom(clause_index), clause.existential_part(qbf.prefix), maps)


def resolvent(left: Clause, right: Clause, pivot: int) -> Clause:
    literals = [l for l in left.literals if l != pivot]
    present = set(literals)
    literals.extend(l for l in right.literals if l != -pivot and l not in present)
    return Clause(tuple(literals))


def infer_choice(qbf: QBF, u: int, pivot: int, ml: MergeMap, mr: MergeMap) -> Choice:
    """Preference order: select the only non-trivial side, select left if isomorphic, else merge."""
    if mr.is_trivial():
        return Choice.SELECT_LEFT
    if ml.is_trivial():
        return Choice.SELECT_RIGHT
    if isomorphic(ml, mr):
        return Choice.SELECT_LEFT
    if qbf.prefix.precedes(pivot, u):
        return Choice.MERGE
    raise RuleError(FailureKind.MERGE_BLOCKED,
                    f"maps for {u} differ and pivot {pivot} is not left of {u}", universal=u)


def apply_choice(qbf: QBF, u: int, pivot: int, choice: Choice, ml: MergeMap, mr: MergeMap,
                 new_id: int) -> MergeMap:
    both_trivial = ml.is_trivial() and mr.is_trivial()
    if choice == Choice.MERGE:
        if both_trivial:
            raise RuleError(FailureKind.TRIVIAL_MERGE, f"both maps for {u} are trivial", universal=u)
        if not qbf.prefix.precedes(pivot, u):
            raise RuleError(FailureKind.MERGE_BLOCKED, f"pivot {pivot} is not left of {u}", universal=u)
        try:
            return merge(u, new_id, pivot, ml, mr)
        except InconsistentStoresError as e:
            raise RuleError(FailureKind.INCONSISTENT_STORES, f"maps for {u}: {e}", universal=u)
        except FreshIdError as e:
            raise RuleError(FailureKind.NON_INCREASING_ID, str(e), universal=u)

    if both_trivial:
        return trivial(u, new_id)
    kept, other = (ml, mr) if choice == Choice.SELECT_LEFT else (mr, ml)
    if not other.is_trivial() and not isomorphic(kept, other):
        raise RuleError(FailureKind.ISOMORPHISM_FAILURE,
                        f"cannot select {choice} for {u}: other map is non-trivial and not isomorphic",
                        universal=u)
    return kept


def resolve_lines(qbf: QBF, left: ProofLine, right: ProofLine, pivot: int,
                  choices: Optional[Mapping[int, Choice]] = None, new_id: Optional[int] = None,
                  mode: CheckMode = CheckMode.INFER) -> ProofLine:
    """
    Resolution rule.

    Args:
        qbf: the formula being refuted
        left: line containing the pivot positively
        right: line containing the pivot negatively
        pivot: existential variable to resolve on
        choices: per-universal Choice; missing entries are inferred in INFER mode
        new_id: id of the new line (defaults to one above both antecedents)
        mode: STRICT requires a choice wherever a map is non-trivial

    Returns:
        ProofLine: materialised line whose justification records every choice made

    Raises:
        RuleError: with the FailureKind of the first violated condition
    """
    choices = dict(choices or {})
    if new_id is None:
        new_id = max(left.id, right.id) + 1
    if new_id <= max(left.id, right.id):
        raise RuleError(FailureKind.NON_INCREASING_ID, f"line {new_id} does not follow its antecedents")
    if not qbf.prefix.is_existential(pivot):
        raise RuleError(FailureKind.PIVOT_NOT_EXISTENTIAL, f"pivot {pivot} is not an existential variable")
    if pivot not in left.clause:
        raise RuleError(FailureKind.PIVOT_MISSING, f"{pivot} does not occur in line {left.id}")
    if -pivot not in right.clause:
        raise RuleError(FailureKind.PIVOT_MISSING, f"-{pivot} does not occur in line {right.id}")
    try:
        clause = resolvent(left.clause, right.clause, pivot)
    except MResError as e:
        raise RuleError(FailureKind.TAUTOLOGICAL_RESOLVENT, str(e))

    for u in choices:
        if not qbf.prefix.is_universal(u):
            logger.warning(f"Ignoring choice for non-universal variable {u} at line {new_id}")

    maps = {}
    recorded = {}
    for u in qbf.universals:
        ml, mr = left.maps[u], right.maps[u]
        choice = choices.get(u)
        if choice is None:
            if ml.is_trivial() and mr.is_trivial():
                choice = Choice.SELECT_LEFT
            elif mode == CheckMode.STRICT:
                raise RuleError(FailureKind.MISSING_CHOICE, f"no choice given for {u}", universal=u)
            else:
                choice = infer_choice(qbf, u, pivot, ml, mr)
        choice = Choice(choice)
        maps[u] = apply_choice(qbf, u, pivot, choice, ml, mr, new_id)
        recorded[u] = choice
    return ProofLine(new_id, Resolution(left.id, right.id, pivot, recorded), clause, maps)


def _compare_claimed(qbf: QBF, claimed: ProofLine, derived: ProofLine) -> List[Failure]:
    failures = []
    if claimed.clause is not None:
        universal = [l for l in claimed.clause if qbf.prefix.is_universal(abs(l))]
        if universal:
            failures.append(Failure(claimed.id, FailureKind.UNIVERSAL_LITERAL,
                                    f"clause contains universal literal {universal[0]}"))
        elif not claimed.clause.same_literals(derived.clause):
            kind = FailureKind.BAD_AXIOM if isinstance(claimed.justification, Axiom) else FailureKind.CLAUSE_MISMATCH
            failures.append(Failure(claimed.id, kind,
                                    f"claimed clause {claimed.clause} but rule gives {derived.clause}"))
    if claimed.maps is not None:
        for u in qbf.universals:
            m = claimed.maps.get(u)
            if m is None or m.owner != u or not isomorphic(m.normalized(), derived.maps[u]):
                failures.append(Failure(claimed.id, FailureKind.MAP_MISMATCH,
                                        f"claimed map for {u} is not isomorphic to the derived map"))
    return failures


def check_proof(qbf: QBF, proof: Proof, mode: Union[CheckMode, str] = CheckMode.INFER) -> CheckReport:
    """
    Re-derive every line with the Axiom and Resolution rules.

    Rule failures are collected, never raised. On success the report
    carries the materialised proof marked verified.
    """
    mode = CheckMode(mode)
    report = CheckReport(ok=False)
    if not proof.lines:
        report.failures.append(Failure(None, FailureKind.EMPTY_PROOF, "proof has no lines"))
        return report

    derived: Dict[int, ProofLine] = {}
    seen: Set[int] = set()
    previous_id = None
    pivots = Counter()
    merges = 0

    for line in proof.lines:
        if previous_id is not None and line.id <= previous_id:
            report.failures.append(Failure(line.id, FailureKind.NON_INCREASING_ID,
                                           f"line id {line.id} does not exceed {previous_id}"))
            previous_id = max(previous_id, line.id)
            continue
        previous_id = line.id
        seen.add(line.id)
        j = line.justification
        try:
            if isinstance(j, Axiom):
                result = axiom_line(qbf, j.clause_index, line.id)
            else:
                missing = False
                for ante in (j.left, j.right):
                    if ante >= line.id:
                        report.failures.append(Failure(line.id, FailureKind.FORWARD_REFERENCE,
                                                       f"antecedent {ante} does not precede line {line.id}"))
                        missing = True
                    elif ante not in seen:
                        report.failures.append(Failure(line.id, FailureKind.DANGLING_REFERENCE,
                                                       f"antecedent {ante} is not a line of the proof"))
                        missing = True
                    elif ante not in derived:
                        report.failures.append(Failure(line.id, FailureKind.UNDERIVABLE_ANTECEDENT,
                                                       f"antecedent {ante} was rejected"))
                        missing = True
                if missing:
                    continue
                result = resolve_lines(qbf, derived[j.left], derived[j.right], j.pivot, j.choices,
                                       line.id, mode)
                pivots[j.pivot] += 1
                merges += sum(1 for c in result.justification.choices.values() if c == Choice.MERGE)
        except RuleError as e:
            report.failures.append(Failure(line.id, e.kind, str(e)))
            continue

        mismatches = _compare_claimed(qbf, line, result)
        if mismatches:
            report.failures.extend(mismatches)
            continue
        derived[line.id] = result

    sink = proof.lines[-1]
    if sink.id in derived and len(derived[sink.id].clause) > 0:
        report.failures.append(Failure(sink.id, FailureKind.NON_EMPTY_SINK,
                                       f"final line derives {derived[sink.id].clause}, not the empty clause"))

    axioms = sum(1 for line in proof.lines if isinstance(line.justification, Axiom))
    report.stats = {
        "lines": len(proof.lines),
        "axioms": axioms,
        "resolutions": len(proof.lines) - axioms,
        "merges": merges,
        "pivots": dict(sorted(pivots.items())),
    }
    report.failures.sort(key=lambda f: (-1 if f.line_id is None else f.line_id))
    report.ok = not report.failures
    if report.ok:
        report.proof = Proof(qbf, tuple(derived[line.id] for line in proof.lines), verified=True)
        logger.info(f"Proof accepted: {len(proof.lines)} lines, {merges} merges")
    else:
        logger.info(f"Proof rejected with {len(report.failures)} failures")
    return report


def extract_strategy(proof: Proof) -> Strategy:
    """The sink's merge maps, one per universal variable."""
    if not proof.verified:
        raise UncheckedProofError("strategy extraction needs a proof accepted by check_proof")
    sink = proof.lines[-1]
    return {u: m.normalized() for u, m in sink.maps.items()}


def _existentials_within_cap(qbf: QBF, cap: Optional[int]) -> Tuple[int, ...]:
    cap = DEFAULT_EXHAUSTIVE_CAP if cap is None else cap
    existentials = qbf.existentials
    if len(existentials) > cap:
        raise CapExceededError(f"{len(existentials)} existential variables exceed the exhaustive cap {cap}")
    return existentials


def verify_countermodel(qbf: QBF, strategy: Mapping[int, object], cap: Optional[int] = None,
                        threads: int = 1) -> CountermodelResult:
    """
    Exhaustively check that a strategy refutes the formula.

    Every total existential assignment alpha is extended by the strategy
    (a * value leaves the universal unset) and must falsify some matrix
    clause, all of whose literals are then assigned.

    Args:
        qbf: the formula
        strategy: universal -> MergeMap or TruthTable
        cap: maximum number of existential variables
        threads: worker threads for chunked evaluation

    Returns:
        CountermodelResult: winning flag, lowest-index surviving alpha as witness
    """
    existentials = _existentials_within_cap(qbf, cap)
    check_strategy_shape(qbf, strategy)
    all_clauses = range(1, len(qbf.matrix) + 1)

    def first_survivor(start: int, stop: int) -> int:
        chunk = make_chunk(existentials, start, stop)
        codes = strategy_codes(qbf, strategy, chunk.columns, len(chunk))
        falsified = falsified_any(qbf, all_clauses, chunk.columns, codes, len(chunk))
        survivors = np.flatnonzero(~falsified)
        return int(survivors[0]) + start if survivors.size else -1

    total = 1 << len(existentials)
    for survivor in map_over_chunks(first_survivor, total, threads):
        if survivor >= 0:
            chunk = make_chunk(existentials, survivor, survivor + 1)
            witness = row_assignment(chunk.columns, 0)
            logger.debug(f"Strategy fails on {witness}")
            return CountermodelResult(False, witness, survivor + 1)
    return CountermodelResult(True, None, total)


def sub_derivation(proof: Proof, line_id: int) -> FrozenSet[int]:
    """Ids of the minimal sub-derivation ending at line_id."""
    lines = proof.index()
    if line_id not in lines:
        raise MResError(f"no line with id {line_id}")
    seen = {line_id}
    stack = [line_id]
    while stack:
        for ante in lines[stack.pop()].antecedents:
            if ante not in seen:
                seen.add(ante)
                stack.append(ante)
    return frozenset(seen)


def leaf_clauses(proof: Proof) -> Dict[int, FrozenSet[int]]:
    """Line id -> matrix clause indices at the axiom leaves of its sub-derivation."""
    leaves: Dict[int, FrozenSet[int]] = {}
    for line in proof.lines:
        j = line.justification
        if isinstance(j, Axiom):
            leaves[line.id] = frozenset({j.clause_index})
        else:
            leaves[line.id] = leaves[j.left] | leaves[j.right]
    return leaves


def check_soundness_invariant(qbf: QBF, proof: Proof, cap: Optional[int] = None,
                              threads: int = 1) -> CheckReport:
    """
    For each line and each total existential alpha falsifying its clause,
    alpha extended by the line's maps must falsify a matrix clause among
    the line's axiom leaves.
    """
    if not proof.verified:
        raise UncheckedProofError("the soundness invariant is defined for proofs accepted by check_proof")
    existentials = _existentials_within_cap(qbf, cap)
    leaves = leaf_clauses(proof)

    def violations(start: int, stop: int) -> List[Tuple[int, int]]:
        chunk = make_chunk(existentials, start, stop)
        size = len(chunk)
        found = []
        for line in proof.lines:
            falsifies_line = clause_falsified(line.clause, chunk.columns, {}, size)
            if not falsifies_line.any():
                continue
            codes = strategy_codes(qbf, line.maps, chunk.columns, size)
            covered = falsified_any(qbf, sorted(leaves[line.id]), chunk.columns, codes, size)
            bad = np.flatnonzero(falsifies_line & ~covered)
            if bad.size:
                found.append((line.id, int(bad[0]) + start))
        return found

    first_bad: Dict[int, int] = {}
    for chunk_result in map_over_chunks(violations, 1 << len(existentials), threads):
        for line_id, row in chunk_result:
            first_bad.setdefault(line_id, row)

    report = CheckReport(ok=not first_bad, stats={"lines": len(proof.lines),
                                                  "assignments": 1 << len(existentials)})
    for line_id in sorted(first_bad):
        chunk = make_chunk(existentials, first_bad[line_id], first_bad[line_id] + 1)
        alpha = row_assignment(chunk.columns, 0)
        report.failures.append(Failure(line_id, FailureKind.SOUNDNESS_VIOLATION,
                                       f"assignment {alpha} falsifies the line but no leaf clause"))
    report.proof = proof
    logger.info(f"Soundness invariant: {len(first_bad)} violating lines")
    return report


def generate_equality_refutation(n: int) -> Proof:
    """
    The 4n+1 line refutation of the Equality formula.

    Line 0 is the long clause, lines 2i-1 and 2i the short clauses of
    index i, line 2n+i merges them on x_i, and lines 3n+1..4n resolve the
    t_i away. The sink's maps compute u_i = x_i.
    """
    from .families import FamilyId, gen_family

    instance = gen_family(FamilyId.EQUALITY, n)
    qbf = instance.qbf
    lines: Dict[int, ProofLine] = {0: axiom_line(qbf, 2 * n + 1, 0)}
    for i in range(1, n + 1):
        lines[2 * i - 1] = axiom_line(qbf, 2 * i - 1, 2 * i - 1)
        lines[2 * i] = axiom_line(qbf, 2 * i, 2 * i)
    for i in range(1, n + 1):
        u = instance.var("U", i)
        lines[2 * n + i] = resolve_lines(qbf, lines[2 * i - 1], lines[2 * i], instance.var("X", i),
                                         {u: Choice.MERGE}, 2 * n + i, CheckMode.STRICT)
    previous = 0
    for i in range(1, n + 1):
        choices = {instance.var("U", i): Choice.SELECT_LEFT}
        choices.update({instance.var("U", j): Choice.SELECT_RIGHT for j in range(1, i)})
        lines[3 * n + i] = resolve_lines(qbf, lines[2 * n + i], lines[previous], instance.var("T", i),
                                         choices, 3 * n + i, CheckMode.STRICT)
        previous = 3 * n + i
    return Proof(qbf, tuple(lines[i] for i in sorted(lines)))


def strip(proof: Proof) -> Proof:
    """Justifications only, as written to proof files."""
    return replace(proof, lines=tuple(ProofLine(l.id, l.justification) for l in proof.lines), verified=False)

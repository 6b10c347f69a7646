"""
Structural analyses of MRes proofs: derivation graph shape, regularity,
used-constraint index sets and boundary sets.
"""
import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Set, Tuple

from .errors import MResError, UncheckedProofError
from .mergemap import MapClassification, Node, classify
from .proof import Axiom, Proof, Resolution, extract_strategy, leaf_clauses

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DerivationGraph:
    """G_Pi with edges antecedent -> consequent."""
    antecedents: Dict[int, Tuple[int, ...]]
    consumers: Dict[int, List[int]]

    def out_degree(self, line_id: int) -> int:
        return len(self.consumers[line_id])


@dataclass(frozen=True)
class BoundaryReport:
    s_prime: FrozenSet[int]
    s: FrozenSet[int]
    widths: Dict[int, int] = field(default_factory=dict)


@dataclass(frozen=True)
class ProofClassification:
    tree_like: bool
    regular: bool
    size: int
    maps: Dict[int, MapClassification]


def derivation_graph(proof: Proof) -> DerivationGraph:
    antecedents = {line.id: line.antecedents for line in proof.lines}
    consumers: Dict[int, List[int]] = {line.id: [] for line in proof.lines}
    for line in proof.lines:
        for ante in line.antecedents:
            if ante in consumers:
                consumers[ante].append(line.id)
    return DerivationGraph(antecedents, consumers)


def is_tree_like(proof: Proof) -> bool:
    """Every line is used at most once as an antecedent."""
    graph = derivation_graph(proof)
    return all(graph.out_degree(line.id) <= 1 for line in proof.lines)


def is_regular(proof: Proof, s: Optional[Iterable[int]] = None) -> bool:
    """
    No leaf-to-sink path resolves on the same variable of s twice.

    Args:
        proof: a checked proof
        s: pivot variables to track; defaults to every existential variable
    """
    tracked = set(proof.qbf.existentials if s is None else s)
    if not tracked:
        return True
    bit = {v: 1 << i for i, v in enumerate(sorted(tracked))}
    below: Dict[int, int] = {}
    for line in proof.lines:
        j = line.justification
        if isinstance(j, Axiom):
            below[line.id] = 0
            continue
        used = below[j.left] | below[j.right]
        mask = bit.get(j.pivot, 0)
        if used & mask:
            logger.debug(f"Line {line.id} resolves again on {j.pivot}")
            return False
        below[line.id] = used | mask
    return True


def uci(proof: Proof, line_id: int, grouping: Mapping[int, int]) -> FrozenSet[int]:
    """Group labels of the axiom clauses among the leaves of line_id's sub-derivation."""
    lines = {line.id for line in proof.lines}
    if line_id not in lines:
        raise MResError(f"no line with id {line_id}")
    leaves = leaf_clauses(proof)[line_id]
    return frozenset(grouping[i] for i in leaves if i in grouping)


def uci_all(proof: Proof, grouping: Mapping[int, int]) -> Dict[int, FrozenSet[int]]:
    leaves = leaf_clauses(proof)
    return {line_id: frozenset(grouping[i] for i in idx if i in grouping) for line_id, idx in leaves.items()}


def is_interval(labels: Iterable[int]) -> bool:
    """True iff labels form a contiguous integer range (the empty set counts)."""
    labels = set(labels)
    if not labels:
        return True
    return max(labels) - min(labels) + 1 == len(labels)


def _require_materialised(proof: Proof):
    if not all(line.materialised for line in proof.lines):
        raise UncheckedProofError("this analysis needs the clauses and maps derived by check_proof")


def boundary_sets(proof: Proof, v: Iterable[int]) -> BoundaryReport:
    """
    s_prime: lines whose clause avoids v and that reach the sink through
    such lines. s: members of s_prime with an antecedent outside s_prime,
    or with no antecedents at all.
    """
    _require_materialised(proof)
    avoid = set(v)
    lines = proof.index()
    consumers = derivation_graph(proof).consumers

    def clean(line_id: int) -> bool:
        return not (lines[line_id].clause.variables & avoid)

    s_prime: Set[int] = set()
    if clean(proof.sink):
        s_prime.add(proof.sink)
        queue = deque([proof.sink])
        while queue:
            for ante in lines[queue.popleft()].antecedents:
                if ante not in s_prime and clean(ante):
                    s_prime.add(ante)
                    queue.append(ante)
    s = set()
    for line_id in s_prime:
        antes = lines[line_id].antecedents
        if not antes or any(a not in s_prime for a in antes):
            s.add(line_id)
    widths = {line_id: len(lines[line_id].clause) for line_id in sorted(s)}
    return BoundaryReport(frozenset(s_prime), frozenset(s), widths)


def classify_proof(proof: Proof, regular_vars: Optional[Iterable[int]] = None) -> ProofClassification:
    strategy = extract_strategy(proof) if proof.verified else {}
    return ProofClassification(
        tree_like=is_tree_like(proof),
        regular=is_regular(proof, regular_vars),
        size=len(proof.lines),
        maps={u: classify(m) for u, m in sorted(strategy.items())},
    )


def merge_map_embedding(proof: Proof) -> List[str]:
    """
    Problems with embedding the sink's maps into the derivation graph:
    every instruction id must be a line id, and every Node must sit at a
    resolution line resolving on the Node's query variable.
    """
    lines = proof.index()
    problems = []
    for u, m in sorted(extract_strategy(proof).items()):
        for i in m.reachable():
            if i not in lines:
                problems.append(f"map for {u}: instruction {i} is not a line id")
                continue
            ins = m.instructions[i]
            if isinstance(ins, Node):
                j = lines[i].justification
                if not isinstance(j, Resolution) or j.pivot != ins.query:
                    problems.append(f"map for {u}: node {i} queries {ins.query} but line {i} does not resolve on it")
    return problems


def horn_violations(proof: Proof) -> List[int]:
    """Lines whose existential clause has more than one positive literal."""
    _require_materialised(proof)
    prefix = proof.qbf.prefix
    return [line.id for line in proof.lines
            if sum(1 for l in line.clause if l > 0 and prefix.is_existential(l)) > 1]

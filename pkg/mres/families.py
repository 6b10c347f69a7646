"""
Generators for the benchmark formula families.

Variable numbering is fixed per family so proofs and tests can name
variables by role and index:

    equality   x_i = i, u_i = n+i, t_i = 2n+i
    qparity    x_i = i, z = n+1, t_i = n+1+i        (lqparity likewise)
    cr         x_ij = (i-1)n+j, z = n^2+1, a_i = n^2+1+i, b_j = n^2+n+1+j
    kbkf_lq    d_i = 3(i-1)+1, e_i = 3(i-1)+2, x_i = 3(i-1)+3, f_j = 3n+j
"""
import logging
from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations
from typing import Dict, List, Mapping, Optional, Sequence, Union

from .errors import MResError
from .formats.qdimacs import Annotations, annotation_lines, emit_qdimacs
from .qbf import QBF, Clause, Prefix, Quantifier

logger = logging.getLogger(__name__)


class FamilyId(str, Enum):
    EQUALITY = "equality"
    QPARITY = "qparity"
    LQPARITY = "lqparity"
    CR = "cr"
    KBKF_LQ = "kbkf_lq"

    def __str__(self):
        return self.value

    @property
    def min_n(self) -> int:
        return 2 if self == FamilyId.KBKF_LQ else 1


@dataclass(frozen=True)
class FamilyInstance:
    family: FamilyId
    n: int
    qbf: QBF
    var_roles: Dict[str, List[int]] = field(compare=False)
    clause_groups: Dict[str, List[int]] = field(compare=False)

    def var(self, role: str, index: int = 1) -> int:
        """Variable id of role[index], 1-based (e.g. var('T', 2) is t_2)."""
        return self.var_roles[role][index - 1]


class _Builder:
    """Collects clauses with their group labels in matrix order."""

    def __init__(self):
        self.clauses: List[Clause] = []
        self.groups: Dict[str, List[int]] = {}

    def add(self, group: str, literals: Sequence[int]):
        self.clauses.append(Clause(tuple(literals)))
        self.groups.setdefault(group, []).append(len(self.clauses))


def parity_clauses(ys: Sequence[int]) -> List[List[int]]:
    """
    parity^c(y_1..y_k): one clause per odd-size S of [k], y_i negated iff i in S.

    Subsets are taken in increasing binary order with bit i-1 standing for y_i.
    """
    k = len(ys)
    result = []
    for mask in range(1, 1 << k):
        if bin(mask).count("1") % 2 == 1:
            result.append([-y if mask >> i & 1 else y for i, y in enumerate(ys)])
    return result


def hat_parity_clauses(ys: Sequence[int], z: int) -> List[List[int]]:
    result = []
    for clause in parity_clauses(ys):
        result.append(clause + [z])
        result.append(clause + [-z])
    return result


def _equality(n: int):
    xs = list(range(1, n + 1))
    us = [n + i for i in xs]
    ts = [2 * n + i for i in xs]
    b = _Builder()
    for i in range(n):
        b.add(f"short_{i + 1}_0", [xs[i], us[i], ts[i]])
        b.add(f"short_{i + 1}_1", [-xs[i], -us[i], ts[i]])
    b.add("long", [-t for t in ts])
    prefix = Prefix.from_blocks([(Quantifier.EXISTS, xs), (Quantifier.FORALL, us), (Quantifier.EXISTS, ts)])
    return prefix, b, {"X": xs, "U": us, "T": ts}


def _parity(n: int, long_distance: bool):
    xs = list(range(1, n + 1))
    z = n + 1
    ts = [n + 1 + i for i in xs]
    expand = (lambda ys: hat_parity_clauses(ys, z)) if long_distance else parity_clauses
    b = _Builder()
    for i in range(1, n + 1):
        ys = [xs[0], ts[0]] if i == 1 else [ts[i - 2], xs[i - 1], ts[i - 1]]
        for clause in expand(ys):
            b.add(f"phi_{i}", clause)
    b.add(f"phi_{n + 1}", [ts[-1], z])
    b.add(f"phi_{n + 1}", [-ts[-1], -z])
    prefix = Prefix.from_blocks([(Quantifier.EXISTS, xs), (Quantifier.FORALL, [z]), (Quantifier.EXISTS, ts)])
    return prefix, b, {"X": xs, "Z": [z], "T": ts}


def _cr(n: int):
    def x(i, j):
        return (i - 1) * n + j
    z = n * n + 1
    a = [n * n + 1 + i for i in range(1, n + 1)]
    bs = [n * n + n + 1 + j for j in range(1, n + 1)]
    b = _Builder()
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            b.add(f"A_{i}_{j}", [x(i, j), z, a[i - 1]])
            b.add(f"B_{i}_{j}", [-x(i, j), -z, bs[j - 1]])
    b.add("L_A", [-v for v in a])
    b.add("L_B", [-v for v in bs])
    xs = [x(i, j) for i in range(1, n + 1) for j in range(1, n + 1)]
    prefix = Prefix.from_blocks([(Quantifier.EXISTS, xs), (Quantifier.FORALL, [z]),
                                 (Quantifier.EXISTS, a), (Quantifier.EXISTS, bs)])
    return prefix, b, {"X": xs, "Z": [z], "A": a, "B": bs}


def _kbkf_lq(n: int):
    ds = [3 * i + 1 for i in range(n)]
    es = [3 * i + 2 for i in range(n)]
    xs = [3 * i + 3 for i in range(n)]
    fs = [3 * n + j for j in range(1, n + 1)]
    neg_f = [-f for f in fs]
    b = _Builder()
    b.add("A_0", [-ds[0], -es[0]] + neg_f)
    for i in range(n):
        nxt = [-ds[i + 1], -es[i + 1]] if i + 1 < n else []
        b.add(f"Ad_{i + 1}", [ds[i], xs[i]] + nxt + neg_f)
        b.add(f"Ae_{i + 1}", [es[i], -xs[i]] + nxt + neg_f)
    for i in range(n):
        tail = [-f for f in fs[i + 1:]]
        b.add(f"B0_{i + 1}", [xs[i], fs[i]] + tail)
        b.add(f"B1_{i + 1}", [-xs[i], fs[i]] + tail)
    blocks = []
    for i in range(n):
        blocks.append((Quantifier.EXISTS, [ds[i], es[i]]))
        blocks.append((Quantifier.FORALL, [xs[i]]))
    blocks.append((Quantifier.EXISTS, fs))
    return Prefix.from_blocks(blocks), b, {"D": ds, "E": es, "X": xs, "F": fs}


def gen_family(family: Union[FamilyId, str], n: int) -> FamilyInstance:
    """
    Build the n-th member of a formula family.

    Args:
        family: family name or FamilyId
        n: family parameter (n >= 2 for kbkf_lq, n >= 1 otherwise)

    Returns:
        FamilyInstance: formula plus role and clause-group metadata
    """
    try:
        family = FamilyId(family)
    except ValueError:
        raise MResError(f"unknown family {family!r}; expected one of {', '.join(f.value for f in FamilyId)}")
    if not isinstance(n, int) or n < family.min_n:
        raise MResError(f"{family} requires n >= {family.min_n}, got {n}")

    if family == FamilyId.EQUALITY:
        prefix, builder, roles = _equality(n)
    elif family in (FamilyId.QPARITY, FamilyId.LQPARITY):
        prefix, builder, roles = _parity(n, long_distance=family == FamilyId.LQPARITY)
    elif family == FamilyId.CR:
        prefix, builder, roles = _cr(n)
    else:
        prefix, builder, roles = _kbkf_lq(n)

    qbf = QBF(prefix, tuple(builder.clauses))
    logger.debug(f"Generated {family}[{n}]: {qbf.num_vars} vars, {len(qbf.matrix)} clauses")
    return FamilyInstance(family, n, qbf, roles, builder.groups)


def emit_instance(instance: FamilyInstance) -> str:
    """QDIMACS text with `c family:`, `c role:` and `c group:` annotations."""
    comments = annotation_lines(instance.family.value, instance.n, instance.var_roles, instance.clause_groups)
    return emit_qdimacs(instance.qbf, comments)


def count_clauses(family: Union[FamilyId, str], n: int) -> int:
    """Clause count obtained by enumerating each family's defining index sets."""
    family = FamilyId(family)

    def odd_subsets(k):
        return sum(1 for size in range(1, k + 1, 2) for _ in combinations(range(k), size))

    if family == FamilyId.EQUALITY:
        return sum(1 for _ in range(n) for _sign in (0, 1)) + 1
    if family == FamilyId.QPARITY:
        return odd_subsets(2) + sum(odd_subsets(3) for _ in range(2, n + 1)) + 2
    if family == FamilyId.LQPARITY:
        return 2 * odd_subsets(2) + sum(2 * odd_subsets(3) for _ in range(2, n + 1)) + 2
    if family == FamilyId.CR:
        return sum(2 for _i in range(n) for _j in range(n)) + 2
    return 1 + sum(len(("Ad", "Ae", "B0", "B1")) for _ in range(n))


def uci_grouping(source: Union[FamilyInstance, Annotations, Mapping[str, Sequence[int]]],
                 scheme: str) -> Dict[int, int]:
    """
    Map clause indices to integer group labels for UCI.

    Scheme "phi" sends every clause of phi_i to i (parity families).
    Scheme "A" sends A_0 to 0 and Ad_i, Ae_i to i (kbkf_lq); B clauses stay ungrouped.
    """
    if isinstance(source, FamilyInstance):
        groups = source.clause_groups
    elif isinstance(source, Annotations):
        groups = source.groups
    else:
        groups = source

    grouping: Dict[int, int] = {}
    for label, indices in groups.items():
        index = _scheme_label(label, scheme)
        if index is None:
            continue
        for clause_index in indices:
            grouping[clause_index] = index
    if not grouping:
        raise MResError(f"no clause groups match scheme {scheme!r}")
    return grouping


def _scheme_label(label: str, scheme: str) -> Optional[int]:
    head, _, tail = label.partition("_")
    if scheme == "phi":
        return int(tail) if head == "phi" and tail.isdigit() else None
    if scheme == "A":
        if head in ("A", "Ad", "Ae") and tail.isdigit():
            return int(tail)
        return None
    raise MResError(f"unknown grouping scheme {scheme!r}; expected 'phi' or 'A'")


def intended_strategy(instance: FamilyInstance):
    """
    The documented countermodel of each family as merge maps, built by merges.

    equality: u_i = x_i; parity families: z = x_1 xor ... xor x_n;
    kbkf_lq: x_i = d_i. CR has no single intended countermodel here.
    """
    from .mergemap import IdSupply, make_leaf, merge

    supply = IdSupply()
    family = instance.family
    if family == FamilyId.EQUALITY:
        strategy = {}
        for x, u in zip(instance.var_roles["X"], instance.var_roles["U"]):
            low, high = make_leaf(u, supply.next(), 0), make_leaf(u, supply.next(), 1)
            strategy[u] = merge(u, supply.next(), x, low, high)
        return strategy
    if family in (FamilyId.QPARITY, FamilyId.LQPARITY):
        z = instance.var("Z")
        return {z: parity_map(z, instance.var_roles["X"], supply)}
    if family == FamilyId.KBKF_LQ:
        strategy = {}
        for d, x in zip(instance.var_roles["D"], instance.var_roles["X"]):
            low, high = make_leaf(x, supply.next(), 0), make_leaf(x, supply.next(), 1)
            strategy[x] = merge(x, supply.next(), d, low, high)
        return strategy
    raise MResError(f"no intended strategy for {family}")


def parity_map(owner: int, xs: Sequence[int], supply=None):
    """Merge map computing x_1 xor ... xor x_k, built by nested merges (last variable at the root)."""
    from .mergemap import IdSupply, make_leaf, merge

    supply = supply or IdSupply()
    even = make_leaf(owner, supply.next(), 0)
    odd = make_leaf(owner, supply.next(), 1)
    for x in xs:
        even, odd = (merge(owner, supply.next(), x, even, odd),
                     merge(owner, supply.next(), x, odd, even))
    return even


def truth_assignment_check(family: Union[FamilyId, str], n: int, strategy, cap: Optional[int] = None) -> bool:
    """
    True iff strategy is a countermodel of the family member.

    Args:
        family: family name
        n: family parameter
        strategy: universal var -> MergeMap or TruthTable
        cap: maximum existential count for the exhaustive check

    Returns:
        bool: whether every existential play is refuted
    """
    from .proof import verify_countermodel

    instance = gen_family(family, n)
    result = verify_countermodel(instance.qbf, strategy, cap=cap)
    return result.winning

"""
Brute-force oracles over explicit Boolean functions.

Truth tables index assignments in binary order with the first variable as
the most significant bit. Decision-tree size counts leaves.
"""
import logging
from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .config import DEFAULT_ENUM_CAP, DEFAULT_EXHAUSTIVE_CAP
from .errors import CapExceededError, MResError, PartialMapError, StrategyShapeError, UnboundVariableError
from .evaluation import UNSET, falsified_any, index_bits, iter_chunks, map_codes, map_over_chunks
from .families import FamilyId, gen_family
from .mergemap import IdSupply, MergeMap, evaluate, make_leaf, merge
from .qbf import QBF, left_of

logger = logging.getLogger(__name__)

MAX_TABLE_VARS = 24
MAX_DT_VARS = 12


@dataclass(frozen=True, eq=False)
class TruthTable:
    vars: Tuple[int, ...]
    bits: np.ndarray

    def __post_init__(self):
        variables = tuple(self.vars)
        if len(variables) > MAX_TABLE_VARS:
            raise CapExceededError(f"truth tables support at most {MAX_TABLE_VARS} variables, got {len(variables)}")
        if len(set(variables)) != len(variables):
            raise MResError(f"duplicate variables in truth table: {variables}")
        bits = np.asarray(self.bits, dtype=np.uint8).reshape(-1)
        if bits.size != 1 << len(variables):
            raise MResError(f"truth table over {len(variables)} variables needs {1 << len(variables)} bits, "
                            f"got {bits.size}")
        if bits.size and bits.max() > 1:
            raise MResError("truth table bits must be 0 or 1")
        bits.setflags(write=False)
        object.__setattr__(self, "vars", variables)
        object.__setattr__(self, "bits", bits)

    def __eq__(self, other):
        if not isinstance(other, TruthTable):
            return NotImplemented
        return self.vars == other.vars and np.array_equal(self.bits, other.bits)

    __hash__ = None

    def __repr__(self):
        return f"TruthTable(vars={list(self.vars)}, bits={self.bit_string()})"

    @property
    def arity(self) -> int:
        return len(self.vars)

    def bit_string(self) -> str:
        return "".join(str(int(b)) for b in self.bits)

    def is_constant(self) -> bool:
        return bool(self.bits.min() == self.bits.max())

    def complement(self) -> "TruthTable":
        return TruthTable(self.vars, 1 - self.bits)

    def evaluate(self, a: Mapping[int, int]) -> int:
        index = 0
        for v in self.vars:
            if v not in a:
                raise UnboundVariableError(v)
            index = (index << 1) | (1 if a[v] else 0)
        return int(self.bits[index])

    def restrict(self, var: int, value: int) -> "TruthTable":
        """Cofactor f|var=value over the remaining variables."""
        if var not in self.vars:
            raise MResError(f"variable {var} is not in the table")
        axis = self.vars.index(var)
        cube = self.bits.reshape((2,) * self.arity)
        rest = tuple(v for v in self.vars if v != var)
        return TruthTable(rest, np.take(cube, value, axis=axis).reshape(-1))

    def depends_on(self, var: int) -> bool:
        return not np.array_equal(self.restrict(var, 0).bits, self.restrict(var, 1).bits)


def table_from_function(variables: Sequence[int], func: Callable[[Dict[int, int]], int]) -> TruthTable:
    bits = [func(dict(zip(variables, values))) for values in product((0, 1), repeat=len(variables))]
    return TruthTable(tuple(variables), np.array(bits, dtype=np.uint8))


def table_from_map(m: MergeMap, domain: Sequence[int]) -> TruthTable:
    """
    Tabulate a total merge map over domain.

    Raises:
        PartialMapError: some assignment reaches a * leaf
        MResError: the map queries a variable outside domain
    """
    domain = tuple(domain)
    if len(domain) > MAX_TABLE_VARS:
        raise CapExceededError(f"domain of {len(domain)} variables exceeds {MAX_TABLE_VARS}")
    outside = sorted(m.queried_vars() - set(domain))
    if outside:
        raise MResError(f"map for {m.owner} queries {outside}, outside the domain")
    chunks = [map_codes(m, chunk.columns, len(chunk)) for chunk in iter_chunks(domain)]
    codes = np.concatenate(chunks) if chunks else np.zeros(0, dtype=np.uint8)
    if (codes == UNSET).any():
        raise PartialMapError(f"map for {m.owner} is undefined on some assignment")
    return TruthTable(domain, codes)


def parity_table(n: int, variables: Optional[Sequence[int]] = None) -> TruthTable:
    """bits[i] = popcount(i) mod 2 over variables (default 1..n)."""
    if not 0 <= n <= MAX_TABLE_VARS:
        raise CapExceededError(f"parity table size {n} outside 0..{MAX_TABLE_VARS}")
    variables = tuple(variables) if variables is not None else tuple(range(1, n + 1))
    indices = np.arange(1 << n, dtype=np.int64)
    bits = index_bits(indices, n).sum(axis=1) % 2 if n else np.zeros(1, dtype=np.int64)
    return TruthTable(variables, bits.astype(np.uint8))


@dataclass(frozen=True)
class DecisionTreeWitness:
    """A decision tree: leaf when var is None, else a query with two subtrees."""
    value: Optional[int] = None
    var: Optional[int] = None
    if0: Optional["DecisionTreeWitness"] = field(default=None, repr=False)
    if1: Optional["DecisionTreeWitness"] = field(default=None, repr=False)

    @property
    def is_leaf(self) -> bool:
        return self.var is None

    def leaf_count(self) -> int:
        if self.is_leaf:
            return 1
        return self.if0.leaf_count() + self.if1.leaf_count()

    def paths(self) -> List[Tuple[int, ...]]:
        """Queried-variable sequence of every root-to-leaf path, if0 side first."""
        if self.is_leaf:
            return [()]
        return [(self.var,) + p for child in (self.if0, self.if1) for p in child.paths()]

    def evaluate(self, a: Mapping[int, int]) -> int:
        node = self
        while not node.is_leaf:
            if node.var not in a:
                raise UnboundVariableError(node.var)
            node = node.if1 if a[node.var] else node.if0
        return node.value

    def depth_range(self) -> Tuple[int, int]:
        depths = [len(p) for p in self.paths()]
        return min(depths), max(depths)


def map_from_witness(owner: int, witness: DecisionTreeWitness, supply: Optional[IdSupply] = None) -> MergeMap:
    """Tree-shaped merge map for owner computing the same function as witness."""
    supply = supply or IdSupply()
    if witness.is_leaf:
        return make_leaf(owner, supply.next(), witness.value)
    m0 = map_from_witness(owner, witness.if0, supply)
    m1 = map_from_witness(owner, witness.if1, supply)
    return merge(owner, supply.next(), witness.var, m0, m1)


def _relevant(table: TruthTable) -> TruthTable:
    """Drop variables the function does not depend on."""
    for v in table.vars:
        if not table.depends_on(v):
            return _relevant(table.restrict(v, 0))
    return table


def min_dt_size(f: TruthTable) -> Tuple[int, DecisionTreeWitness]:
    """
    Minimal decision-tree size (leaf count) with a witness tree.

    Memoised over restrictions keyed by their free variables and bits.
    """
    if f.arity > MAX_DT_VARS:
        raise CapExceededError(f"min_dt_size supports at most {MAX_DT_VARS} variables, got {f.arity}")
    memo: Dict[Tuple[Tuple[int, ...], bytes], Tuple[int, DecisionTreeWitness]] = {}

    def solve(table: TruthTable) -> Tuple[int, DecisionTreeWitness]:
        table = _relevant(table)
        if table.arity == 0:
            return 1, DecisionTreeWitness(value=int(table.bits[0]))
        key = (table.vars, table.bits.tobytes())
        if key in memo:
            return memo[key]
        best = None
        for v in table.vars:
            size0, tree0 = solve(table.restrict(v, 0))
            if best is not None and size0 + 1 >= best[0]:
                continue
            size1, tree1 = solve(table.restrict(v, 1))
            if best is None or size0 + size1 < best[0]:
                best = (size0 + size1, DecisionTreeWitness(var=v, if0=tree0, if1=tree1))
        memo[key] = best
        return best

    result = solve(f)
    logger.debug(f"min_dt_size over {f.arity} vars: {result[0]} leaves, {len(memo)} memo entries")
    return result


@dataclass(frozen=True)
class _CandidateSpace:
    universals: Tuple[int, ...]
    domains: Tuple[Tuple[int, ...], ...]
    offsets: Tuple[int, ...]
    total_bits: int
    group_vars: Tuple[int, ...]
    allowed: np.ndarray


def _candidate_space(qbf: QBF, cap: int, exhaustive_cap: int) -> _CandidateSpace:
    universals = qbf.universals
    domains = tuple(left_of(qbf.prefix, u) for u in universals)
    sizes = [1 << len(d) for d in domains]
    total_bits = sum(sizes)
    if total_bits >= 63 or (1 << total_bits) > cap:
        raise CapExceededError(f"2^{total_bits} candidate strategies exceed the enumeration cap {cap}")
    existentials = qbf.existentials
    if len(existentials) > exhaustive_cap:
        raise CapExceededError(f"{len(existentials)} existential variables exceed the exhaustive cap {exhaustive_cap}")
    k = len(universals)
    if (1 << k) > 62:
        raise CapExceededError(f"{k} universal variables are too many to enumerate")

    group_vars = domains[-1] if domains else ()
    n_rest = len(existentials) - len(group_vars)
    # allowed[g] bit nu is set iff every alpha restricting to group g is
    # refuted when the universals play the bits of nu
    allowed = np.full(1 << len(group_vars), (1 << (1 << k)) - 1, dtype=np.int64)
    all_clauses = range(1, len(qbf.matrix) + 1)
    for chunk in iter_chunks(existentials):
        size = len(chunk)
        groups = np.arange(chunk.start, chunk.stop, dtype=np.int64) >> n_rest
        for nu in range(1 << k):
            codes = {u: np.full(size, (nu >> (k - 1 - pos)) & 1, dtype=np.uint8)
                     for pos, u in enumerate(universals)}
            refuted = falsified_any(qbf, all_clauses, chunk.columns, codes, size)
            failing = np.unique(groups[~refuted])
            allowed[failing] &= ~np.int64(1 << nu)
    offsets = tuple(int(x) for x in np.cumsum([0] + sizes[:-1]))
    return _CandidateSpace(universals, domains, offsets, total_bits, group_vars, allowed)


def enumerate_countermodels(qbf: QBF, cap: Optional[int] = None, threads: int = 1,
                            exhaustive_cap: Optional[int] = None) -> Iterator[Dict[int, TruthTable]]:
    """
    Yield every winning strategy as one truth table per universal.

    Candidates are the concatenated tables in prefix order of the
    universals, each table in binary order; they are visited in increasing
    binary order of that concatenation.

    Raises:
        CapExceededError: candidate count above cap, or too many existentials
    """
    cap = DEFAULT_ENUM_CAP if cap is None else cap
    exhaustive_cap = DEFAULT_EXHAUSTIVE_CAP if exhaustive_cap is None else exhaustive_cap
    space = _candidate_space(qbf, cap, exhaustive_cap)
    k = len(space.universals)
    g_bits = len(space.group_vars)

    def winners(start: int, stop: int) -> np.ndarray:
        candidates = np.arange(start, stop, dtype=np.int64)
        bits = index_bits(candidates, space.total_bits).astype(np.int64)
        ok = np.ones(stop - start, dtype=bool)
        for g in range(1 << g_bits):
            nu = np.zeros(stop - start, dtype=np.int64)
            for pos, (domain, offset) in enumerate(zip(space.domains, space.offsets)):
                column = offset + (g >> (g_bits - len(domain)))
                nu |= bits[:, column] << (k - 1 - pos)
            ok &= ((np.int64(space.allowed[g]) >> nu) & 1).astype(bool)
            if not ok.any():
                break
        return candidates[ok]

    total = 1 << space.total_bits
    logger.info(f"Enumerating {total} candidate strategies over {k} universals")
    found = 0
    for chunk_winners in map_over_chunks(winners, total, threads):
        for candidate in chunk_winners:
            found += 1
            yield _decode(space, int(candidate))
    logger.info(f"Found {found} countermodels")


def _decode(space: _CandidateSpace, candidate: int) -> Dict[int, TruthTable]:
    bits = index_bits(np.array([candidate], dtype=np.int64), space.total_bits)[0]
    strategy = {}
    for u, domain, offset in zip(space.universals, space.domains, space.offsets):
        strategy[u] = TruthTable(domain, bits[offset:offset + (1 << len(domain))])
    return strategy


def check_antisymmetric_property(strategy: Mapping[int, object], n: int) -> bool:
    """
    On KBKF-lq[n]: for all a in {0,1}^n and i in [n], with d_j = a_j and
    e_j = not a_j for j <= i, the strategy for x_i must return a_i.
    """
    instance = gen_family(FamilyId.KBKF_LQ, n)
    ds, es, xs = instance.var_roles["D"], instance.var_roles["E"], instance.var_roles["X"]
    for x in xs:
        if x not in strategy:
            raise StrategyShapeError(f"strategy has no entry for x variable {x}")
    for a in product((0, 1), repeat=n):
        for i in range(1, n + 1):
            alpha = {}
            for j in range(i):
                alpha[ds[j]] = a[j]
                alpha[es[j]] = 1 - a[j]
            entry = strategy[xs[i - 1]]
            try:
                value = evaluate(entry, alpha) if isinstance(entry, MergeMap) else entry.evaluate(alpha)
            except UnboundVariableError as e:
                raise StrategyShapeError(f"strategy for {xs[i - 1]} reads {e.var}, outside its left set")
            if value != a[i - 1]:
                logger.debug(f"Antisymmetric property fails at a={a}, i={i}")
                return False
    return True


def completion_blind_pairs(n: int) -> Iterator[Tuple[int, int, Dict[int, int], Dict[int, int]]]:
    """
    For CR_n (n >= 2), yield (k, l, sigma0, sigma1): total existential
    assignments where row k is all ones, column l all zeros, a_k = b_l = 0,
    every other a_i, b_j is 1, and the cells outside row k and column l
    range over all values; sigma0 and sigma1 differ only in x_kl.

    Every countermodel must give different answers on each pair.
    """
    if n < 2:
        raise MResError("completion pairs need n >= 2")
    instance = gen_family(FamilyId.CR, n)
    a_vars, b_vars = instance.var_roles["A"], instance.var_roles["B"]

    def x(i, j):
        return (i - 1) * n + j

    for k in range(1, n + 1):
        for l in range(1, n + 1):
            free = [x(i, j) for i in range(1, n + 1) for j in range(1, n + 1) if i != k and j != l]
            for values in product((0, 1), repeat=len(free)):
                sigma = dict(zip(free, values))
                for j in range(1, n + 1):
                    if j != l:
                        sigma[x(k, j)] = 1
                for i in range(1, n + 1):
                    if i != k:
                        sigma[x(i, l)] = 0
                for i, v in enumerate(a_vars, start=1):
                    sigma[v] = 0 if i == k else 1
                for j, v in enumerate(b_vars, start=1):
                    sigma[v] = 0 if j == l else 1
                yield k, l, {**sigma, x(k, l): 0}, {**sigma, x(k, l): 1}

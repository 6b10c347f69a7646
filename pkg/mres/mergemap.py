"""
Merge maps: instruction-numbered deterministic branching programs.

A merge map for universal variable u is a store of numbered instructions.
Evaluation starts at the leading (largest) id; a Node queries an
existential variable and jumps to a smaller id, a Leaf returns 0, 1 or
None (the undefined value *).
"""
import logging
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Dict, FrozenSet, List, Mapping, Optional, Union

from .errors import FreshIdError, InconsistentStoresError, MergeMapError, UnboundVariableError
from .qbf import Assignment, Prefix

logger = logging.getLogger(__name__)

Value = Optional[int]
STAR: Value = None


def value_str(b: Value) -> str:
    return "*" if b is None else str(b)


def parse_value(token: str) -> Value:
    if token == "*":
        return STAR
    if token in ("0", "1"):
        return int(token)
    raise MergeMapError(f"leaf value must be *, 0 or 1, got {token!r}")


@dataclass(frozen=True)
class Leaf:
    value: Value

    def __post_init__(self):
        if self.value not in (None, 0, 1):
            raise MergeMapError(f"leaf value must be None, 0 or 1, got {self.value!r}")


@dataclass(frozen=True)
class Node:
    query: int
    if0: int
    if1: int


Instruction = Union[Leaf, Node]


@dataclass(frozen=True)
class MapClassification:
    is_tree: bool
    is_read_once: bool
    queried_vars: FrozenSet[int]
    size: int


@dataclass(frozen=True, eq=False)
class MergeMap:
    owner: int
    instructions: Mapping[int, Instruction]
    leading: int = field(default=None)

    def __post_init__(self):
        store = dict(sorted(self.instructions.items()))
        if not store:
            raise MergeMapError("a merge map needs at least one instruction")
        highest = max(store)
        leading = highest if self.leading is None else self.leading
        if leading != highest:
            raise MergeMapError(f"leading instruction {leading} is not the largest id {highest}")
        for i, ins in store.items():
            if not isinstance(i, int) or i < 0:
                raise MergeMapError(f"invalid instruction id {i!r}")
            if isinstance(ins, Node):
                for child in (ins.if0, ins.if1):
                    if child >= i:
                        raise MergeMapError(f"instruction {i} jumps forward to {child}")
                    if child not in store:
                        raise MergeMapError(f"instruction {i} jumps to missing instruction {child}")
            elif not isinstance(ins, Leaf):
                raise MergeMapError(f"instruction {i} is neither a Leaf nor a Node")
        object.__setattr__(self, "instructions", MappingProxyType(store))
        object.__setattr__(self, "leading", leading)

    def __eq__(self, other):
        if not isinstance(other, MergeMap):
            return NotImplemented
        return (self.owner == other.owner and self.leading == other.leading
                and dict(self.instructions) == dict(other.instructions))

    __hash__ = None

    def __repr__(self):
        body = ", ".join(f"{i}:{_ins_str(ins)}" for i, ins in self.instructions.items())
        return f"MergeMap(owner={self.owner}, [{body}])"

    @property
    def root(self) -> Instruction:
        return self.instructions[self.leading]

    def is_trivial(self) -> bool:
        """Leading instruction is a * leaf."""
        return isinstance(self.root, Leaf) and self.root.value is None

    def is_simple(self) -> bool:
        return isinstance(self.root, Leaf)

    def is_complex(self) -> bool:
        return isinstance(self.root, Node)

    def reachable(self) -> List[int]:
        """Ids reachable from the leading instruction, ascending."""
        seen = {self.leading}
        stack = [self.leading]
        while stack:
            ins = self.instructions[stack.pop()]
            if isinstance(ins, Node):
                for child in (ins.if0, ins.if1):
                    if child not in seen:
                        seen.add(child)
                        stack.append(child)
        return sorted(seen)

    def normalized(self) -> "MergeMap":
        """The reachable core of the store."""
        keep = self.reachable()
        if len(keep) == len(self.instructions):
            return self
        return MergeMap(self.owner, {i: self.instructions[i] for i in keep})

    def queried_vars(self) -> FrozenSet[int]:
        return frozenset(self.instructions[i].query for i in self.reachable()
                         if isinstance(self.instructions[i], Node))

    def validate_queries(self, prefix: Prefix):
        """Every queried variable must precede the owner in the prefix."""
        for v in self.queried_vars():
            if not prefix.is_existential(v) or not prefix.precedes(v, self.owner):
                raise MergeMapError(f"map for {self.owner} queries {v}, which does not precede it")


def _ins_str(ins: Instruction) -> str:
    if isinstance(ins, Leaf):
        return value_str(ins.value)
    return f"{ins.query}?{ins.if0}:{ins.if1}"


class IdSupply:
    """Monotone instruction id source; maps built from one supply are mutually consistent."""

    def __init__(self, start: int = 1):
        self._next = start

    def next(self) -> int:
        value = self._next
        self._next += 1
        return value

    def peek(self) -> int:
        return self._next


def make_leaf(owner: int, instruction_id: int, b: Value) -> MergeMap:
    return MergeMap(owner, {instruction_id: Leaf(b)})


def trivial(owner: int, instruction_id: int) -> MergeMap:
    return make_leaf(owner, instruction_id, STAR)


def evaluate(m: MergeMap, a: Assignment) -> Value:
    """
    Follow instructions from the leading id under assignment a.

    Raises:
        UnboundVariableError: a traversed Node queries a variable a does not bind
    """
    ins = m.instructions[m.leading]
    while isinstance(ins, Node):
        value = a.get(ins.query)
        if value is None:
            raise UnboundVariableError(ins.query)
        ins = m.instructions[ins.if1 if value else ins.if0]
    return ins.value


def _same_owner(m1: MergeMap, m2: MergeMap):
    if m1.owner != m2.owner:
        raise MergeMapError(f"maps belong to different universals ({m1.owner} and {m2.owner})")


def first_conflict(m1: MergeMap, m2: MergeMap) -> Optional[int]:
    """Smallest shared id with differing instructions, or None."""
    _same_owner(m1, m2)
    shared = sorted(m1.instructions.keys() & m2.instructions.keys())
    for i in shared:
        if m1.instructions[i] != m2.instructions[i]:
            return i
    return None


def consistent(m1: MergeMap, m2: MergeMap) -> bool:
    """m1 ⋈ m2: every shared instruction id carries the same instruction."""
    return first_conflict(m1, m2) is None


def isomorphic(m1: MergeMap, m2: MergeMap) -> bool:
    """A bijection of reachable ids maps one store onto the other."""
    _same_owner(m1, m2)
    forward: Dict[int, int] = {m1.leading: m2.leading}
    backward: Dict[int, int] = {m2.leading: m1.leading}
    stack = [(m1.leading, m2.leading)]
    while stack:
        i, j = stack.pop()
        a, b = m1.instructions[i], m2.instructions[j]
        if isinstance(a, Leaf) or isinstance(b, Leaf):
            if a != b:
                return False
            continue
        if a.query != b.query:
            return False
        for ci, cj in ((a.if0, b.if0), (a.if1, b.if1)):
            if ci in forward or cj in backward:
                if forward.get(ci) != cj or backward.get(cj) != ci:
                    return False
                continue
            forward[ci] = cj
            backward[cj] = ci
            stack.append((ci, cj))
    return True


def canonical_code(m: MergeMap) -> bytes:
    """
    Id-independent encoding of the reachable core.

    Preorder from the leading instruction, if0 before if1; ids are
    renumbered in order of first discovery.
    """
    number = {m.leading: 0}
    emitted = set()
    parts = []
    stack = [m.leading]
    while stack:
        i = stack.pop()
        if i in emitted:
            continue
        emitted.add(i)
        ins = m.instructions[i]
        if isinstance(ins, Leaf):
            parts.append(f"L{value_str(ins.value)}")
            continue
        for child in (ins.if0, ins.if1):
            if child not in number:
                number[child] = len(number)
        parts.append(f"N{ins.query},{number[ins.if0]},{number[ins.if1]}")
        stack.append(ins.if1)
        stack.append(ins.if0)
    return ";".join(parts).encode("ascii")


def merge(owner: int, new_id: int, pivot: int, m0: MergeMap, m1: MergeMap) -> MergeMap:
    """
    Union of both stores plus Node(pivot, leading(m0), leading(m1)) at new_id.

    Raises:
        InconsistentStoresError: a shared id holds different instructions
        FreshIdError: new_id is not above every existing id
    """
    if m0.owner != owner or m1.owner != owner:
        raise MergeMapError(f"cannot merge maps of {m0.owner} and {m1.owner} into a map for {owner}")
    conflict = first_conflict(m0, m1)
    if conflict is not None:
        raise InconsistentStoresError(conflict)
    if new_id <= max(m0.leading, m1.leading):
        raise FreshIdError(f"instruction id {new_id} is not above {max(m0.leading, m1.leading)}")
    store = dict(m0.instructions)
    store.update(m1.instructions)
    store[new_id] = Node(pivot, m0.leading, m1.leading)
    return MergeMap(owner, store)


def classify(m: MergeMap) -> MapClassification:
    reachable = m.reachable()
    parents: Dict[int, int] = {}
    below: Dict[int, FrozenSet[int]] = {}
    read_once = True
    for i in reachable:
        ins = m.instructions[i]
        if isinstance(ins, Leaf):
            below[i] = frozenset()
            continue
        for child in (ins.if0, ins.if1):
            parents[child] = parents.get(child, 0) + 1
        under = below[ins.if0] | below[ins.if1]
        if ins.query in under:
            read_once = False
        below[i] = under | {ins.query}
    is_tree = all(parents.get(i, 0) == 1 for i in reachable if i != m.leading)
    queried = below[m.leading]
    return MapClassification(is_tree, read_once, queried, len(reachable))


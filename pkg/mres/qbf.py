"""
Prenex CNF QBFs: prefixes, clauses, assignments and clause semantics.

Variables are positive integers and literals are signed integers, as in
QDIMACS. All types are immutable after construction.
"""
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, FrozenSet, Iterable, Iterator, Mapping, Optional, Tuple

from .errors import QBFError

logger = logging.getLogger(__name__)

VarId = int
Literal = int
Assignment = Mapping[VarId, int]


class Quantifier(str, Enum):
    EXISTS = "e"
    FORALL = "a"

    def __str__(self):
        return self.value


class ClauseStatus(str, Enum):
    SATISFIED = "satisfied"
    FALSIFIED = "falsified"
    UNDETERMINED = "undetermined"


def var_of(lit: Literal) -> VarId:
    return abs(lit)


def literal_value(lit: Literal, a: Assignment) -> Optional[int]:
    """Truth value of a literal under a partial assignment, None if unassigned."""
    value = a.get(abs(lit))
    if value is None:
        return None
    return value if lit > 0 else 1 - value


@dataclass(frozen=True)
class Block:
    quantifier: Quantifier
    variables: Tuple[VarId, ...]


@dataclass(frozen=True)
class Prefix:
    """Alternating quantifier blocks Q_1 Z_1 ... Q_k Z_k."""
    blocks: Tuple[Block, ...]
    _level: Dict[VarId, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(self.blocks))
        level: Dict[VarId, int] = {}
        for i, block in enumerate(self.blocks):
            if not block.variables:
                raise QBFError(f"quantifier block {i + 1} is empty")
            if i > 0 and self.blocks[i - 1].quantifier == block.quantifier:
                raise QBFError(f"blocks {i} and {i + 1} have the same quantifier")
            for v in block.variables:
                if not isinstance(v, int) or v <= 0:
                    raise QBFError(f"invalid variable {v!r}")
                if v in level:
                    raise QBFError(f"variable {v} is quantified twice")
                level[v] = i
        object.__setattr__(self, "_level", level)

    @classmethod
    def from_blocks(cls, blocks: Iterable[Tuple[Quantifier, Iterable[VarId]]]) -> "Prefix":
        """Build a prefix, merging adjacent blocks with the same quantifier."""
        merged = []
        for quantifier, variables in blocks:
            variables = tuple(variables)
            if not variables:
                continue
            quantifier = Quantifier(quantifier)
            if merged and merged[-1][0] == quantifier:
                merged[-1] = (quantifier, merged[-1][1] + variables)
            else:
                merged.append((quantifier, variables))
        return cls(tuple(Block(q, vs) for q, vs in merged))

    @property
    def variables(self) -> Tuple[VarId, ...]:
        return tuple(v for block in self.blocks for v in block.variables)

    @property
    def existentials(self) -> Tuple[VarId, ...]:
        return tuple(v for block in self.blocks if block.quantifier == Quantifier.EXISTS
                     for v in block.variables)

    @property
    def universals(self) -> Tuple[VarId, ...]:
        return tuple(v for block in self.blocks if block.quantifier == Quantifier.FORALL
                     for v in block.variables)

    def __contains__(self, v: VarId) -> bool:
        return v in self._level

    def level(self, v: VarId) -> int:
        try:
            return self._level[v]
        except KeyError:
            raise QBFError(f"variable {v} is not in the prefix")

    def quantifier(self, v: VarId) -> Quantifier:
        return self.blocks[self.level(v)].quantifier

    def is_existential(self, v: VarId) -> bool:
        return v in self._level and self.blocks[self._level[v]].quantifier == Quantifier.EXISTS

    def is_universal(self, v: VarId) -> bool:
        return v in self._level and self.blocks[self._level[v]].quantifier == Quantifier.FORALL

    def precedes(self, a: VarId, b: VarId) -> bool:
        """a <_Q b: a is quantified in a strictly earlier block than b."""
        return self.level(a) < self.level(b)


@dataclass(frozen=True)
class Clause:
    """A non-tautological set of literals; iteration keeps construction order."""
    literals: Tuple[Literal, ...]
    _set: FrozenSet[Literal] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        literals = tuple(self.literals)
        object.__setattr__(self, "literals", literals)
        seen = set()
        for lit in literals:
            if not isinstance(lit, int) or lit == 0:
                raise QBFError(f"invalid literal {lit!r}")
            if lit in seen:
                raise QBFError(f"duplicate literal {lit}")
            if -lit in seen:
                raise QBFError(f"tautological clause: contains {abs(lit)} and -{abs(lit)}")
            seen.add(lit)
        object.__setattr__(self, "_set", frozenset(seen))

    @classmethod
    def of(cls, literals: Iterable[Literal]) -> "Clause":
        """Canonical clause: duplicates dropped, sorted by variable."""
        return cls(tuple(sorted(set(literals), key=lambda l: (abs(l), l < 0))))

    def __iter__(self) -> Iterator[Literal]:
        return iter(self.literals)

    def __len__(self) -> int:
        return len(self.literals)

    def __contains__(self, lit: Literal) -> bool:
        return lit in self._set

    @property
    def as_set(self) -> FrozenSet[Literal]:
        return self._set

    @property
    def variables(self) -> FrozenSet[VarId]:
        return frozenset(abs(l) for l in self.literals)

    def same_literals(self, other: "Clause") -> bool:
        return self._set == other._set

    def existential_part(self, prefix: Prefix) -> "Clause":
        return Clause(tuple(l for l in self.literals if prefix.is_existential(abs(l))))


    def __str__(self):
        return "{" + ", ".join(str(l) for l in self.literals) + "}"


@dataclass(frozen=True)
class QBF:
    """Phi = Q . phi, with clause indices 1-based in matrix order."""
    prefix: Prefix
    matrix: Tuple[Clause, ...]
    num_vars: Optional[int] = None
    comments: Tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "matrix", tuple(self.matrix))
        object.__setattr__(self, "comments", tuple(self.comments))
        highest = max(self.prefix.variables, default=0)
        for i, clause in enumerate(self.matrix, start=1):
            for lit in clause:
                if abs(lit) not in self.prefix:
                    raise QBFError(f"clause {i} uses unquantified variable {abs(lit)}")
        if self.num_vars is None:
            object.__setattr__(self, "num_vars", highest)
        elif self.num_vars < highest:
            raise QBFError(f"header declares {self.num_vars} variables but prefix uses {highest}")

    def clause(self, index: int) -> Clause:
        """Matrix clause by 1-based index."""
        if not 1 <= index <= len(self.matrix):
            raise QBFError(f"clause index {index} out of range 1..{len(self.matrix)}")
        return self.matrix[index - 1]

    @property
    def existentials(self) -> Tuple[VarId, ...]:
        return self.prefix.existentials

    @property
    def universals(self) -> Tuple[VarId, ...]:
        return self.prefix.universals


def left_of(prefix: Prefix, u: VarId) -> Tuple[VarId, ...]:
    """L_Q(u): existential variables in blocks strictly before u's block, in prefix order."""
    if not prefix.is_universal(u):
        raise QBFError(f"variable {u} is not universal")
    level = prefix.level(u)
    return tuple(v for i, block in enumerate(prefix.blocks[:level])
                 if block.quantifier == Quantifier.EXISTS for v in block.variables)


def clause_status(clause: Iterable[Literal], a: Assignment) -> ClauseStatus:
    undetermined = False
    for lit in clause:
        value = literal_value(lit, a)
        if value == 1:
            return ClauseStatus.SATISFIED
        if value is None:
            undetermined = True
    return ClauseStatus.UNDETERMINED if undetermined else ClauseStatus.FALSIFIED


def matrix_falsified(qbf: QBF, a: Assignment) -> Optional[int]:
    """Lowest 1-based index of a matrix clause falsified by a, or None."""
    for i, clause in enumerate(qbf.matrix, start=1):
        if clause_status(clause, a) == ClauseStatus.FALSIFIED:
            return i
    return None


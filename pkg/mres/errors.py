"""
Exception types and proof-check failure kinds for mres.
"""
from enum import Enum
from typing import Optional


class FailureKind(str, Enum):
    """Reasons a proof line can be rejected."""
    PIVOT_MISSING = "PivotMissing"
    PIVOT_NOT_EXISTENTIAL = "PivotNotExistential"
    TAUTOLOGICAL_RESOLVENT = "TautologicalResolvent"
    MERGE_BLOCKED = "MergeBlocked"
    TRIVIAL_MERGE = "TrivialMerge"
    ISOMORPHISM_FAILURE = "IsomorphismFailure"
    INCONSISTENT_STORES = "InconsistentStores"
    MISSING_CHOICE = "MissingChoice"
    NON_EMPTY_SINK = "NonEmptySink"
    FORWARD_REFERENCE = "ForwardReference"
    DANGLING_REFERENCE = "DanglingReference"
    NON_INCREASING_ID = "NonIncreasingId"
    UNIVERSAL_LITERAL = "UniversalLiteral"
    BAD_AXIOM = "BadAxiom"
    CLAUSE_MISMATCH = "ClauseMismatch"
    MAP_MISMATCH = "MapMismatch"
    UNDERIVABLE_ANTECEDENT = "UnderivableAntecedent"
    EMPTY_PROOF = "EmptyProof"
    SOUNDNESS_VIOLATION = "SoundnessViolation"

    def __str__(self):
        return self.value


class MResError(ValueError):
    """Base class for every error raised by mres."""


class ParseError(MResError):
    """Malformed input text. Line and column are 1-based."""

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        self.message = message
        self.line = line
        self.column = column
        super().__init__(str(self))

    def __str__(self):
        if self.line is None:
            return self.message
        if self.column is None:
            return f"[line {self.line}] {self.message}"
        return f"[line {self.line}, column {self.column}] {self.message}"


class QBFError(MResError):
    """A formula or prefix violates a structural invariant."""


class MergeMapError(MResError):
    """Invalid merge map construction or use."""


class UnboundVariableError(MergeMapError):
    """Evaluation reached a query on a variable the assignment does not bind."""

    def __init__(self, var: int):
        self.var = var
        super().__init__(f"variable {var} is queried but not assigned")


class InconsistentStoresError(MergeMapError):
    """Two instruction stores disagree on a shared instruction id."""

    def __init__(self, instruction_id: int):
        self.instruction_id = instruction_id
        super().__init__(f"instruction {instruction_id} differs between the two stores")


class FreshIdError(MergeMapError):
    """A new instruction id is not larger than every existing id."""


class RuleError(MResError):
    """An MRes rule application is not allowed."""

    def __init__(self, kind: FailureKind, message: str, universal: Optional[int] = None):
        self.kind = kind
        self.universal = universal
        super().__init__(f"{kind}: {message}")


class UncheckedProofError(MResError):
    """Operation requires a proof accepted by check_proof."""


class CapExceededError(MResError):
    """An exhaustive computation would exceed its configured cap."""


class StrategyShapeError(MResError):
    """A strategy does not match the universal variables it is used with."""


class PartialMapError(MResError):
    """A merge map with a reachable undefined leaf was used as a total function."""


class ConfigError(MResError):
    """Invalid configuration value."""

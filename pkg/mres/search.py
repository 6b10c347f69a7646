"""
Bounded breadth-first proof search.

Closes the axiom lines under the resolution rule (choices inferred) in a
given-clause loop, deduplicating lines by clause and per-universal
canonical map code. Single-threaded so the frontier order, and with it
the result, is fixed by the caps.
"""
import logging
from collections import deque
from dataclasses import dataclass
from typing import Deque, Dict, List, Optional, Set, Tuple

from .config import DEFAULT_SEARCH_MAX_LINES, Config
from .errors import ConfigError, RuleError
from .mergemap import canonical_code
from .proof import Proof, ProofLine, axiom_line, resolve_lines, sub_derivation
from .qbf import QBF

logger = logging.getLogger(__name__)

PROGRESS_EVERY = 1000


@dataclass(frozen=True)
class SearchCaps:
    max_lines: int = DEFAULT_SEARCH_MAX_LINES
    max_width: Optional[int] = None
    max_map_size: Optional[int] = None

    def __post_init__(self):
        if self.max_lines <= 0:
            raise ConfigError(f"max_lines must be positive, got {self.max_lines}")

    @classmethod
    def from_config(cls, config: Config) -> "SearchCaps":
        return cls(config.search_max_lines, config.search_max_width, config.search_max_map_size)


def _key(qbf: QBF, line: ProofLine) -> Tuple:
    return (line.clause.as_set, tuple(canonical_code(line.maps[u]) for u in qbf.universals))


def _within_caps(qbf: QBF, line: ProofLine, caps: SearchCaps) -> bool:
    if caps.max_width is not None and len(line.clause) > caps.max_width:
        return False
    if caps.max_map_size is not None:
        return all(len(line.maps[u].reachable()) <= caps.max_map_size for u in qbf.universals)
    return True


def _clashes(a: ProofLine, b: ProofLine) -> List[Tuple[ProofLine, ProofLine, int]]:
    """(left, right, pivot) for every literal of a whose complement is in b."""
    found = []
    for lit in a.clause:
        if -lit in b.clause:
            found.append((a, b, lit) if lit > 0 else (b, a, -lit))
    return found


def saturation_search(qbf: QBF, caps: Optional[SearchCaps] = None) -> Optional[Proof]:
    """
    Search for a refutation within caps.

    Returns:
        Proof: the minimal sub-derivation of the first empty-clause line
            (line ids as generated, unverified), or None when the caps or
            the closure are exhausted
    """
    caps = caps or SearchCaps()
    lines: Dict[int, ProofLine] = {}
    seen: Set[Tuple] = set()
    queue: Deque[ProofLine] = deque()
    next_id = 1

    def admit(line: ProofLine) -> bool:
        key = _key(qbf, line)
        if key in seen or not _within_caps(qbf, line, caps):
            return False
        seen.add(key)
        lines[line.id] = line
        queue.append(line)
        return True

    for index in range(1, len(qbf.matrix) + 1):
        line = axiom_line(qbf, index, next_id)
        if admit(line):
            next_id += 1
            if len(line.clause) == 0:
                return _extract(qbf, lines, line.id)

    processed: List[ProofLine] = []
    while queue:
        given = queue.popleft()
        for other in processed:
            for left, right, pivot in _clashes(given, other):
                try:
                    new_line = resolve_lines(qbf, left, right, pivot, None, next_id)
                except RuleError:
                    continue
                if len(lines) >= caps.max_lines:
                    logger.info(f"Search stopped at the line cap ({caps.max_lines})")
                    return None
                if not admit(new_line):
                    continue
                next_id += 1
                if len(lines) % PROGRESS_EVERY == 0:
                    logger.info(f"Search: {len(lines)} lines, {len(queue)} queued")
                if len(new_line.clause) == 0:
                    logger.info(f"Refutation found after {len(lines)} lines")
                    return _extract(qbf, lines, new_line.id)
        processed.append(given)

    logger.info(f"Search saturated after {len(lines)} lines without a refutation")
    return None


def _extract(qbf: QBF, lines: Dict[int, ProofLine], sink_id: int) -> Proof:
    everything = Proof(qbf, tuple(lines[i] for i in sorted(lines)))
    keep = sub_derivation(everything, sink_id)
    return Proof(qbf, tuple(lines[i] for i in sorted(keep)))

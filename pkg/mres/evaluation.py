"""
Vectorised evaluation over all assignments to a variable list.

Assignments are numbered in binary order with the first variable as the
most significant bit. Work is done in chunks of CHUNK_SIZE assignments;
universal values are encoded as uint8 codes 0, 1 and UNSET (for *).
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, Iterator, List, Mapping, Sequence, Tuple, TypeVar

import numpy as np

from .errors import StrategyShapeError, UnboundVariableError
from .mergemap import Leaf, MergeMap
from .qbf import QBF, left_of

logger = logging.getLogger(__name__)

CHUNK_SIZE = 1 << 16
UNSET = 2

T = TypeVar("T")

Columns = Dict[int, np.ndarray]


@dataclass(frozen=True)
class Chunk:
    start: int
    stop: int
    columns: Columns

    def __len__(self):
        return self.stop - self.start


def index_bits(indices: np.ndarray, width: int) -> np.ndarray:
    """Row i holds the width bits of indices[i], most significant first."""
    shifts = np.arange(width - 1, -1, -1, dtype=np.int64)
    return ((indices[:, None] >> shifts[None, :]) & 1).astype(np.uint8)


def chunk_ranges(total: int, chunk_size: int = CHUNK_SIZE) -> List[Tuple[int, int]]:
    return [(start, min(start + chunk_size, total)) for start in range(0, total, chunk_size)]


def make_chunk(variables: Sequence[int], start: int, stop: int) -> Chunk:
    indices = np.arange(start, stop, dtype=np.int64)
    bits = index_bits(indices, len(variables))
    return Chunk(start, stop, {v: bits[:, j] for j, v in enumerate(variables)})


def iter_chunks(variables: Sequence[int], chunk_size: int = CHUNK_SIZE) -> Iterator[Chunk]:
    for start, stop in chunk_ranges(1 << len(variables), chunk_size):
        yield make_chunk(variables, start, stop)


def map_over_chunks(func: Callable[[int, int], T], total: int, threads: int = 1,
                    chunk_size: int = CHUNK_SIZE) -> Iterator[T]:
    """Apply func to each (start, stop) chunk; results come back in chunk order."""
    ranges = chunk_ranges(total, chunk_size)
    if threads <= 1 or len(ranges) <= 1:
        for start, stop in ranges:
            yield func(start, stop)
        return
    with ThreadPoolExecutor(max_workers=threads) as pool:
        yield from pool.map(lambda r: func(*r), ranges)


def map_codes(m: MergeMap, columns: Columns, size: int) -> np.ndarray:
    """Evaluate a merge map on every row; * becomes UNSET."""
    values: Dict[int, np.ndarray] = {}
    for i in m.reachable():
        ins = m.instructions[i]
        if isinstance(ins, Leaf):
            values[i] = np.full(size, UNSET if ins.value is None else ins.value, dtype=np.uint8)
            continue
        column = columns.get(ins.query)
        if column is None:
            raise UnboundVariableError(ins.query)
        values[i] = np.where(column == 1, values[ins.if1], values[ins.if0]).astype(np.uint8)
    return values[m.leading]


def table_codes(table, columns: Columns, size: int) -> np.ndarray:
    """Evaluate a truth table (vars, bits) on every row."""
    index = np.zeros(size, dtype=np.int64)
    for v in table.vars:
        column = columns.get(v)
        if column is None:
            raise UnboundVariableError(v)
        index = (index << 1) | column.astype(np.int64)
    return np.asarray(table.bits, dtype=np.uint8)[index]


def strategy_codes(qbf: QBF, strategy: Mapping[int, object], columns: Columns, size: int) -> Columns:
    """Codes of every universal under the strategy; universals without an entry stay UNSET."""
    codes: Columns = {}
    for u in qbf.universals:
        entry = strategy.get(u)
        if entry is None:
            codes[u] = np.full(size, UNSET, dtype=np.uint8)
        elif isinstance(entry, MergeMap):
            codes[u] = map_codes(entry, columns, size)
        else:
            codes[u] = table_codes(entry, columns, size)
    return codes


def check_strategy_shape(qbf: QBF, strategy: Mapping[int, object]):
    """Every entry belongs to a universal and only reads variables left of it."""
    for u, entry in strategy.items():
        if not qbf.prefix.is_universal(u):
            raise StrategyShapeError(f"strategy has an entry for {u}, which is not universal")
        allowed = set(left_of(qbf.prefix, u))
        if isinstance(entry, MergeMap):
            if entry.owner != u:
                raise StrategyShapeError(f"map stored under {u} belongs to {entry.owner}")
            used = entry.queried_vars()
        else:
            used = set(entry.vars)
        outside = sorted(set(used) - allowed)
        if outside:
            raise StrategyShapeError(f"strategy for {u} reads {outside}, which are not left of {u}")


def clause_falsified(clause: Iterable[int], columns: Columns, universal_codes: Columns, size: int) -> np.ndarray:
    """Rows where every literal is assigned and false."""
    mask = np.ones(size, dtype=bool)
    for lit in clause:
        v = abs(lit)
        false_value = 0 if lit > 0 else 1
        if v in universal_codes:
            mask &= universal_codes[v] == false_value
        else:
            column = columns.get(v)
            if column is None:
                return np.zeros(size, dtype=bool)
            mask &= column == false_value
        if not mask.any():
            break
    return mask


def falsified_any(qbf: QBF, clause_indices: Iterable[int], columns: Columns,
                  universal_codes: Columns, size: int) -> np.ndarray:
    """Rows where some listed matrix clause (1-based) is falsified."""
    result = np.zeros(size, dtype=bool)
    for index in clause_indices:
        result |= clause_falsified(qbf.clause(index), columns, universal_codes, size)
    return result


def row_assignment(columns: Columns, row: int) -> Dict[int, int]:
    return {v: int(col[row]) for v, col in columns.items()}

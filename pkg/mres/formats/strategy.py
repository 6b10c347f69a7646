"""
Strategy text format: one merge map per universal variable.

    c optional comment
    s <ownerVar>
    l <id> <*|0|1>
    n <id> <queryVar> <id0> <id1>
    e

Ids ascend inside a block and the last id is the leading instruction.
Unreachable instructions are dropped on read.
"""
import logging
from typing import Dict, List, Mapping, Optional, Union

from ..errors import MergeMapError, ParseError
from ..mergemap import Instruction, Leaf, MergeMap, Node, parse_value, value_str
from . import decode_text

logger = logging.getLogger(__name__)

Strategy = Dict[int, MergeMap]


def _int(token: str, line_no: int, column: int) -> int:
    try:
        value = int(token)
    except ValueError:
        raise ParseError(f"expected an integer, got {token!r}", line_no, column)
    if value < 0:
        raise ParseError(f"expected a non-negative integer, got {value}", line_no, column)
    return value


def _columns(raw: str) -> List[int]:
    cols, pos = [], 0
    for token in raw.split():
        pos = raw.index(token, pos)
        cols.append(pos + 1)
        pos += len(token)
    return cols


def parse_strategy(text: Union[str, bytes]) -> Strategy:
    """
    Parse a strategy file.

    Returns:
        dict: owner variable -> normalized MergeMap, in file order

    Raises:
        ParseError: malformed records, non-ascending ids, duplicate owners
    """
    text = decode_text(text)
    strategy: Strategy = {}
    owner: Optional[int] = None
    store: Dict[int, Instruction] = {}
    block_line = 0

    for line_no, raw in enumerate(text.splitlines(), start=1):
        tokens = raw.split()
        if not tokens or tokens[0] == "c":
            continue
        cols = _columns(raw)
        kind = tokens[0]

        if kind == "s":
            if owner is not None:
                raise ParseError("'s' record before the previous map was closed with 'e'", line_no, cols[0])
            if len(tokens) != 2:
                raise ParseError("expected 's <ownerVar>'", line_no, cols[0])
            owner = _int(tokens[1], line_no, cols[1])
            if owner in strategy:
                raise ParseError(f"second map for variable {owner}", line_no, cols[1])
            store = {}
            block_line = line_no
            continue

        if owner is None:
            raise ParseError(f"record {kind!r} outside an 's ... e' block", line_no, cols[0])

        if kind == "e":
            if not store:
                raise ParseError(f"map for {owner} has no instructions", line_no, cols[0])
            try:
                m = MergeMap(owner, store)
            except MergeMapError as e:
                raise ParseError(str(e), block_line)
            normalized = m.normalized()
            if len(normalized.instructions) != len(m.instructions):
                logger.debug(f"Dropped {len(m.instructions) - len(normalized.instructions)} "
                             f"unreachable instructions from map for {owner}")
            strategy[owner] = normalized
            owner = None
            continue

        if kind == "l":
            if len(tokens) != 3:
                raise ParseError("expected 'l <id> <*|0|1>'", line_no, cols[0])
            ins_id = _int(tokens[1], line_no, cols[1])
            try:
                ins: Instruction = Leaf(parse_value(tokens[2]))
            except MergeMapError as e:
                raise ParseError(str(e), line_no, cols[2])
        elif kind == "n":
            if len(tokens) != 5:
                raise ParseError("expected 'n <id> <queryVar> <id0> <id1>'", line_no, cols[0])
            ins_id = _int(tokens[1], line_no, cols[1])
            query = _int(tokens[2], line_no, cols[2])
            if query == 0:
                raise ParseError("query variable must be positive", line_no, cols[2])
            if0 = _int(tokens[3], line_no, cols[3])
            if1 = _int(tokens[4], line_no, cols[4])
            for child, col in ((if0, cols[3]), (if1, cols[4])):
                if child not in store:
                    raise ParseError(f"instruction {ins_id} jumps to undefined instruction {child}", line_no, col)
            ins = Node(query, if0, if1)
        else:
            raise ParseError(f"unknown record type {kind!r}", line_no, cols[0])

        if store and ins_id <= max(store):
            raise ParseError(f"instruction id {ins_id} is not ascending", line_no, cols[1])
        store[ins_id] = ins

    if owner is not None:
        raise ParseError(f"map for {owner} is not closed with 'e'", block_line)
    return strategy


def emit_map(m: MergeMap) -> List[str]:
    lines = [f"s {m.owner}"]
    for i, ins in m.instructions.items():
        if isinstance(ins, Leaf):
            lines.append(f"l {i} {value_str(ins.value)}")
        else:
            lines.append(f"n {i} {ins.query} {ins.if0} {ins.if1}")
    lines.append("e")
    return lines


def emit_strategy(strategy: Mapping[int, MergeMap]) -> str:
    """Render maps in ascending owner order."""
    lines: List[str] = []
    for owner in sorted(strategy):
        lines.extend(emit_map(strategy[owner]))
    return "\n".join(lines) + "\n"

"""
Truth-table text format.

    c comment
    t <m> <varIds...>
    <2^m characters of 0/1 in binary order, may span lines>

A file may hold several tables one after another.
"""
import logging
from typing import List, Sequence, Union

import numpy as np

from ..complexity import TruthTable
from ..errors import MResError, ParseError
from . import decode_text

logger = logging.getLogger(__name__)

WRAP = 64


def parse_truth_tables(text: Union[str, bytes]) -> List[TruthTable]:
    text = decode_text(text)
    tables: List[TruthTable] = []
    header = None
    bits: List[int] = []
    header_line = 0

    def finish():
        variables, expected = header
        if len(bits) != expected:
            raise ParseError(f"table declares {expected} bits, found {len(bits)}", header_line)
        try:
            tables.append(TruthTable(tuple(variables), np.array(bits, dtype=np.uint8)))
        except MResError as e:
            raise ParseError(str(e), header_line)

    for line_no, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("c"):
            continue
        if stripped.startswith("t"):
            if header is not None:
                finish()
            tokens = stripped.split()
            try:
                m = int(tokens[1])
                variables = [int(t) for t in tokens[2:]]
            except (IndexError, ValueError):
                raise ParseError("expected 't <m> <varIds...>'", line_no, 1)
            if m < 0 or len(variables) != m:
                raise ParseError(f"header declares {m} variables but lists {len(variables)}", line_no, 1)
            header = (variables, 1 << m)
            header_line = line_no
            bits = []
            continue
        if header is None:
            raise ParseError("bits before a 't' header", line_no, 1)
        for offset, ch in enumerate(raw):
            if ch in "01":
                bits.append(int(ch))
            elif not ch.isspace():
                raise ParseError(f"unexpected character {ch!r} in table bits", line_no, offset + 1)

    if header is None:
        raise ParseError("no truth table found")
    finish()
    return tables


def parse_truth_table(text: Union[str, bytes]) -> TruthTable:
    tables = parse_truth_tables(text)
    if len(tables) != 1:
        raise ParseError(f"expected one truth table, found {len(tables)}")
    return tables[0]


def emit_truth_table(table: TruthTable) -> str:
    header = f"t {table.arity}" + "".join(f" {v}" for v in table.vars)
    bits = table.bit_string()
    rows = [bits[i:i + WRAP] for i in range(0, len(bits), WRAP)]
    return "\n".join([header] + rows) + "\n"


def emit_truth_tables(tables: Sequence[TruthTable]) -> str:
    return "".join(emit_truth_table(t) for t in tables)

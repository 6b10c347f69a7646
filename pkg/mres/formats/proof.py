"""
MRes proof text format.

    c comment
    p mres
    a <id> <clauseIndex>
    r <id> <leftId> <rightId> <pivotVar> [u<varId>=L|R|M ...]

Only justifications are stored; clauses and merge maps are re-derived by
check_proof.
"""
import logging
import re
from typing import Dict, List, Optional, Union

from ..errors import ParseError
from ..proof import Axiom, Choice, Proof, ProofLine, Resolution
from . import decode_text
from ..qbf import QBF

logger = logging.getLogger(__name__)

_CHOICE = re.compile(r"^u(\d+)=([LRM])$")


def _int(token: str, line_no: int, column: int, what: str) -> int:
    try:
        value = int(token)
    except ValueError:
        raise ParseError(f"{what} must be an integer, got {token!r}", line_no, column)
    if value < 0:
        raise ParseError(f"{what} must be non-negative, got {value}", line_no, column)
    return value


def parse_proof(text: Union[str, bytes], qbf: QBF) -> Proof:
    """
    Parse a proof file against the formula it refutes.

    Raises:
        ParseError: malformed records, a missing header, references to a
            line id not below the record's own id, or choices for
            variables that are not universal
    """
    text = decode_text(text)
    lines: List[ProofLine] = []
    header_seen = False

    for line_no, raw in enumerate(text.splitlines(), start=1):
        tokens = raw.split()
        if not tokens or tokens[0] == "c":
            continue
        cols = []
        pos = 0
        for token in tokens:
            pos = raw.index(token, pos)
            cols.append(pos + 1)
            pos += len(token)
        kind = tokens[0]

        if not header_seen:
            if tokens != ["p", "mres"]:
                raise ParseError("expected header 'p mres'", line_no, cols[0])
            header_seen = True
            continue

        if kind == "a":
            if len(tokens) != 3:
                raise ParseError("expected 'a <id> <clauseIndex>'", line_no, cols[0])
            line_id = _int(tokens[1], line_no, cols[1], "line id")
            index = _int(tokens[2], line_no, cols[2], "clause index")
            lines.append(ProofLine(line_id, Axiom(index)))
        elif kind == "r":
            if len(tokens) < 5:
                raise ParseError("expected 'r <id> <leftId> <rightId> <pivotVar> [u<var>=L|R|M ...]'",
                                 line_no, cols[0])
            line_id = _int(tokens[1], line_no, cols[1], "line id")
            left = _int(tokens[2], line_no, cols[2], "left id")
            right = _int(tokens[3], line_no, cols[3], "right id")
            for ante, col in ((left, cols[2]), (right, cols[3])):
                if ante >= line_id:
                    raise ParseError(f"line {line_id} refers to line {ante}, which does not precede it",
                                     line_no, col)
            pivot = _int(tokens[4], line_no, cols[4], "pivot")
            choices: Dict[int, Choice] = {}
            for token, col in zip(tokens[5:], cols[5:]):
                match = _CHOICE.match(token)
                if not match:
                    raise ParseError(f"expected u<var>=L|R|M, got {token!r}", line_no, col)
                u = int(match.group(1))
                if not qbf.prefix.is_universal(u):
                    raise ParseError(f"choice for {u}, which is not a universal variable", line_no, col)
                if u in choices:
                    raise ParseError(f"second choice for {u}", line_no, col)
                choices[u] = Choice(match.group(2))
            lines.append(ProofLine(line_id, Resolution(left, right, pivot, choices)))
        else:
            raise ParseError(f"unknown record type {kind!r}", line_no, cols[0])

    if not header_seen:
        raise ParseError("missing header 'p mres'")
    logger.debug(f"Parsed proof with {len(lines)} lines")
    return Proof(qbf, tuple(lines))


def emit_proof(proof: Proof, comments: Optional[List[str]] = None) -> str:
    out = [f"c {c}" for c in comments or []]
    out.append("p mres")
    for line in proof.lines:
        j = line.justification
        if isinstance(j, Axiom):
            out.append(f"a {line.id} {j.clause_index}")
        else:
            record = f"r {line.id} {j.left} {j.right} {j.pivot}"
            choices = " ".join(f"u{u}={Choice(c).value}" for u, c in sorted(j.choices.items()))
            out.append(f"{record} {choices}" if choices else record)
    return "\n".join(out) + "\n"

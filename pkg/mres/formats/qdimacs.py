"""
QDIMACS reader and writer.

Comment lines are kept on the parsed QBF (`QBF.comments`) and are not
written back by emit_qdimacs. Family metadata travels in three kinds of
annotation comment:

    c family: <name> <n>
    c role: <R> <var ids...>
    c group: <label> <clause indices...>
"""
import logging
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterable, List, Optional, Tuple, Union

from ..errors import ParseError, QBFError
from ..qbf import QBF, Clause, Prefix, Quantifier
from . import decode_text

logger = logging.getLogger(__name__)

_TOKEN = re.compile(r"\S+")


class _Section(Enum):
    HEADER = 1
    PREFIX = 2
    CLAUSES = 3


@dataclass
class Annotations:
    """Family metadata recovered from `c family:/role:/group:` comments."""
    family: Optional[str] = None
    n: Optional[int] = None
    roles: Dict[str, List[int]] = field(default_factory=dict)
    groups: Dict[str, List[int]] = field(default_factory=dict)


def _tokens(line: str) -> List[Tuple[str, int]]:
    return [(m.group(0), m.start() + 1) for m in _TOKEN.finditer(line)]


def _int_token(token: str, line_no: int, column: int) -> int:
    try:
        return int(token)
    except ValueError:
        raise ParseError(f"expected an integer, got {token!r}", line_no, column)


def parse_qdimacs(text: Union[str, bytes]) -> QBF:
    """
    Parse QDIMACS text into a QBF.

    Args:
        text: QDIMACS content as str or UTF-8 bytes

    Returns:
        QBF: prefix with adjacent same-quantifier lines merged, matrix in file order

    Raises:
        ParseError: on any syntax or structural problem, with 1-based line/column
    """
    text = decode_text(text)
    section = _Section.HEADER
    comments: List[str] = []
    declared_vars = declared_clauses = 0
    header_line = 0
    blocks: List[Tuple[Quantifier, List[int]]] = []
    quantified = set()
    clauses: List[Clause] = []
    pending: List[int] = []
    pending_start = (0, 0)

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("c"):
            if section == _Section.CLAUSES and pending:
                raise ParseError("comment inside an unterminated clause", line_no, 1)
            comments.append(line[1:].strip())
            continue

        tokens = _tokens(raw)
        head, head_col = tokens[0]

        if section == _Section.HEADER:
            if head != "p":
                raise ParseError(f"expected header 'p cnf <vars> <clauses>', got {head!r}", line_no, head_col)
            if len(tokens) != 4 or tokens[1][0] != "cnf":
                raise ParseError("malformed header, expected 'p cnf <vars> <clauses>'", line_no, head_col)
            declared_vars = _int_token(tokens[2][0], line_no, tokens[2][1])
            declared_clauses = _int_token(tokens[3][0], line_no, tokens[3][1])
            if declared_vars < 0 or declared_clauses < 0:
                raise ParseError("header counts must be non-negative", line_no, head_col)
            header_line = line_no
            section = _Section.PREFIX
            continue

        if head == "p":
            raise ParseError("duplicate header", line_no, head_col)

        if head in ("e", "a"):
            if section != _Section.PREFIX:
                raise ParseError("quantifier line after the first clause", line_no, head_col)
            if tokens[-1][0] != "0" or len(tokens) < 2:
                raise ParseError("quantifier line must end with 0", line_no, tokens[-1][1])
            variables = []
            for token, col in tokens[1:-1]:
                v = _int_token(token, line_no, col)
                if v <= 0 or v > declared_vars:
                    raise ParseError(f"variable {v} outside declared range 1..{declared_vars}", line_no, col)
                if v in quantified:
                    raise ParseError(f"variable {v} is quantified twice", line_no, col)
                quantified.add(v)
                variables.append(v)
            blocks.append((Quantifier(head), variables))
            continue

        section = _Section.CLAUSES
        for token, col in tokens:
            lit = _int_token(token, line_no, col)
            if not pending:
                pending_start = (line_no, col)
            if lit == 0:
                clauses.append(_make_clause(pending, quantified, declared_vars, *pending_start))
                pending = []
                continue
            if abs(lit) > declared_vars:
                raise ParseError(f"variable {abs(lit)} outside declared range 1..{declared_vars}", line_no, col)
            pending.append(lit)

    if section == _Section.HEADER:
        raise ParseError("missing header 'p cnf <vars> <clauses>'")
    if pending:
        raise ParseError("last clause is not terminated by 0", *pending_start)
    if len(clauses) != declared_clauses:
        raise ParseError(f"header declares {declared_clauses} clauses, found {len(clauses)}", header_line)

    try:
        qbf = QBF(Prefix.from_blocks(blocks), tuple(clauses), declared_vars, tuple(comments))
    except QBFError as e:
        raise ParseError(str(e))
    logger.debug(f"Parsed QDIMACS: {qbf.num_vars} vars, {len(qbf.prefix.blocks)} blocks, {len(clauses)} clauses")
    return qbf


def _make_clause(literals: List[int], quantified, declared_vars: int, line_no: int, column: int) -> Clause:
    for lit in literals:
        if abs(lit) not in quantified:
            raise ParseError(f"free variable {abs(lit)} in clause", line_no, column)
    try:
        return Clause(tuple(literals))
    except QBFError as e:
        raise ParseError(str(e), line_no, column)


def emit_qdimacs(qbf: QBF, comments: Iterable[str] = ()) -> str:
    """
    Render a QBF as QDIMACS.

    Args:
        qbf: formula to write
        comments: optional comment lines written before the header

    Returns:
        str: QDIMACS text ending in a newline
    """
    lines = [f"c {c}" for c in comments]
    lines.append(f"p cnf {qbf.num_vars} {len(qbf.matrix)}")
    for block in qbf.prefix.blocks:
        lines.append(f"{block.quantifier} " + " ".join(str(v) for v in block.variables) + " 0")
    for clause in qbf.matrix:
        lines.append(" ".join(str(l) for l in clause.literals) + (" 0" if clause.literals else "0"))
    return "\n".join(lines) + "\n"


def annotation_lines(family: str, n: int, roles: Dict[str, List[int]],
                     groups: Dict[str, List[int]]) -> List[str]:
    lines = [f"family: {family} {n}"]
    lines.extend(f"role: {name} " + " ".join(str(v) for v in ids) for name, ids in roles.items())
    lines.extend(f"group: {label} " + " ".join(str(i) for i in idx) for label, idx in groups.items())
    return lines


def read_annotations(qbf: QBF) -> Annotations:
    """Recover family, role and group annotations from parsed comments."""
    result = Annotations()
    for comment in qbf.comments:
        key, _, rest = comment.partition(":")
        key = key.strip()
        if key not in ("family", "role", "group") or not rest.strip():
            continue
        parts = rest.split()
        try:
            if key == "family":
                result.family = parts[0]
                result.n = int(parts[1]) if len(parts) > 1 else None
            elif key == "role":
                result.roles[parts[0]] = [int(p) for p in parts[1:]]
            else:
                result.groups[parts[0]] = [int(p) for p in parts[1:]]
        except ValueError:
            logger.warning(f"Ignoring malformed annotation: c {comment}")
    return result

"""
Text formats: QDIMACS formulas, MRes proofs, strategies and truth tables
"""
from typing import Union

from ..errors import ParseError


def decode_text(text: Union[str, bytes]) -> str:
    """UTF-8 decode, reporting the line and byte column of the first bad byte."""
    if not isinstance(text, bytes):
        return text
    try:
        return text.decode("utf-8")
    except UnicodeDecodeError as e:
        line_no = text.count(b"\n", 0, e.start) + 1
        column = e.start - (text.rfind(b"\n", 0, e.start) + 1) + 1
        raise ParseError(f"input is not valid UTF-8: {e.reason}", line_no, column)

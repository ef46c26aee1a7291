"""Keyword-anchored response parsing.

Parsers tolerate surrounding prose and whitespace but never repair
malformed structure.  Whenever a keyword occurs more than once the last
occurrence wins (models often restate their answer at the end).  A parse
failure is a value, not an exception: parse_ok is False, fields is empty
and failure_reason says which keyword was missing or malformed.

Only the separator each template actually demonstrates is accepted
(ANSWER= for the list tasks, ANSWER: for the plain addition tasks, and
so on).
"""

import re
from dataclasses import dataclass, field

from taskcurve.tasks.kinds import TaskKind

__all__ = ["ParsedResponse", "parse"]

_INT = r"[+-]?\d+"


@dataclass(frozen=True)
class ParsedResponse:
    kind: TaskKind
    fields: dict = field(default_factory=dict)
    parse_ok: bool = False
    failure_reason: str | None = None


def _ok(kind, fields):
    return ParsedResponse(kind=kind, fields=fields, parse_ok=True)


def _fail(kind, reason):
    return ParsedResponse(kind=kind, fields={}, parse_ok=False, failure_reason=reason)


def _int_list(body: str):
    """Parse the inside of a bracketed integer list; None if malformed.
    An empty body is the empty list."""
    if body.strip() == "":
        return []
    out = []
    for piece in body.split(","):
        piece = piece.strip()
        if not re.fullmatch(_INT, piece):
            return None
        out.append(int(piece))
    return out


def _last(pattern, text):
    found = None
    for found in re.finditer(pattern, text):
        pass
    return found


def _indexed_series(prefix: str, text: str):
    """Collect PREFIX<i>=<int> assignments; last occurrence wins per index.
    Returns the values as a list if the indices are exactly 0..n-1, else
    None."""
    values = {}
    for m in re.finditer(
        rf"\b{prefix}\s*\[?\s*(\d+)\s*\]?\s*=\s*({_INT})\s*;?", text
    ):
        values[int(m.group(1))] = int(m.group(2))
    if not values:
        return None
    if sorted(values) != list(range(len(values))):
        return None
    return [values[i] for i in range(len(values))]


def _parse_reversal(text):
    values = {}
    for m in re.finditer(rf"R\s*\[\s*(\d+)\s*\]\s*=\s*({_INT})\s*;?", text):
        values[int(m.group(1))] = int(m.group(2))
    if not values:
        return None, "keyword R[...]= not found"
    if sorted(values) != list(range(len(values))):
        return None, "R[i] indices are not contiguous from 0"
    return {"values": [values[i] for i in range(len(values))]}, None


def _parse_bracket_list(keyword, field_name, text):
    m = _last(rf"{keyword}\s*=\s*\[([^\]]*)\]", text)
    if m is None:
        return None, f"keyword {keyword}= not found"
    values = _int_list(m.group(1))
    if values is None:
        return None, f"malformed list after {keyword}="
    return {field_name: values}, None


def _parse_nested_linear(text):
    return _parse_bracket_list("CHAIN", "chain", text)


def _parse_dynamic_programming(text):
    return _parse_bracket_list("ANSWER", "marks", text)


def _parse_hanoi(text):
    m = _last(r"ANSWER\s*=\s*\[([^\]]*)\]", text)
    if m is None:
        return None, "keyword ANSWER= not found"
    body = m.group(1)
    moves = [
        (int(t.group(1)), int(t.group(2)), int(t.group(3)))
        for t in re.finditer(
            rf"\(\s*({_INT})\s*,\s*({_INT})\s*,\s*({_INT})\s*\)", body
        )
    ]
    if not moves and body.strip():
        return None, "no move tuples inside ANSWER=[...]"
    return {"moves": moves}, None


def _parse_colon_number(text, keyword="ANSWER"):
    m = _last(rf"{keyword}\s*:\s*({_INT})", text)
    if m is None:
        return None, f"keyword {keyword}: not found"
    return {"answer": int(m.group(1))}, None


def _parse_vanilla_addition(text):
    return _parse_colon_number(text)


def _parse_binary_addition(text):
    m = _last(r"ANSWER\s*:\s*([01]+)(?!\d)", text)
    if m is None:
        return None, "keyword ANSWER: with a binary value not found"
    return {"answer_bits": m.group(1)}, None


_AA_OPTIONAL_LISTS = (
    ("ANSLIST1", "list1"),
    ("ANSLIST2", "list2"),
    ("ANSREVLIST1", "revlist1"),
    ("ANSREVLIST2", "revlist2"),
    ("ANSSUMSLIST", "sums"),
    ("ANSDIGITSLIST", "digits"),
    ("ANSREVDIGITSLIST", "revdigits"),
)


def _parse_algorithmic_addition(text):
    m = _last(rf"ANSNUM\s*:\s*({_INT})", text)
    if m is None:
        return None, "keyword ANSNUM: not found"
    fields = {"num": int(m.group(1))}
    # intermediate lists are kept when well formed; they are never graded
    for keyword, name in _AA_OPTIONAL_LISTS:
        lm = _last(rf"\b{keyword}\s*:\s*\[([^\]]*)\]", text)
        if lm is None:
            continue
        values = _int_list(lm.group(1))
        if values is not None:
            fields[name] = values
    pm = _last(r"ANSPAIRLIST\s*:\s*\[([^\]]*)\]", text)
    if pm is not None:
        pairs = [
            (int(t.group(1)), int(t.group(2)))
            for t in re.finditer(
                rf"\(\s*({_INT})\s*,\s*({_INT})\s*\)", pm.group(1)
            )
        ]
        if pairs:
            fields["pairs"] = pairs
    return fields, None


def _parse_multiplication(text):
    m = _last(rf"ANSWER\s*=\s*\[\s*({_INT})\s*\]", text)
    if m is None:
        return None, "keyword ANSWER=[...] with a single number not found"
    fields = {"answer": int(m.group(1))}
    sm = _last(r"SUBPRODLIST\s*=\s*\[([^\]]*)\]", text)
    if sm is not None:
        values = _int_list(sm.group(1))
        if values is not None:
            fields["subproducts"] = values
    return fields, None


def _parse_polynomial_multiplication(text):
    m = _last(rf"\bANS\s*=\s*({_INT})\s*;?", text)
    if m is None:
        return None, "keyword ANS= not found"
    fields = {"answer": int(m.group(1))}
    for prefix, name in (("P", "p"), ("Q", "q"), ("R", "r"), ("S", "s")):
        series = _indexed_series(prefix, text)
        if series is not None:
            fields[name] = series
    return fields, None


_PARSERS = {
    TaskKind.REVERSAL: _parse_reversal,
    TaskKind.NESTED_LINEAR: _parse_nested_linear,
    TaskKind.DYNAMIC_PROGRAMMING: _parse_dynamic_programming,
    TaskKind.TOWER_OF_HANOI: _parse_hanoi,
    TaskKind.VANILLA_ADDITION: _parse_vanilla_addition,
    TaskKind.ALGORITHMIC_ADDITION: _parse_algorithmic_addition,
    TaskKind.BINARY_ADDITION: _parse_binary_addition,
    TaskKind.MULTIPLICATION: _parse_multiplication,
    TaskKind.POLYNOMIAL_MULTIPLICATION: _parse_polynomial_multiplication,
}


def parse(kind: TaskKind, response: str) -> ParsedResponse:
    """Extract the kind's structured fields from arbitrary response text.
    Never raises; failure comes back as a value."""
    if not isinstance(response, str):
        return _fail(kind, "response is not text")
    fields, reason = _PARSERS[kind](response)
    if fields is None:
        return _fail(kind, reason)
    return _ok(kind, fields)

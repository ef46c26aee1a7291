"""Prompt rendering from the golden templates, and canonical responses.

Templates live as package data, one file per kind, byte-for-byte fixed
(including trailing spaces, line breaks, and the occasional spelling
slip -- they are the measured artifact, not prose to clean up).  Variable
slots are marked <<NAME>>; rendering is pure string substitution, so a
rendered prompt is byte-identical to the template outside the slots.

``render_response`` produces the canonical correct answer text in the
output format each prompt requests; it backs the perfect mock provider
and the parser round-trip tests.
"""

from importlib import resources

from taskcurve.exceptions import DomainError
from taskcurve.tasks.kinds import TaskInstance, TaskKind

__all__ = ["render_prompt", "render_response", "template_text"]

_cache: dict = {}


def template_text(kind: TaskKind) -> str:
    """The raw template for a kind, exactly as stored."""
    if kind not in _cache:
        path = resources.files("taskcurve.tasks") / "templates" / f"{kind.value}.txt"
        _cache[kind] = path.read_bytes().decode("utf-8")
    return _cache[kind]


def _int_list(values) -> str:
    return "[" + ", ".join(str(v) for v in values) + "]"


def _fill(template: str, slots: dict) -> str:
    text = template
    for name, value in slots.items():
        marker = f"<<{name}>>"
        if marker not in text:
            raise DomainError(f"template slot {marker} missing")
        text = text.replace(marker, value)
    return text


def render_prompt(inst: TaskInstance) -> str:
    """The full prompt text for an instance: the kind's template with
    every payload slot filled, byte-stable for a given instance."""
    kind = inst.kind
    payload = inst.payload
    template = template_text(kind)
    if kind is TaskKind.REVERSAL:
        return _fill(template, {"LIST": _int_list(payload["values"])})
    if kind is TaskKind.NESTED_LINEAR:
        return _fill(
            template,
            {
                "C0": str(payload["c0"]),
                "LIST1": _int_list(payload["list1"]),
                "LIST2": _int_list(payload["list2"]),
            },
        )
    if kind is TaskKind.DYNAMIC_PROGRAMMING:
        return _fill(template, {"LST": _int_list(payload["values"])})
    if kind is TaskKind.TOWER_OF_HANOI:
        return _fill(
            template,
            {
                "LABELS": _int_list(payload["labels"]),
                "MOVES": str(payload["n_moves"]),
            },
        )
    if kind is TaskKind.VANILLA_ADDITION:
        if payload.get("typo_variant"):
            # The flag is tracked end to end for dataset compatibility,
            # but the misprinted example text itself was never published,
            # so that variant cannot be rendered.
            raise DomainError(
                "the typo prompt variant has no known text; "
                "only the corrected template can be rendered"
            )
        return _fill(template, {"A": payload["a"], "B": payload["b"]})
    if kind in (
        TaskKind.ALGORITHMIC_ADDITION,
        TaskKind.BINARY_ADDITION,
        TaskKind.MULTIPLICATION,
        TaskKind.POLYNOMIAL_MULTIPLICATION,
    ):
        return _fill(template, {"A": payload["a"], "B": payload["b"]})
    raise AssertionError(f"unhandled kind {kind!r}")


def _tuple_list(moves) -> str:
    return "[" + ", ".join(f"({a}, {b}, {c})" for a, b, c in moves) + "]"


def render_response(inst: TaskInstance) -> str:
    """Canonical correct response text for an instance, in the format the
    prompt's own example demonstrates."""
    kind = inst.kind
    expected = inst.expected
    if kind is TaskKind.REVERSAL:
        return "\n".join(
            f"R[{i}]={v};" for i, v in enumerate(expected["values"])
        )
    if kind is TaskKind.NESTED_LINEAR:
        return f"CHAIN=[{','.join(str(v) for v in expected['chain'])}];"
    if kind is TaskKind.DYNAMIC_PROGRAMMING:
        return f"ANSWER=[{','.join(str(v) for v in expected['marks'])}];"
    if kind is TaskKind.TOWER_OF_HANOI:
        return f"ANSWER={_tuple_list(expected['moves'])};"
    if kind is TaskKind.VANILLA_ADDITION:
        return f"ANSWER: {expected['sum']}"
    if kind is TaskKind.ALGORITHMIC_ADDITION:
        pairs = ", ".join(f"({x},{y})" for x, y in expected["pairs"])
        lines = [
            f"ANSLIST1: [{','.join(str(v) for v in expected['list1'])}]",
            f"ANSLIST2: [{','.join(str(v) for v in expected['list2'])}]",
            f"ANSREVLIST1: [{','.join(str(v) for v in expected['revlist1'])}]",
            f"ANSREVLIST2: [{','.join(str(v) for v in expected['revlist2'])}]",
            f"ANSPAIRLIST: [{pairs}]",
            f"ANSSUMSLIST: [{','.join(str(v) for v in expected['sums'])}]",
            f"ANSDIGITSLIST: [{','.join(str(v) for v in expected['digits'])}]",
            f"ANSREVDIGITSLIST: [{','.join(str(v) for v in expected['revdigits'])}]",
            f"ANSNUM: {expected['num']}",
        ]
        return "\n".join(lines)
    if kind is TaskKind.BINARY_ADDITION:
        return f"ANSWER: {expected['sum_bits']}"
    if kind is TaskKind.MULTIPLICATION:
        subs = ", ".join(expected["subproducts"])
        return f"SUBPRODLIST=[{subs}];\nANSWER=[{expected['product']}];"
    if kind is TaskKind.POLYNOMIAL_MULTIPLICATION:
        lines = []
        for prefix, key in (("P", "p"), ("Q", "q"), ("R", "r"), ("S", "s")):
            lines.extend(
                f"{prefix}{i}={v};" for i, v in enumerate(expected[key])
            )
        lines.append(f"ANS={expected['answer']};")
        return "\n".join(lines)
    raise AssertionError(f"unhandled kind {kind!r}")

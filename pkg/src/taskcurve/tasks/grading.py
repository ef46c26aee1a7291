"""Tri-state grading: correct, incorrect, or ungraded.

Only the final graded field of each kind counts -- full output lists for
the list tasks, the final number for the arithmetic family.  Intermediate
trace fields (ANSLIST1, SUBPRODLIST, P/Q/R coefficients, ...) never
affect the grade.  Unparseable responses grade as UNGRADED; the
aggregation layer discards them from trial counts rather than treating
them as wrong.
"""

from enum import Enum

from taskcurve.exceptions import DomainError
from taskcurve.tasks.kinds import TaskInstance, TaskKind
from taskcurve.tasks.parsing import ParsedResponse

__all__ = ["GradeOutcome", "grade"]


class GradeOutcome(Enum):
    CORRECT = "correct"
    INCORRECT = "incorrect"
    UNGRADED = "ungraded"


def _lists_equal(parsed_values, expected_values) -> bool:
    return [list(v) if isinstance(v, (list, tuple)) else v for v in parsed_values] == [
        list(v) if isinstance(v, (list, tuple)) else v for v in expected_values
    ]


def _is_correct(inst: TaskInstance, parsed: ParsedResponse) -> bool:
    kind = inst.kind
    expected = inst.expected
    fields = parsed.fields
    if kind is TaskKind.REVERSAL:
        return fields["values"] == expected["values"]
    if kind is TaskKind.NESTED_LINEAR:
        return fields["chain"] == expected["chain"]
    if kind is TaskKind.DYNAMIC_PROGRAMMING:
        return fields["marks"] == expected["marks"]
    if kind is TaskKind.TOWER_OF_HANOI:
        return _lists_equal(fields["moves"], expected["moves"])
    if kind is TaskKind.VANILLA_ADDITION:
        return fields["answer"] == int(expected["sum"])
    if kind is TaskKind.ALGORITHMIC_ADDITION:
        return fields["num"] == int(expected["num"])
    if kind is TaskKind.BINARY_ADDITION:
        return int(fields["answer_bits"], 2) == int(expected["sum_bits"], 2)
    if kind is TaskKind.MULTIPLICATION:
        return fields["answer"] == int(expected["product"])
    if kind is TaskKind.POLYNOMIAL_MULTIPLICATION:
        return fields["answer"] == int(expected["answer"])
    raise AssertionError(f"unhandled kind {kind!r}")


def grade(inst: TaskInstance, parsed: ParsedResponse) -> GradeOutcome:
    """Grade a parsed response against the instance's expected output."""
    if parsed.kind is not inst.kind:
        raise DomainError(
            f"parsed kind {parsed.kind.value} does not match "
            f"instance kind {inst.kind.value}"
        )
    if not parsed.parse_ok:
        return GradeOutcome.UNGRADED
    return GradeOutcome.CORRECT if _is_correct(inst, parsed) else GradeOutcome.INCORRECT

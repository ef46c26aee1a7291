"""Deterministic task suites: generators, prompts, oracles, parsers,
graders for the nine task kinds."""

from taskcurve.tasks.generate import generate
from taskcurve.tasks.grading import GradeOutcome, grade
from taskcurve.tasks.kinds import (
    FIXED_FACTOR,
    HANOI_DISKS,
    HANOI_MAX_MOVES,
    TaskInstance,
    TaskKind,
    check_complexity,
    instance_from_dict,
    instance_to_dict,
    kind_from_name,
)
from taskcurve.tasks.oracles import (
    algorithmic_addition_trace,
    carry_normalize,
    hanoi_moves,
    max_nonadjacent_marks,
    multiplication_trace,
    oracle,
    oracle_for_payload,
    polynomial_multiplication_trace,
)
from taskcurve.tasks.parsing import ParsedResponse, parse
from taskcurve.tasks.prompts import render_prompt, render_response, template_text

__all__ = [
    "TaskKind",
    "TaskInstance",
    "GradeOutcome",
    "ParsedResponse",
    "FIXED_FACTOR",
    "HANOI_DISKS",
    "HANOI_MAX_MOVES",
    "check_complexity",
    "generate",
    "grade",
    "parse",
    "oracle",
    "oracle_for_payload",
    "render_prompt",
    "render_response",
    "template_text",
    "instance_to_dict",
    "instance_from_dict",
    "kind_from_name",
    "max_nonadjacent_marks",
    "hanoi_moves",
    "carry_normalize",
    "algorithmic_addition_trace",
    "multiplication_trace",
    "polynomial_multiplication_trace",
]

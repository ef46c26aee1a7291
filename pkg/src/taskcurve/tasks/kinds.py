"""Task kinds and instances.

A task instance is fully described by (kind, c, payload): c is the
complexity knob (list length, move count, or digit count depending on the
kind) and the payload holds the concrete input data.  The exact solution
is stored redundantly in ``expected`` and revalidated when instances are
loaded from disk.
"""

from dataclasses import dataclass
from enum import Enum

from taskcurve.exceptions import DomainError


class TaskKind(Enum):
    REVERSAL = "reversal"
    NESTED_LINEAR = "nested_linear"
    DYNAMIC_PROGRAMMING = "dynamic_programming"
    TOWER_OF_HANOI = "hanoi"
    VANILLA_ADDITION = "vanilla_addition"
    ALGORITHMIC_ADDITION = "algorithmic_addition"
    BINARY_ADDITION = "binary_addition"
    MULTIPLICATION = "multiplication"
    POLYNOMIAL_MULTIPLICATION = "polynomial_multiplication"


# stable ordering used for stream derivation and CLI listings
KIND_ORDER = tuple(TaskKind)
KIND_INDEX = {kind: i for i, kind in enumerate(KIND_ORDER)}

_ALIASES = {
    "reversal": TaskKind.REVERSAL,
    "nestedlinear": TaskKind.NESTED_LINEAR,
    "nested_linear": TaskKind.NESTED_LINEAR,
    "dynamicprogramming": TaskKind.DYNAMIC_PROGRAMMING,
    "dynamic_programming": TaskKind.DYNAMIC_PROGRAMMING,
    "towerofhanoi": TaskKind.TOWER_OF_HANOI,
    "tower_of_hanoi": TaskKind.TOWER_OF_HANOI,
    "hanoi": TaskKind.TOWER_OF_HANOI,
    "vanillaaddition": TaskKind.VANILLA_ADDITION,
    "vanilla_addition": TaskKind.VANILLA_ADDITION,
    "algorithmicaddition": TaskKind.ALGORITHMIC_ADDITION,
    "algorithmic_addition": TaskKind.ALGORITHMIC_ADDITION,
    "binaryaddition": TaskKind.BINARY_ADDITION,
    "binary_addition": TaskKind.BINARY_ADDITION,
    "multiplication": TaskKind.MULTIPLICATION,
    "polynomialmultiplication": TaskKind.POLYNOMIAL_MULTIPLICATION,
    "polynomial_multiplication": TaskKind.POLYNOMIAL_MULTIPLICATION,
}


def kind_from_name(name: str) -> TaskKind:
    """Resolve a kind from its enum value or a CamelCase/snake alias."""
    key = name.strip().lower().replace("-", "_")
    if key in _ALIASES:
        return _ALIASES[key]
    raise DomainError(f"unknown task kind {name!r}")


# Ten disks are fixed for generated Tower of Hanoi instances, so the move
# count is capped at 2**10 - 1.
HANOI_DISKS = 10
HANOI_MAX_MOVES = 2 ** HANOI_DISKS - 1

# The four-digit fixed factor used by both multiplication tasks.
FIXED_FACTOR = 7869


def check_complexity(kind: TaskKind, c: int) -> None:
    if not isinstance(c, int) or c < 1:
        raise DomainError(f"c must be a positive integer, got {c!r}")
    if kind is TaskKind.TOWER_OF_HANOI and c > HANOI_MAX_MOVES:
        raise DomainError(
            f"Tower of Hanoi with {HANOI_DISKS} disks has at most "
            f"{HANOI_MAX_MOVES} moves, got c={c}"
        )


def _int_items(payload, key, length=None):
    values = payload[key]
    if not isinstance(values, list) or not all(
        isinstance(v, int) and not isinstance(v, bool) for v in values
    ):
        raise DomainError(f"payload field {key!r} must be a list of integers")
    if length is not None and len(values) != length:
        raise DomainError(
            f"payload field {key!r} must have length {length}, got {len(values)}"
        )
    return values


def _digit_string(payload, key, length, alphabet="0123456789", leading="123456789"):
    text = payload[key]
    if (
        not isinstance(text, str)
        or len(text) != length
        or any(ch not in alphabet for ch in text)
        or (text and text[0] not in leading)
    ):
        raise DomainError(
            f"payload field {key!r} must be a {length}-character string over "
            f"{alphabet!r} with leading character in {leading!r}"
        )
    return text


def validate_payload(kind: TaskKind, c: int, payload: dict) -> None:
    """Check the kind-specific structural constraints of a payload."""
    try:
        if kind in (TaskKind.REVERSAL, TaskKind.DYNAMIC_PROGRAMMING):
            values = _int_items(payload, "values", c)
            if any(v < 0 for v in values):
                raise DomainError("list entries must be non-negative")
        elif kind is TaskKind.NESTED_LINEAR:
            if not isinstance(payload["c0"], int):
                raise DomainError("payload field 'c0' must be an integer")
            _int_items(payload, "list1", c)
            _int_items(payload, "list2", c)
        elif kind is TaskKind.TOWER_OF_HANOI:
            n_disks = payload["n_disks"]
            labels = _int_items(payload, "labels", n_disks)
            if sorted(labels) != list(range(n_disks)):
                raise DomainError(
                    f"labels must be a permutation of 0..{n_disks - 1}"
                )
            if payload["n_moves"] != c:
                raise DomainError("n_moves must equal the instance complexity")
        elif kind is TaskKind.VANILLA_ADDITION:
            _digit_string(payload, "a", c)
            _digit_string(payload, "b", c)
            if not isinstance(payload.get("typo_variant", False), bool):
                raise DomainError("payload field 'typo_variant' must be a bool")
        elif kind is TaskKind.ALGORITHMIC_ADDITION:
            _digit_string(payload, "a", c)
            _digit_string(payload, "b", c)
        elif kind is TaskKind.BINARY_ADDITION:
            _digit_string(payload, "a", c, alphabet="01", leading="1")
            _digit_string(payload, "b", c, alphabet="01", leading="1")
        elif kind in (
            TaskKind.MULTIPLICATION,
            TaskKind.POLYNOMIAL_MULTIPLICATION,
        ):
            if payload["a"] != str(FIXED_FACTOR):
                raise DomainError(f"factor 'a' is fixed at {FIXED_FACTOR}")
            _digit_string(payload, "b", c)
        else:
            raise AssertionError(f"unhandled kind {kind!r}")
    except KeyError as exc:
        raise DomainError(
            f"payload for kind {kind.value} is missing field {exc}"
        ) from exc


@dataclass(frozen=True)
class TaskInstance:
    kind: TaskKind
    c: int
    payload: dict
    seed: int
    expected: dict

    def __post_init__(self):
        check_complexity(self.kind, self.c)
        validate_payload(self.kind, self.c, self.payload)


def instance_to_dict(inst: TaskInstance) -> dict:
    return {
        "kind": inst.kind.value,
        "c": inst.c,
        "payload": inst.payload,
        "seed": inst.seed,
        "expected": inst.expected,
    }


def instance_from_dict(data: dict) -> TaskInstance:
    """Rebuild an instance from its serialized form, recomputing the
    oracle output and refusing data whose stored answer disagrees."""
    from taskcurve.tasks.oracles import oracle_for_payload

    try:
        kind = TaskKind(data["kind"])
        inst = TaskInstance(
            kind=kind,
            c=int(data["c"]),
            payload=data["payload"],
            seed=int(data["seed"]),
            expected=data["expected"],
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise DomainError(f"malformed instance record: {exc}") from exc
    recomputed = oracle_for_payload(inst.kind, inst.payload)
    if recomputed != inst.expected:
        raise DomainError(
            f"stored expected output for kind={kind.value}, c={inst.c} "
            "does not match the oracle; refusing corrupt instance"
        )
    return inst

"""Seeded task instance generation.

The draw stream for an instance is derive_key(derive_key(seed, kind_index),
c), consumed strictly in the documented order below, so (kind, c, seed)
fully determines the instance on every platform.

Draw order per kind:
  reversal, dynamic_programming: c digits, each uniform 0..9.
  nested_linear: the start value c0 in [-9, 9]; then per step, pairs
      (a_i, b_i) uniform on [-9, 9]^2 redrawn until the next chain value
      lands in [-9, 9] (rejection; a_i = 0 always succeeds, so the loop
      terminates with probability one).
  hanoi: a Fisher-Yates shuffle of the labels 0..9 (9 draws).
  vanilla/algorithmic addition: operand a then operand b, each as a
      leading digit 1..9 followed by c - 1 digits 0..9.
  binary_addition: leading bit fixed at 1 (no draw), then c - 1 bits per
      operand, a first.
  multiplication, polynomial_multiplication: only the variable factor b,
      as a leading digit 1..9 followed by c - 1 digits 0..9; the other
      factor is fixed at 7869.
"""

from taskcurve import rng
from taskcurve.tasks.kinds import (
    FIXED_FACTOR,
    HANOI_DISKS,
    KIND_INDEX,
    TaskInstance,
    TaskKind,
    check_complexity,
)
from taskcurve.tasks.oracles import oracle_for_payload

__all__ = ["generate"]


def _decimal_operand(stream: rng.Stream, c: int) -> str:
    digits = [stream.next_int(1, 9)]
    digits.extend(stream.next_int(0, 9) for _ in range(c - 1))
    return "".join(str(d) for d in digits)


def _binary_operand(stream: rng.Stream, c: int) -> str:
    bits = [1]
    bits.extend(stream.next_int(0, 1) for _ in range(c - 1))
    return "".join(str(b) for b in bits)


def _payload(kind: TaskKind, c: int, stream: rng.Stream) -> dict:
    if kind in (TaskKind.REVERSAL, TaskKind.DYNAMIC_PROGRAMMING):
        return {"values": [stream.next_int(0, 9) for _ in range(c)]}
    if kind is TaskKind.NESTED_LINEAR:
        c0 = stream.next_int(-9, 9)
        list1 = []
        list2 = []
        current = c0
        for _ in range(c):
            while True:
                a_i = stream.next_int(-9, 9)
                b_i = stream.next_int(-9, 9)
                nxt = a_i * current + b_i
                if -9 <= nxt <= 9:
                    break
            list1.append(a_i)
            list2.append(b_i)
            current = nxt
        return {"c0": c0, "list1": list1, "list2": list2}
    if kind is TaskKind.TOWER_OF_HANOI:
        labels = stream.shuffle(list(range(HANOI_DISKS)))
        return {"labels": labels, "n_disks": HANOI_DISKS, "n_moves": c}
    if kind is TaskKind.VANILLA_ADDITION:
        a = _decimal_operand(stream, c)
        b = _decimal_operand(stream, c)
        return {"a": a, "b": b, "typo_variant": False}
    if kind is TaskKind.ALGORITHMIC_ADDITION:
        return {
            "a": _decimal_operand(stream, c),
            "b": _decimal_operand(stream, c),
        }
    if kind is TaskKind.BINARY_ADDITION:
        return {
            "a": _binary_operand(stream, c),
            "b": _binary_operand(stream, c),
        }
    if kind in (TaskKind.MULTIPLICATION, TaskKind.POLYNOMIAL_MULTIPLICATION):
        return {"a": str(FIXED_FACTOR), "b": _decimal_operand(stream, c)}
    raise AssertionError(f"unhandled kind {kind!r}")


def generate(kind: TaskKind, c: int, seed: int) -> TaskInstance:
    """Deterministic instance of the given kind and complexity."""
    check_complexity(kind, c)
    key = rng.derive_key(rng.derive_key(seed, KIND_INDEX[kind]), c)
    payload = _payload(kind, c, rng.Stream(key))
    return TaskInstance(
        kind=kind,
        c=c,
        payload=payload,
        seed=seed,
        expected=oracle_for_payload(kind, payload),
    )

"""Exact solvers for the nine task kinds.

All arithmetic uses Python integers, so arbitrarily long operands are
exact.  The list-algorithm tasks reproduce the algorithms spelled out in
the prompts step for step; their final answers always agree with direct
big-integer arithmetic, which the tests verify independently.
"""

from taskcurve.exceptions import DomainError
from taskcurve.tasks.kinds import TaskInstance, TaskKind

__all__ = [
    "oracle",
    "oracle_for_payload",
    "max_nonadjacent_marks",
    "hanoi_moves",
    "carry_normalize",
    "algorithmic_addition_trace",
    "multiplication_trace",
    "polynomial_multiplication_trace",
]


def max_nonadjacent_marks(lst):
    """Mark (1) a maximum-sum subset of non-adjacent entries, 2 elsewhere.

    Backward dynamic program with take-on-tie, then a greedy forward
    reconstruction that jumps two positions after every take.  On ties the
    result is the lexicographically smallest index set.
    """
    values = list(lst)
    n = len(values)
    if n == 0:
        raise DomainError("max_nonadjacent_marks needs a nonempty list")
    if any(v < 0 for v in values):
        raise DomainError("entries must be non-negative")
    dp = [0] * (n + 2)
    choose = [False] * n
    for i in range(n - 1, -1, -1):
        take = values[i] + dp[i + 2]
        skip = dp[i + 1]
        if take >= skip:
            dp[i] = take
            choose[i] = True
        else:
            dp[i] = skip
            choose[i] = False
    marks = [2] * n
    i = 0
    while i < n:
        if choose[i]:
            marks[i] = 1
            i += 2
        else:
            i += 1
    return marks


def hanoi_moves(labels, n_disks, n_moves):
    """First n_moves of the iterative Tower of Hanoi solution.

    Move k (1-based) moves the disk whose size index i is the position of
    the least significant set bit of k.  Disks at even size index cycle
    through towers 0->2->1->0, odd ones 0->1->2->0.  Reported disk
    identifiers are labels[i].
    """
    labels = list(labels)
    if sorted(labels) != list(range(n_disks)):
        raise DomainError(
            f"labels must be a permutation of 0..{n_disks - 1}, got {labels!r}"
        )
    if not 0 <= n_moves <= 2 ** n_disks - 1:
        raise DomainError(
            f"n_moves must lie in [0, 2^{n_disks} - 1], got {n_moves!r}"
        )
    position = [0] * n_disks
    moves = []
    for k in range(1, n_moves + 1):
        i = (k & -k).bit_length() - 1
        src = position[i]
        dst = (src + 2) % 3 if i % 2 == 0 else (src + 1) % 3
        moves.append([labels[i], src, dst])
        position[i] = dst
    return moves


def carry_normalize(sums):
    """Left-to-right carry propagation turning a list of non-negative
    integers into single digits, extending the list while a carry
    remains."""
    entries = list(sums)
    if not entries:
        raise DomainError("carry_normalize needs a nonempty list")
    out = []
    carry = 0
    for v in entries:
        if v < 0:
            raise DomainError(f"entries must be non-negative, got {v!r}")
        t = v + carry
        out.append(t % 10)
        carry = t // 10
    while carry:
        out.append(carry % 10)
        carry //= 10
    return out


def _digit_list(number_text):
    text = str(number_text)
    if not text or not text.isdigit():
        raise DomainError(f"expected a decimal digit string, got {number_text!r}")
    return [int(ch) for ch in text]


def algorithmic_addition_trace(a, b):
    """The seven-step addition algorithm; returns every intermediate list
    plus the assembled sum."""
    list1 = _digit_list(a)
    list2 = _digit_list(b)
    rev1 = list1[::-1]
    rev2 = list2[::-1]
    width = max(len(rev1), len(rev2))
    pairs = [
        [rev1[i] if i < len(rev1) else 0, rev2[i] if i < len(rev2) else 0]
        for i in range(width)
    ]
    sums = [x + y for x, y in pairs]
    digits = carry_normalize(sums)
    rev_digits = digits[::-1]
    number = int("".join(str(d) for d in rev_digits))
    return {
        "list1": list1,
        "list2": list2,
        "revlist1": rev1,
        "revlist2": rev2,
        "pairs": pairs,
        "sums": sums,
        "digits": digits,
        "revdigits": rev_digits,
        "num": number,
    }


def multiplication_trace(small, large):
    """Digit-by-digit subproducts of small x large, least significant
    digit first, plus the full product."""
    small = int(small)
    large = int(large)
    if small < 1 or large < 1:
        raise DomainError("multiplication_trace needs positive integers")
    subproducts = [
        d * large * 10 ** k
        for k, d in enumerate(int(ch) for ch in reversed(str(small)))
    ]
    return subproducts, small * large


def polynomial_multiplication_trace(a, b):
    """Digits-as-polynomial multiplication: returns (P, Q, R, S, answer)
    where R is the convolution of the digit vectors and S its carried
    form."""
    a = int(a)
    b = int(b)
    if a < 1 or b < 1:
        raise DomainError("polynomial_multiplication_trace needs positive integers")
    p = _digit_list(a)[::-1]
    q = _digit_list(b)[::-1]
    r = [0] * (len(p) + len(q) - 1)
    for i, pv in enumerate(p):
        for j, qv in enumerate(q):
            r[i + j] += pv * qv
    s = carry_normalize(r)
    answer = int("".join(str(d) for d in s[::-1]))
    return p, q, r, s, answer


def _oracle_reversal(payload):
    return {"values": list(payload["values"])[::-1]}


def _oracle_nested_linear(payload):
    chain = [int(payload["c0"])]
    for a_i, b_i in zip(payload["list1"], payload["list2"]):
        chain.append(a_i * chain[-1] + b_i)
    return {"chain": chain}


def _oracle_dynamic_programming(payload):
    return {"marks": max_nonadjacent_marks(payload["values"])}


def _oracle_hanoi(payload):
    return {
        "moves": hanoi_moves(
            payload["labels"], payload["n_disks"], payload["n_moves"]
        )
    }


def _oracle_vanilla_addition(payload):
    return {"sum": str(int(payload["a"]) + int(payload["b"]))}


def _oracle_algorithmic_addition(payload):
    trace = algorithmic_addition_trace(payload["a"], payload["b"])
    trace["num"] = str(trace["num"])
    return trace


def _oracle_binary_addition(payload):
    total = int(payload["a"], 2) + int(payload["b"], 2)
    return {"sum_bits": format(total, "b")}


def _oracle_multiplication(payload):
    x = int(payload["a"])
    y = int(payload["b"])
    small, large = (x, y) if x <= y else (y, x)
    subproducts, product = multiplication_trace(small, large)
    return {
        "subproducts": [str(v) for v in subproducts],
        "product": str(product),
    }


def _oracle_polynomial_multiplication(payload):
    p, q, r, s, answer = polynomial_multiplication_trace(
        payload["a"], payload["b"]
    )
    return {"p": p, "q": q, "r": r, "s": s, "answer": str(answer)}


_ORACLES = {
    TaskKind.REVERSAL: _oracle_reversal,
    TaskKind.NESTED_LINEAR: _oracle_nested_linear,
    TaskKind.DYNAMIC_PROGRAMMING: _oracle_dynamic_programming,
    TaskKind.TOWER_OF_HANOI: _oracle_hanoi,
    TaskKind.VANILLA_ADDITION: _oracle_vanilla_addition,
    TaskKind.ALGORITHMIC_ADDITION: _oracle_algorithmic_addition,
    TaskKind.BINARY_ADDITION: _oracle_binary_addition,
    TaskKind.MULTIPLICATION: _oracle_multiplication,
    TaskKind.POLYNOMIAL_MULTIPLICATION: _oracle_polynomial_multiplication,
}


def oracle_for_payload(kind: TaskKind, payload: dict) -> dict:
    """Exact expected output for a payload of the given kind."""
    try:
        return _ORACLES[kind](payload)
    except (KeyError, TypeError) as exc:
        raise DomainError(
            f"payload for kind {kind.value} is malformed: {exc}"
        ) from exc


def oracle(inst: TaskInstance) -> dict:
    """Exact expected output for an instance."""
    return oracle_for_payload(inst.kind, inst.payload)

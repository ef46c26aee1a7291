"""Response collection against HTTP providers and local mocks.

A SamplingPlan names which (task, c) cells to fill and with how many
trials; a ProviderConfig describes where responses come from.  Three
provider kinds exist:

  http_json     POST a JSON body (a template with a {{PROMPT}}
                placeholder) and pull the response text out of the
                reply at a configured path.  Timeouts, 429 and 5xx
                are retried with exponential backoff; any other 4xx
                fails immediately.
  mock_perfect  solve the prompt locally and answer in the canonical
                format.  No network.
  mock_noisy    same, but each answer token is independently replaced
                with a wrong token of the same category with
                probability noise_rate.  The corruption is a pure
                function of the prompt bytes, so reruns reproduce it.

run_plan renders prompts, sends them (at most max_in_flight other
requests outstanding), parses and grades what comes back, and appends
one record per trial to a TrialStore.  Cells already in the store are
skipped, which makes interrupted runs resumable.
"""

import json
import os
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import requests

from taskcurve import rng
from taskcurve.datastore import TrialRecord, TrialStore
from taskcurve.exceptions import DomainError, TaskcurveError
from taskcurve.tasks import (
    GradeOutcome,
    TaskInstance,
    TaskKind,
    check_complexity,
    generate,
    grade,
    oracle_for_payload,
    parse,
    render_prompt,
    render_response,
)

__all__ = [
    "RetryPolicy",
    "ProviderConfig",
    "ProviderError",
    "SamplingPlan",
    "CellSummary",
    "RunSummary",
    "send",
    "run_plan",
]

PROMPT_PLACEHOLDER = "{{PROMPT}}"

_PROVIDER_KINDS = ("http_json", "mock_perfect", "mock_noisy")


class ProviderError(TaskcurveError):
    """A provider request failed for good (retries exhausted, a
    non-retryable status, a malformed reply, or missing credentials)."""


@dataclass(frozen=True)
class RetryPolicy:
    max_attempts: int = 3
    base_backoff: float = 0.5
    factor: float = 2.0

    def __post_init__(self):
        if not isinstance(self.max_attempts, int) or self.max_attempts < 1:
            raise DomainError(
                f"max_attempts must be an integer >= 1, got {self.max_attempts!r}"
            )
        if not self.base_backoff >= 0.0:
            raise DomainError(
                f"base_backoff must be >= 0, got {self.base_backoff!r}"
            )
        if not self.factor >= 1.0:
            raise DomainError(f"factor must be >= 1, got {self.factor!r}")

    def delay(self, attempt: int) -> float:
        """Backoff before retry number attempt + 1 (attempt counts from 0).
        Nondecreasing in attempt because factor >= 1."""
        return self.base_backoff * self.factor**attempt


@dataclass(frozen=True)
class ProviderConfig:
    kind: str
    endpoint_url: str = ""
    request_template: str = ""
    response_text_path: str = ""
    auth_env_var: str = ""
    auth_header: str = "Authorization"
    auth_prefix: str = "Bearer "
    timeout: float = 60.0
    max_in_flight: int = 1
    retry: RetryPolicy = field(default_factory=RetryPolicy)
    noise_rate: float = 0.0

    def __post_init__(self):
        if self.kind not in _PROVIDER_KINDS:
            raise DomainError(
                f"provider kind must be one of {_PROVIDER_KINDS}, got {self.kind!r}"
            )
        if not isinstance(self.max_in_flight, int) or self.max_in_flight < 1:
            raise DomainError(
                f"max_in_flight must be an integer >= 1, got {self.max_in_flight!r}"
            )
        if not 0.0 <= self.noise_rate <= 1.0:
            raise DomainError(
                f"noise_rate must lie in [0, 1], got {self.noise_rate!r}"
            )
        if not self.timeout > 0.0:
            raise DomainError(f"timeout must be positive, got {self.timeout!r}")
        if self.kind == "http_json":
            if not self.endpoint_url:
                raise DomainError("http_json providers need an endpoint_url")
            if not self.response_text_path:
                raise DomainError(
                    "http_json providers need a response_text_path"
                )
            try:
                body = json.loads(self.request_template)
            except ValueError as exc:
                raise DomainError(
                    f"request_template must be valid JSON: {exc}"
                ) from exc
            if PROMPT_PLACEHOLDER not in self.request_template:
                raise DomainError(
                    f"request_template must contain {PROMPT_PLACEHOLDER}"
                )
            del body

    @classmethod
    def from_file(cls, path) -> "ProviderConfig":
        with open(path, encoding="utf-8") as handle:
            data = json.load(handle)
        if not isinstance(data, dict):
            raise DomainError("provider config must be a JSON object")
        template = data.get("request_template", "")
        if isinstance(template, (dict, list)):
            template = json.dumps(template)
        retry = RetryPolicy(**data.get("retry", {}))
        known = {
            "endpoint_url",
            "response_text_path",
            "auth_env_var",
            "auth_header",
            "auth_prefix",
            "timeout",
            "max_in_flight",
            "noise_rate",
        }
        extra = set(data) - known - {"kind", "request_template", "retry"}
        if extra:
            raise DomainError(f"unknown provider config keys {sorted(extra)}")
        return cls(
            kind=data.get("kind", ""),
            request_template=template,
            retry=retry,
            **{k: data[k] for k in known if k in data},
        )


# ---------------------------------------------------------------------------
# http_json transport
# ---------------------------------------------------------------------------

_PATH_SEGMENT = re.compile(r"^([^\[\].]*)((?:\[\d+\])*)$")


def _walk_response_path(data, path: str):
    """Evaluate a dotted path like choices[0].message.content (or
    candidates.0.text) against parsed JSON."""
    current = data
    for segment in path.split("."):
        match = _PATH_SEGMENT.match(segment)
        if match is None:
            raise ProviderError(f"bad response_text_path segment {segment!r}")
        name, brackets = match.groups()
        if name:
            if isinstance(current, dict) and name in current:
                current = current[name]
            elif isinstance(current, list) and name.isdigit():
                try:
                    current = current[int(name)]
                except IndexError:
                    raise ProviderError(
                        f"response has no element {name!r} along {path!r}"
                    ) from None
            else:
                raise ProviderError(
                    f"response has no field {name!r} along {path!r}"
                )
        for index_text in re.findall(r"\[(\d+)\]", brackets):
            if not isinstance(current, list):
                raise ProviderError(
                    f"response field along {path!r} is not a list"
                )
            try:
                current = current[int(index_text)]
            except IndexError:
                raise ProviderError(
                    f"response has no element [{index_text}] along {path!r}"
                ) from None
    if not isinstance(current, str):
        raise ProviderError(
            f"response_text_path {path!r} does not name a string"
        )
    return current


def _substitute_prompt(template: str, prompt: str) -> str:
    """Replace the placeholder inside the template's string values.

    The template is parsed as JSON and the placeholder is replaced at
    the string level, so prompts containing quotes or newlines are
    escaped correctly on serialization."""

    def visit(node):
        if isinstance(node, str):
            return node.replace(PROMPT_PLACEHOLDER, prompt)
        if isinstance(node, list):
            return [visit(item) for item in node]
        if isinstance(node, dict):
            return {key: visit(value) for key, value in node.items()}
        return node

    return json.dumps(visit(json.loads(template)))


def _auth_headers(config: ProviderConfig) -> dict:
    headers = {"Content-Type": "application/json"}
    if config.auth_env_var:
        secret = os.environ.get(config.auth_env_var)
        if not secret:
            raise ProviderError(
                f"environment variable {config.auth_env_var} is not set"
            )
        headers[config.auth_header] = config.auth_prefix + secret
    return headers


def _send_http(config, prompt, session, sleep):
    body = _substitute_prompt(config.request_template, prompt)
    headers = _auth_headers(config)
    if session is None:
        session = requests
    failure = ""
    for attempt in range(config.retry.max_attempts):
        if attempt > 0:
            sleep(config.retry.delay(attempt - 1))
        try:
            response = session.post(
                config.endpoint_url,
                data=body.encode("utf-8"),
                headers=headers,
                timeout=config.timeout,
            )
        except requests.exceptions.Timeout as exc:
            failure = f"timeout: {exc}"
            continue
        status = response.status_code
        if status == 429 or 500 <= status < 600:
            failure = f"status {status}"
            continue
        if status >= 400:
            # not transient: no retry
            raise ProviderError(f"provider returned status {status}")
        try:
            payload = response.json()
        except ValueError as exc:
            raise ProviderError(
                f"provider reply is not valid JSON: {exc}"
            ) from exc
        return _walk_response_path(payload, config.response_text_path)
    raise ProviderError(
        f"gave up after {config.retry.max_attempts} attempts; "
        f"last failure: {failure}"
    )


# ---------------------------------------------------------------------------
# mock providers
# ---------------------------------------------------------------------------

_KIND_MARKERS = (
    ("ANSLIST1", TaskKind.ALGORITHMIC_ADDITION),
    ("SUBPRODLIST", TaskKind.MULTIPLICATION),
    ("intermediate polynomials", TaskKind.POLYNOMIAL_MULTIPLICATION),
    ("binary numbers", TaskKind.BINARY_ADDITION),
    ("Tower of Hanoi", TaskKind.TOWER_OF_HANOI),
    ("CHAIN[0]", TaskKind.NESTED_LINEAR),
    ("no adjacent elements", TaskKind.DYNAMIC_PROGRAMMING),
    ("reverse order individually", TaskKind.REVERSAL),
    ("Calculate ", TaskKind.VANILLA_ADDITION),
)


def _detect_kind(prompt: str) -> TaskKind:
    for marker, kind in _KIND_MARKERS:
        if marker in prompt:
            return kind
    raise ProviderError("mock provider does not recognize this prompt")


def _ints(text: str):
    return [int(tok) for tok in text.split(",")] if text.strip() else []


def _search(pattern, prompt, *, last=False):
    matches = list(re.finditer(pattern, prompt))
    if not matches:
        raise ProviderError(f"mock provider found no match for {pattern!r}")
    return matches[-1] if last else matches[0]


def _extract_payload(kind: TaskKind, prompt: str):
    """Invert render_prompt: recover (payload, c) from prompt text.

    Each pattern is anchored so the worked example embedded in the
    template text cannot shadow the instance data (the data occurrence
    is either the only match or on the known side of the example)."""
    if kind is TaskKind.REVERSAL:
        values = _ints(_search(r"LIST=\[([^\]]*)\]", prompt, last=True).group(1))
        return {"values": values}, len(values)
    if kind is TaskKind.NESTED_LINEAR:
        c0 = int(_search(r"CHAIN\[0\]=(-?\d+)", prompt, last=True).group(1))
        list1 = _ints(_search(r"LIST1=\[([^\]]*)\]", prompt, last=True).group(1))
        list2 = _ints(_search(r"LIST2=\[([^\]]*)\]", prompt, last=True).group(1))
        return {"c0": c0, "list1": list1, "list2": list2}, len(list1)
    if kind is TaskKind.DYNAMIC_PROGRAMMING:
        values = _ints(_search(r"LST=\[([^\]]*)\]", prompt).group(1))
        return {"values": values}, len(values)
    if kind is TaskKind.TOWER_OF_HANOI:
        labels = _ints(_search(r"DISK_LABELS=\[([^\]]*)\]", prompt).group(1))
        n_disks = int(_search(r"with (\d+) disks", prompt).group(1))
        n_moves = int(_search(r"first (\d+) moves", prompt).group(1))
        payload = {"labels": labels, "n_disks": n_disks, "n_moves": n_moves}
        return payload, n_moves
    if kind is TaskKind.VANILLA_ADDITION:
        match = _search(r"Calculate (\d+) \+ (\d+)\.", prompt)
        a, b = match.group(1), match.group(2)
        return {"a": a, "b": b, "typo_variant": False}, len(a)
    if kind is TaskKind.ALGORITHMIC_ADDITION:
        match = _search(r"two numbers: (\d+), (\d+)", prompt)
        return {"a": match.group(1), "b": match.group(2)}, len(match.group(1))
    if kind is TaskKind.BINARY_ADDITION:
        match = _search(r"binary numbers ([01]+) \+ ([01]+)", prompt)
        return {"a": match.group(1), "b": match.group(2)}, len(match.group(1))
    if kind is TaskKind.MULTIPLICATION:
        match = _search(r"Calculate (\d+)\*(\d+) using", prompt)
        return {"a": match.group(1), "b": match.group(2)}, len(match.group(2))
    if kind is TaskKind.POLYNOMIAL_MULTIPLICATION:
        match = _search(r"The numbers are\s+(\d+) and\s+(\d+);", prompt)
        return {"a": match.group(1), "b": match.group(2)}, len(match.group(2))
    raise ProviderError(f"unsupported kind {kind!r}")


def _pick_excluding(u: float, lo: int, hi: int, current: int) -> int:
    """Uniform draw from [lo, hi] minus {current}; u in (0, 1]."""
    span = hi - lo  # number of alternatives
    j = min(int(u * span), span - 1)
    value = lo + j
    return value if value < current else value + 1


def _corrupt_digits(text: str, noise_rate, key, start):
    out = []
    for offset, char in enumerate(text):
        token = start + offset
        if rng.uniform(key, 2 * token) <= noise_rate:
            digit = _pick_excluding(
                rng.uniform(key, 2 * token + 1), 0, 9, int(char)
            )
            out.append(str(digit))
        else:
            out.append(char)
    return "".join(out), start + len(text)


def _corrupt_expected(kind, expected, payload, noise_rate, key):
    """Independently replace each answer token with a wrong token of the
    same category with probability noise_rate.

    Token positions are fixed (token t draws uniforms 2t and 2t + 1), so
    the corruption of one token never shifts another's draw."""
    out = dict(expected)
    if kind is TaskKind.REVERSAL:
        values = list(expected["values"])
        for t, v in enumerate(values):
            if rng.uniform(key, 2 * t) <= noise_rate:
                values[t] = _pick_excluding(rng.uniform(key, 2 * t + 1), 0, 9, v)
        out["values"] = values
    elif kind is TaskKind.NESTED_LINEAR:
        chain = list(expected["chain"])
        for t, v in enumerate(chain):
            if rng.uniform(key, 2 * t) <= noise_rate:
                delta = _pick_excluding(rng.uniform(key, 2 * t + 1), -9, 9, 0)
                chain[t] = v + delta
        out["chain"] = chain
    elif kind is TaskKind.DYNAMIC_PROGRAMMING:
        marks = list(expected["marks"])
        for t, v in enumerate(marks):
            if rng.uniform(key, 2 * t) <= noise_rate:
                marks[t] = 3 - v
        out["marks"] = marks
    elif kind is TaskKind.TOWER_OF_HANOI:
        n_disks = payload["n_disks"]
        moves = [list(move) for move in expected["moves"]]
        token = 0
        for move in moves:
            for slot, hi in ((0, n_disks - 1), (1, 2), (2, 2)):
                if rng.uniform(key, 2 * token) <= noise_rate:
                    move[slot] = _pick_excluding(
                        rng.uniform(key, 2 * token + 1), 0, hi, move[slot]
                    )
                token += 1
        out["moves"] = moves
    elif kind is TaskKind.VANILLA_ADDITION:
        out["sum"], _ = _corrupt_digits(expected["sum"], noise_rate, key, 0)
    elif kind is TaskKind.ALGORITHMIC_ADDITION:
        out["num"], _ = _corrupt_digits(expected["num"], noise_rate, key, 0)
    elif kind is TaskKind.BINARY_ADDITION:
        bits = []
        for t, char in enumerate(expected["sum_bits"]):
            if rng.uniform(key, 2 * t) <= noise_rate:
                bits.append("1" if char == "0" else "0")
            else:
                bits.append(char)
        out["sum_bits"] = "".join(bits)
    elif kind is TaskKind.MULTIPLICATION:
        out["product"], _ = _corrupt_digits(
            expected["product"], noise_rate, key, 0
        )
    elif kind is TaskKind.POLYNOMIAL_MULTIPLICATION:
        out["answer"], _ = _corrupt_digits(
            expected["answer"], noise_rate, key, 0
        )
    return out


def _mock_response(prompt: str, noise_rate: float) -> str:
    kind = _detect_kind(prompt)
    payload, c = _extract_payload(kind, prompt)
    expected = oracle_for_payload(kind, payload)
    if noise_rate > 0.0:
        key = rng.derive_key(rng.digest64(prompt.encode("utf-8")), 0)
        expected = _corrupt_expected(kind, expected, payload, noise_rate, key)
    inst = TaskInstance(kind=kind, c=c, payload=payload, seed=0, expected=expected)
    return render_response(inst)


def send(config: ProviderConfig, prompt: str, *, session=None, sleep=time.sleep) -> str:
    """Response text for one prompt from the configured provider."""
    if config.kind == "mock_perfect":
        return _mock_response(prompt, 0.0)
    if config.kind == "mock_noisy":
        return _mock_response(prompt, config.noise_rate)
    return _send_http(config, prompt, session, sleep)


# ---------------------------------------------------------------------------
# plan execution
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SamplingPlan:
    task: TaskKind
    model_id: str
    c_values: tuple
    samples_per_c: int = 200
    base_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "c_values", tuple(self.c_values))
        if not self.model_id:
            raise DomainError("model_id must be nonempty")
        if not self.c_values:
            raise DomainError("c_values must be nonempty")
        for c in self.c_values:
            check_complexity(self.task, c)
        if any(b <= a for a, b in zip(self.c_values, self.c_values[1:])):
            raise DomainError(
                f"c_values must be strictly increasing, got {self.c_values!r}"
            )
        if not isinstance(self.samples_per_c, int) or self.samples_per_c < 1:
            raise DomainError(
                f"samples_per_c must be an integer >= 1, got {self.samples_per_c!r}"
            )

    def trial_seed(self, c: int, index: int) -> int:
        """Seed of trial number index at complexity c: a two-level key
        derivation from the plan's base seed."""
        return rng.derive_key(rng.derive_key(self.base_seed, c), index)


@dataclass(frozen=True)
class CellSummary:
    c: int
    sent: int
    parsed: int
    correct: int
    failed: int
    skipped: int


@dataclass(frozen=True)
class RunSummary:
    cells: tuple

    @property
    def total_sent(self):
        return sum(cell.sent for cell in self.cells)

    @property
    def total_skipped(self):
        return sum(cell.skipped for cell in self.cells)

    def format(self) -> str:
        lines = ["    c     sent   parsed  correct   failed  skipped"]
        for cell in self.cells:
            lines.append(
                f"{cell.c:5d} {cell.sent:8d} {cell.parsed:8d}"
                f" {cell.correct:8d} {cell.failed:8d} {cell.skipped:8d}"
            )
        return "\n".join(lines)


def run_plan(
    plan: SamplingPlan,
    provider: ProviderConfig,
    store: TrialStore,
    *,
    session=None,
    sleep=time.sleep,
) -> RunSummary:
    """Fill the plan's cells through the provider, appending one record
    per trial.  Trials whose dedup key is already stored are skipped, so
    an interrupted run picks up where it left off."""
    jobs = []
    skipped = {c: 0 for c in plan.c_values}
    for c in plan.c_values:
        for index in range(plan.samples_per_c):
            seed = plan.trial_seed(c, index)
            key = (plan.task, plan.model_id, c, seed, False)
            if key in store:
                skipped[c] += 1
            else:
                jobs.append((c, seed))

    def one_trial(c, seed):
        inst = generate(plan.task, c, seed)
        prompt = render_prompt(inst)
        text = send(provider, prompt, session=session, sleep=sleep)
        parsed = parse(plan.task, text)
        outcome = grade(inst, parsed)
        return TrialRecord(
            task=plan.task,
            model_id=plan.model_id,
            c=c,
            seed=seed,
            prompt_digest=rng.digest64(prompt.encode("utf-8")),
            response_text=text,
            parse_ok=parsed.parse_ok,
            correct=(
                None if not parsed.parse_ok
                else outcome is GradeOutcome.CORRECT
            ),
            timestamp=time.time(),
        )

    counts = {c: [0, 0, 0, 0] for c in plan.c_values}  # sent/parsed/correct/failed
    with ThreadPoolExecutor(max_workers=provider.max_in_flight) as pool:
        futures = [(c, pool.submit(one_trial, c, seed)) for c, seed in jobs]
        for c, future in futures:
            record = future.result()
            store.append(record)
            cell = counts[c]
            cell[0] += 1
            if record.parse_ok:
                cell[1] += 1
                if record.correct:
                    cell[2] += 1
            else:
                cell[3] += 1
    return RunSummary(
        cells=tuple(
            CellSummary(
                c=c,
                sent=counts[c][0],
                parsed=counts[c][1],
                correct=counts[c][2],
                failed=counts[c][3],
                skipped=skipped[c],
            )
            for c in plan.c_values
        )
    )

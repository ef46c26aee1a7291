"""Append-only trial storage, aggregation, and c-value normalization.

Records live one JSON object per line in a plain text file.  The
deduplication key is (task, model_id, c, seed, typo_variant); appending a
key twice raises DuplicateRecordError, which is what makes collection
runs resumable.

Aggregation turns records into AccuracyPoint values: parse failures are
discarded from both the numerator and the denominator, the optional
normalization rule collapses neighboring c values (opt-in at read time,
never at write time, so the raw data stays raw), and half-widths come
from the posterior credible interval.
"""

import csv
import json
import os
from dataclasses import dataclass

from taskcurve.exceptions import DomainError, TaskcurveError
from taskcurve.inference import AccuracyPoint
from taskcurve.tasks.kinds import TaskKind

__all__ = [
    "TrialRecord",
    "TrialStore",
    "NormalizationRule",
    "DuplicateRecordError",
    "aggregate",
    "export_points_csv",
    "load_points_csv",
    "load_mapping",
    "ingest_table",
]


class DuplicateRecordError(TaskcurveError):
    """A record with the same deduplication key is already stored."""


_FIELDS = (
    "task",
    "model_id",
    "c",
    "seed",
    "prompt_digest",
    "response_text",
    "parse_ok",
    "correct",
    "typo_variant",
    "timestamp",
)


@dataclass(frozen=True)
class TrialRecord:
    task: TaskKind
    model_id: str
    c: int
    seed: int
    prompt_digest: int
    response_text: str
    parse_ok: bool
    correct: bool | None
    typo_variant: bool = False
    timestamp: float = 0.0

    def __post_init__(self):
        if not isinstance(self.c, int) or self.c < 1:
            raise DomainError(f"c must be a positive integer, got {self.c!r}")
        if not self.model_id:
            raise DomainError("model_id must be nonempty")
        if not self.parse_ok and self.correct is not None:
            raise DomainError("correct must be absent when parse_ok is false")
        if self.parse_ok and self.correct is None:
            raise DomainError("correct is required when parse_ok is true")
        if self.typo_variant and self.task is not TaskKind.VANILLA_ADDITION:
            raise DomainError("typo_variant applies only to vanilla_addition")

    @property
    def dedup_key(self):
        return (self.task, self.model_id, self.c, self.seed, self.typo_variant)

    def to_json_line(self) -> str:
        data = {name: getattr(self, name) for name in _FIELDS}
        data["task"] = self.task.value
        return json.dumps(data, ensure_ascii=False, separators=(",", ":"))

    @classmethod
    def from_json_line(cls, line: str) -> "TrialRecord":
        try:
            data = json.loads(line)
            return cls(
                task=TaskKind(data["task"]),
                model_id=data["model_id"],
                c=data["c"],
                seed=data["seed"],
                prompt_digest=data["prompt_digest"],
                response_text=data["response_text"],
                parse_ok=data["parse_ok"],
                correct=data["correct"],
                typo_variant=data.get("typo_variant", False),
                timestamp=data.get("timestamp", 0.0),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise DomainError(f"malformed trial record line: {exc}") from exc


class TrialStore:
    """Single-writer append-only record file with dedup-key tracking."""

    def __init__(self, path):
        self.path = os.fspath(path)
        self._keys = set()
        if os.path.exists(self.path):
            for record in self.iter_records():
                self._keys.add(record.dedup_key)

    def __len__(self):
        return len(self._keys)

    def __contains__(self, key) -> bool:
        return key in self._keys

    def append(self, record: TrialRecord) -> int:
        """Append one record; returns its zero-based position."""
        key = record.dedup_key
        if key in self._keys:
            raise DuplicateRecordError(
                f"record for key {key!r} already stored"
            )
        position = len(self._keys)
        with open(self.path, "a", encoding="utf-8") as handle:
            handle.write(record.to_json_line())
            handle.write("\n")
        self._keys.add(key)
        return position

    def iter_records(self):
        if not os.path.exists(self.path):
            return
        with open(self.path, encoding="utf-8") as handle:
            for line in handle:
                line = line.strip()
                if line:
                    yield TrialRecord.from_json_line(line)


@dataclass(frozen=True)
class NormalizationRule:
    """c-value collapsing applied during aggregation.

    identity leaves c alone; odd_up maps odd c above the threshold to
    c + 1 (used where data was taken at even c only beyond some point);
    stride_down maps c = 5j + 4 to 5j + 3 (used where data sits on a
    5j + 3 grid).  All rules are idempotent.
    """

    kind: str
    threshold: int = 0

    _KINDS = ("identity", "odd_up", "stride_down")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise DomainError(
                f"rule must be one of {self._KINDS}, got {self.kind!r}"
            )
        if self.threshold < 0:
            raise DomainError(f"threshold must be >= 0, got {self.threshold!r}")

    @classmethod
    def identity(cls):
        return cls(kind="identity")

    @classmethod
    def odd_up(cls, threshold=0):
        return cls(kind="odd_up", threshold=threshold)

    @classmethod
    def stride_down(cls):
        return cls(kind="stride_down")

    @classmethod
    def from_text(cls, text: str) -> "NormalizationRule":
        """Parse CLI notation: identity, odd_up, odd_up:20, stride_down."""
        name, _, arg = text.partition(":")
        name = name.strip()
        if name == "identity":
            return cls.identity()
        if name == "odd_up":
            return cls.odd_up(int(arg) if arg else 0)
        if name == "stride_down":
            if arg:
                raise DomainError("stride_down takes no argument")
            return cls.stride_down()
        raise DomainError(f"unknown normalization rule {text!r}")

    def apply(self, c: int) -> int:
        if self.kind == "odd_up":
            if c > self.threshold and c % 2 == 1:
                return c + 1
            return c
        if self.kind == "stride_down":
            if c % 5 == 4:
                return c - 1
            return c
        return c


def aggregate(records, task: TaskKind, model_id: str, rule: NormalizationRule | None = None):
    """Accuracy points for one (task, model) from a record stream.

    Parse failures are dropped entirely (they count in neither N nor R);
    the rule, when given, renames c before grouping.  Points come back
    sorted by c; an empty stream gives an empty list.
    """
    rule = rule or NormalizationRule.identity()
    counts: dict = {}
    for record in records:
        if record.task is not task or record.model_id != model_id:
            continue
        if not record.parse_ok:
            continue
        c = rule.apply(record.c)
        n, r = counts.get(c, (0, 0))
        counts[c] = (n + 1, r + (1 if record.correct else 0))
    return [
        AccuracyPoint.from_counts(c=c, n_trials=n, n_correct=r)
        for c, (n, r) in sorted(counts.items())
    ]


_CSV_COLUMNS = (
    "task",
    "model_id",
    "c",
    "n_trials",
    "n_correct",
    "accuracy",
    "ci_halfwidth",
)


def export_points_csv(points, task: TaskKind, model_id: str, path) -> None:
    """Write aggregated points as plain CSV (schema: task, model_id, c,
    n_trials, n_correct, accuracy, ci_halfwidth)."""
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(_CSV_COLUMNS)
        for pt in points:
            writer.writerow(
                [
                    task.value,
                    model_id,
                    pt.c,
                    pt.n_trials if pt.n_trials is not None else "",
                    pt.n_correct if pt.n_correct is not None else "",
                    repr(pt.mean_accuracy),
                    repr(pt.ci_halfwidth),
                ]
            )


def load_points_csv(path):
    """Read an aggregate CSV back into (task_value, model_id, points).

    Counts, when present, are authoritative: the mean is recomputed as
    R/N exactly.  Rows without counts load as synthetic points.
    """
    tasks_seen = set()
    models_seen = set()
    points = []
    with open(path, encoding="utf-8", newline="") as handle:
        reader = csv.DictReader(handle)
        missing = [c for c in _CSV_COLUMNS if c not in (reader.fieldnames or ())]
        if missing:
            raise DomainError(f"aggregate CSV is missing columns {missing}")
        for row in reader:
            tasks_seen.add(row["task"])
            models_seen.add(row["model_id"])
            c = int(row["c"])
            halfwidth = float(row["ci_halfwidth"])
            if row["n_trials"]:
                n = int(row["n_trials"])
                r = int(row["n_correct"])
                points.append(
                    AccuracyPoint(
                        c=c,
                        n_trials=n,
                        n_correct=r,
                        mean_accuracy=r / n,
                        ci_halfwidth=halfwidth,
                    )
                )
            else:
                points.append(
                    AccuracyPoint.from_curve(c, float(row["accuracy"]), halfwidth)
                )
    if len(tasks_seen) != 1 or len(models_seen) != 1:
        raise DomainError(
            "aggregate CSV must contain exactly one task and one model, "
            f"got tasks={sorted(tasks_seen)} models={sorted(models_seen)}"
        )
    points.sort(key=lambda pt: pt.c)
    return tasks_seen.pop(), models_seen.pop(), points


# ---------------------------------------------------------------------------
# external dataset ingestion
# ---------------------------------------------------------------------------

_TRUE_WORDS = {"1", "true", "yes", "t", "y"}
_FALSE_WORDS = {"0", "false", "no", "f", "n", ""}


def _as_bool(text):
    word = str(text).strip().lower()
    if word in _TRUE_WORDS:
        return True
    if word in _FALSE_WORDS:
        return False
    raise DomainError(f"cannot interpret {text!r} as a boolean")


def _normalize_mapping(mapping: dict) -> dict:
    if mapping.get("target") not in ("records", "points"):
        raise DomainError("mapping 'target' must be 'records' or 'points'")
    if not isinstance(mapping.get("columns"), dict):
        raise DomainError("mapping must define a 'columns' object")
    mapping.setdefault("constants", {})
    mapping.setdefault("task_names", {})
    return mapping


def load_mapping(path) -> dict:
    """Load an ingestion mapping file (JSON).

    Keys:
      target: "records" or "points".
      columns: {record_field: source_column_name}.
      constants: {record_field: literal} for fields absent in the source.
      task_names: optional {source_task_label: task kind value}.
    """
    with open(path, encoding="utf-8") as handle:
        return _normalize_mapping(json.load(handle))


def _mapped(row, mapping, field, row_index, default=None):
    columns = mapping["columns"]
    constants = mapping["constants"]
    if field in columns:
        column = columns[field]
        if column not in row:
            raise DomainError(
                f"source row {row_index} has no column {column!r}"
            )
        return row[column]
    if field in constants:
        return constants[field]
    return default


def _task_from(value, mapping):
    name = mapping["task_names"].get(str(value), str(value))
    try:
        return TaskKind(name)
    except ValueError as exc:
        raise DomainError(f"unknown task label {value!r}") from exc


def ingest_table(csv_path, mapping) -> list:
    """Convert an external CSV into TrialRecords or AccuracyPoints.

    The mapping names the source columns; unmapped optional fields fall
    back documented defaults (seed: the row index; parse_ok: true;
    prompt_digest: 0; timestamp: 0).  For target "points" the result is
    a list of (task, model_id, AccuracyPoint).
    """
    if isinstance(mapping, (str, os.PathLike)):
        mapping = load_mapping(mapping)
    else:
        mapping = _normalize_mapping(dict(mapping))
    out = []
    with open(csv_path, encoding="utf-8", newline="") as handle:
        reader = csv.DictReader(handle)
        for index, row in enumerate(reader):
            task = _task_from(_mapped(row, mapping, "task", index), mapping)
            model_id = str(_mapped(row, mapping, "model_id", index, ""))
            c = int(_mapped(row, mapping, "c", index))
            if mapping["target"] == "records":
                parse_ok = _as_bool(_mapped(row, mapping, "parse_ok", index, True))
                correct = None
                if parse_ok:
                    correct = _as_bool(_mapped(row, mapping, "correct", index))
                out.append(
                    TrialRecord(
                        task=task,
                        model_id=model_id,
                        c=c,
                        seed=int(_mapped(row, mapping, "seed", index, index)),
                        prompt_digest=int(
                            _mapped(row, mapping, "prompt_digest", index, 0)
                        ),
                        response_text=str(
                            _mapped(row, mapping, "response_text", index, "")
                        ),
                        parse_ok=parse_ok,
                        correct=correct,
                        typo_variant=_as_bool(
                            _mapped(row, mapping, "typo_variant", index, False)
                        ),
                        timestamp=float(
                            _mapped(row, mapping, "timestamp", index, 0.0)
                        ),
                    )
                )
            else:
                n = int(_mapped(row, mapping, "n_trials", index))
                r = int(_mapped(row, mapping, "n_correct", index))
                out.append(
                    (
                        task,
                        model_id,
                        AccuracyPoint.from_counts(c=c, n_trials=n, n_correct=r),
                    )
                )
    return out

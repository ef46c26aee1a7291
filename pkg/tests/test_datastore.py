"""Trial storage, aggregation, normalization, and table ingestion."""

import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from taskcurve.datastore import (
    DuplicateRecordError,
    NormalizationRule,
    TrialRecord,
    TrialStore,
    aggregate,
    export_points_csv,
    ingest_table,
    load_mapping,
    load_points_csv,
)
from taskcurve.exceptions import DomainError
from taskcurve.tasks import TaskKind


def record(
    c=10,
    seed=0,
    parse_ok=True,
    correct=True,
    task=TaskKind.REVERSAL,
    model_id="m1",
    typo_variant=False,
    response_text="R[0]=1;",
):
    return TrialRecord(
        task=task,
        model_id=model_id,
        c=c,
        seed=seed,
        prompt_digest=12345,
        response_text=response_text,
        parse_ok=parse_ok,
        correct=correct if parse_ok else None,
        typo_variant=typo_variant,
        timestamp=1700000000.5,
    )


class TestTrialRecord:
    def test_dedup_key(self):
        r = record(c=20, seed=7)
        assert r.dedup_key == (TaskKind.REVERSAL, "m1", 20, 7, False)

    def test_validation(self):
        with pytest.raises(DomainError):
            record(c=0)
        with pytest.raises(DomainError):
            record(c="10")
        with pytest.raises(DomainError):
            record(model_id="")
        # an unparsed trial has no notion of correctness
        with pytest.raises(DomainError):
            TrialRecord(
                task=TaskKind.REVERSAL,
                model_id="m",
                c=1,
                seed=0,
                prompt_digest=0,
                response_text="",
                parse_ok=False,
                correct=True,
            )
        with pytest.raises(DomainError):
            TrialRecord(
                task=TaskKind.REVERSAL,
                model_id="m",
                c=1,
                seed=0,
                prompt_digest=0,
                response_text="",
                parse_ok=True,
                correct=None,
            )

    def test_typo_flag_is_vanilla_only(self):
        ok = record(task=TaskKind.VANILLA_ADDITION, typo_variant=True)
        assert ok.typo_variant
        with pytest.raises(DomainError):
            record(task=TaskKind.BINARY_ADDITION, typo_variant=True)

    def test_typo_flag_separates_dedup_keys(self):
        a = record(task=TaskKind.VANILLA_ADDITION, typo_variant=False)
        b = record(task=TaskKind.VANILLA_ADDITION, typo_variant=True)
        assert a.dedup_key != b.dedup_key

    def test_json_line_round_trip(self):
        r = record(response_text='ANSWER: "93" ✓\nnewline')
        back = TrialRecord.from_json_line(r.to_json_line())
        assert back == r

    def test_json_line_layout_is_stable(self):
        line = record().to_json_line()
        assert line.startswith('{"task":"reversal","model_id":"m1","c":10,')
        assert "\n" not in line
        # unicode is stored literally, not escaped
        assert "✓" in record(response_text="✓").to_json_line()

    def test_json_line_defaults(self):
        line = json.dumps(
            {
                "task": "reversal",
                "model_id": "m",
                "c": 3,
                "seed": 1,
                "prompt_digest": 0,
                "response_text": "",
                "parse_ok": False,
                "correct": None,
            }
        )
        r = TrialRecord.from_json_line(line)
        assert r.typo_variant is False and r.timestamp == 0.0

    @pytest.mark.parametrize(
        "line",
        [
            "not json at all",
            '{"task":"reversal"}',
            '{"task":"no_such","model_id":"m","c":1,"seed":0,'
            '"prompt_digest":0,"response_text":"","parse_ok":false,"correct":null}',
        ],
    )
    def test_malformed_lines_are_domain_errors(self, line):
        with pytest.raises(DomainError):
            TrialRecord.from_json_line(line)


class TestTrialStore:
    def test_append_and_reload(self, tmp_path):
        path = tmp_path / "trials.jsonl"
        store = TrialStore(path)
        assert len(store) == 0
        assert store.append(record(seed=0)) == 0
        assert store.append(record(seed=1)) == 1
        assert record(seed=1).dedup_key in store
        assert (TaskKind.REVERSAL, "m1", 10, 99, False) not in store

        reloaded = TrialStore(path)
        assert len(reloaded) == 2
        assert [r.seed for r in reloaded.iter_records()] == [0, 1]

    def test_duplicate_append_is_rejected_and_leaves_the_file_alone(self, tmp_path):
        path = tmp_path / "trials.jsonl"
        store = TrialStore(path)
        store.append(record(seed=5))
        with pytest.raises(DuplicateRecordError):
            store.append(record(seed=5, correct=False))
        assert len(path.read_text().splitlines()) == 1
        # still rejected after reopening
        with pytest.raises(DuplicateRecordError):
            TrialStore(path).append(record(seed=5))

    def test_same_seed_different_c_is_not_a_duplicate(self, tmp_path):
        store = TrialStore(tmp_path / "t.jsonl")
        store.append(record(c=10, seed=1))
        store.append(record(c=20, seed=1))
        assert len(store) == 2

    def test_unicode_survives_the_file(self, tmp_path):
        path = tmp_path / "t.jsonl"
        TrialStore(path).append(record(response_text="répo✓nse\n#2"))
        (back,) = list(TrialStore(path).iter_records())
        assert back.response_text == "répo✓nse\n#2"

    def test_blank_lines_are_skipped(self, tmp_path):
        path = tmp_path / "t.jsonl"
        TrialStore(path).append(record())
        with open(path, "a", encoding="utf-8") as handle:
            handle.write("\n\n")
        assert len(TrialStore(path)) == 1

    def test_missing_file_reads_as_empty(self, tmp_path):
        store = TrialStore(tmp_path / "never_written.jsonl")
        assert list(store.iter_records()) == []
        assert len(store) == 0


class TestNormalizationRule:
    def test_identity(self):
        rule = NormalizationRule.identity()
        assert [rule.apply(c) for c in (1, 2, 3, 999)] == [1, 2, 3, 999]

    def test_odd_up(self):
        rule = NormalizationRule.odd_up()
        assert rule.apply(3) == 4
        assert rule.apply(4) == 4
        assert rule.apply(1) == 2

    def test_odd_up_threshold(self):
        rule = NormalizationRule.odd_up(threshold=20)
        assert rule.apply(19) == 19
        assert rule.apply(20) == 20
        assert rule.apply(21) == 22
        assert rule.apply(22) == 22

    def test_stride_down(self):
        rule = NormalizationRule.stride_down()
        assert rule.apply(4) == 3
        assert rule.apply(9) == 8
        assert rule.apply(14) == 13
        assert rule.apply(13) == 13
        assert rule.apply(5) == 5

    @pytest.mark.parametrize(
        "rule",
        [
            NormalizationRule.identity(),
            NormalizationRule.odd_up(),
            NormalizationRule.odd_up(threshold=20),
            NormalizationRule.stride_down(),
        ],
        ids=lambda r: f"{r.kind}:{r.threshold}",
    )
    @given(c=st.integers(1, 10 ** 6))
    def test_rules_are_idempotent(self, rule, c):
        once = rule.apply(c)
        assert rule.apply(once) == once

    def test_from_text(self):
        assert NormalizationRule.from_text("identity") == NormalizationRule.identity()
        assert NormalizationRule.from_text("odd_up") == NormalizationRule.odd_up()
        assert NormalizationRule.from_text("odd_up:20") == NormalizationRule.odd_up(20)
        assert (
            NormalizationRule.from_text("stride_down")
            == NormalizationRule.stride_down()
        )
        for bad in ("stride_down:3", "mystery", "odd_up:x"):
            with pytest.raises((DomainError, ValueError)):
                NormalizationRule.from_text(bad)

    def test_construction_validation(self):
        with pytest.raises(DomainError):
            NormalizationRule(kind="halve")
        with pytest.raises(DomainError):
            NormalizationRule(kind="odd_up", threshold=-1)


class TestAggregate:
    def test_parse_failures_leave_both_counts(self):
        records = [
            record(seed=0, correct=True),
            record(seed=1, correct=True),
            record(seed=2, correct=True),
            record(seed=3, correct=False),
            record(seed=4, correct=False),
            record(seed=5, parse_ok=False),
        ]
        (pt,) = aggregate(records, TaskKind.REVERSAL, "m1")
        assert (pt.c, pt.n_trials, pt.n_correct) == (10, 5, 3)
        assert pt.mean_accuracy == 0.6
        assert 0 < pt.ci_halfwidth < 1

    def test_groups_by_normalized_c(self):
        records = [
            record(c=3, seed=0, correct=True),
            record(c=3, seed=1, correct=False),
            record(c=4, seed=2, correct=True),
        ]
        merged = aggregate(
            records, TaskKind.REVERSAL, "m1", rule=NormalizationRule.odd_up()
        )
        assert [(pt.c, pt.n_trials, pt.n_correct) for pt in merged] == [(4, 3, 2)]
        split = aggregate(records, TaskKind.REVERSAL, "m1")
        assert [(pt.c, pt.n_trials) for pt in split] == [(3, 2), (4, 1)]

    def test_filters_task_and_model(self):
        records = [
            record(seed=0),
            record(seed=0, task=TaskKind.DYNAMIC_PROGRAMMING),
            record(seed=0, model_id="other"),
        ]
        (pt,) = aggregate(records, TaskKind.REVERSAL, "m1")
        assert pt.n_trials == 1

    def test_sorted_by_c_and_empty_ok(self):
        records = [record(c=c, seed=c) for c in (40, 10, 20)]
        pts = aggregate(records, TaskKind.REVERSAL, "m1")
        assert [pt.c for pt in pts] == [10, 20, 40]
        assert aggregate([], TaskKind.REVERSAL, "m1") == []


class TestPointsCsv:
    def make_points(self):
        records = [
            record(c=10, seed=s, correct=s % 3 != 0) for s in range(12)
        ] + [record(c=20, seed=s + 100, correct=s % 2 == 0) for s in range(8)]
        return aggregate(records, TaskKind.REVERSAL, "m1")

    def test_round_trip(self, tmp_path):
        points = self.make_points()
        path = tmp_path / "points.csv"
        export_points_csv(points, TaskKind.REVERSAL, "m1", path)
        task_value, model_id, back = load_points_csv(path)
        assert task_value == "reversal"
        assert model_id == "m1"
        assert back == points

    def test_counts_are_authoritative(self, tmp_path):
        path = tmp_path / "points.csv"
        path.write_text(
            "task,model_id,c,n_trials,n_correct,accuracy,ci_halfwidth\n"
            "reversal,m1,10,10,5,0.9,0.05\n"
        )
        _, _, (pt,) = load_points_csv(path)
        assert pt.mean_accuracy == 0.5

    def test_rows_without_counts_become_synthetic_points(self, tmp_path):
        path = tmp_path / "points.csv"
        path.write_text(
            "task,model_id,c,n_trials,n_correct,accuracy,ci_halfwidth\n"
            "reversal,m1,10,,,0.75,0.05\n"
        )
        _, _, (pt,) = load_points_csv(path)
        assert pt.n_trials is None and pt.n_correct is None
        assert pt.mean_accuracy == 0.75

    def test_rejects_missing_columns(self, tmp_path):
        path = tmp_path / "points.csv"
        path.write_text("task,c\nreversal,10\n")
        with pytest.raises(DomainError, match="missing columns"):
            load_points_csv(path)

    def test_rejects_mixed_tasks_or_models(self, tmp_path):
        path = tmp_path / "points.csv"
        path.write_text(
            "task,model_id,c,n_trials,n_correct,accuracy,ci_halfwidth\n"
            "reversal,m1,10,4,2,0.5,0.1\n"
            "hanoi,m1,20,4,2,0.5,0.1\n"
        )
        with pytest.raises(DomainError, match="exactly one task"):
            load_points_csv(path)


class TestIngestion:
    def write_mapping(self, tmp_path, mapping):
        path = tmp_path / "mapping.json"
        path.write_text(json.dumps(mapping))
        return path

    def test_records_target(self, tmp_path):
        csv_path = tmp_path / "ext.csv"
        csv_path.write_text(
            "Task,Model,Length,Good,Parsed,Typo\n"
            "R,flash,10,1,yes,0\n"
            "R,flash,10,0,yes,0\n"
            "R,flash,12,,no,0\n"
        )
        mapping_path = self.write_mapping(
            tmp_path,
            {
                "target": "records",
                "columns": {
                    "task": "Task",
                    "model_id": "Model",
                    "c": "Length",
                    "correct": "Good",
                    "parse_ok": "Parsed",
                    "typo_variant": "Typo",
                },
                "task_names": {"R": "reversal"},
            },
        )
        records = ingest_table(csv_path, mapping_path)
        assert [r.correct for r in records] == [True, False, None]
        assert all(r.task is TaskKind.REVERSAL for r in records)
        assert all(r.model_id == "flash" for r in records)
        # default seed is the source row index, so rows stay distinct
        assert [r.seed for r in records] == [0, 1, 2]
        assert records[0].prompt_digest == 0

    def test_constants_fill_missing_columns(self, tmp_path):
        csv_path = tmp_path / "ext.csv"
        csv_path.write_text("Length,Good\n5,1\n6,0\n")
        mapping = {
            "target": "records",
            "columns": {"c": "Length", "correct": "Good"},
            "constants": {"task": "vanilla_addition", "model_id": "pro"},
        }
        records = ingest_table(csv_path, mapping)
        assert all(r.task is TaskKind.VANILLA_ADDITION for r in records)
        assert all(r.model_id == "pro" for r in records)

    def test_points_target(self, tmp_path):
        csv_path = tmp_path / "ext.csv"
        csv_path.write_text("t,m,c,N,R\nreversal,m1,10,200,150\n")
        mapping = {
            "target": "points",
            "columns": {
                "task": "t",
                "model_id": "m",
                "c": "c",
                "n_trials": "N",
                "n_correct": "R",
            },
        }
        ((task, model_id, pt),) = ingest_table(csv_path, mapping)
        assert task is TaskKind.REVERSAL
        assert model_id == "m1"
        assert (pt.c, pt.n_trials, pt.n_correct) == (10, 200, 150)
        assert pt.mean_accuracy == 0.75

    def test_ingested_records_feed_aggregate(self, tmp_path):
        csv_path = tmp_path / "ext.csv"
        csv_path.write_text("c,ok\n10,1\n10,1\n10,0\n")
        mapping = {
            "target": "records",
            "columns": {"c": "c", "correct": "ok"},
            "constants": {"task": "hanoi", "model_id": "m"},
        }
        (pt,) = aggregate(
            ingest_table(csv_path, mapping), TaskKind.TOWER_OF_HANOI, "m"
        )
        assert (pt.n_trials, pt.n_correct) == (3, 2)

    def test_error_paths(self, tmp_path):
        csv_path = tmp_path / "ext.csv"
        csv_path.write_text("c,ok\n10,maybe\n")
        base = {
            "target": "records",
            "columns": {"c": "c", "correct": "ok"},
            "constants": {"task": "reversal", "model_id": "m"},
        }
        with pytest.raises(DomainError, match="boolean"):
            ingest_table(csv_path, base)
        with pytest.raises(DomainError, match="no column"):
            ingest_table(
                csv_path, {**base, "columns": {"c": "Missing", "correct": "ok"}}
            )
        with pytest.raises(DomainError, match="task label"):
            ingest_table(
                csv_path,
                {
                    "target": "points",
                    "columns": {"c": "c"},
                    "constants": {"task": "whatever", "n_trials": 1, "n_correct": 1},
                },
            )

    def test_load_mapping_validation(self, tmp_path):
        with pytest.raises(DomainError, match="target"):
            load_mapping(
                self.write_mapping(tmp_path, {"target": "rows", "columns": {}})
            )
        with pytest.raises(DomainError, match="columns"):
            load_mapping(self.write_mapping(tmp_path, {"target": "records"}))

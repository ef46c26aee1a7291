"""Command-line pipeline and figure output.

Every test drives main() directly with an argv list; subprocesses are
not needed.  The full chain (collect, aggregate, fit, plot) runs
against the noisy local mock.
"""

import csv
import json

import pytest

from taskcurve import error_model
from taskcurve.cli import main
from taskcurve.datastore import TrialStore, load_points_csv
from taskcurve.exceptions import DomainError
from taskcurve.inference import AccuracyPoint
from taskcurve.plotting import build_series, write_series_csv, write_series_svg
from taskcurve.tasks import TaskKind, generate, instance_from_dict, render_response


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestGenSolveEval:
    def test_gen_writes_instance_and_prompt(self, tmp_path, capsys):
        out = tmp_path / "inst"
        code, stdout, _ = run(
            capsys, "gen", "reversal", "5", "--seed", "3", "--out", str(out)
        )
        assert code == 0
        lines = stdout.splitlines()
        assert lines == [str(out / "instance.json"), str(out / "prompt.txt")]
        data = json.loads((out / "instance.json").read_text())
        inst = instance_from_dict(data)
        assert inst == generate(TaskKind.REVERSAL, 5, 3)
        assert "LIST=" in (out / "prompt.txt").read_text()

    def test_gen_accepts_alias_names(self, tmp_path, capsys):
        code, _, _ = run(
            capsys, "gen", "Hanoi", "3", "--out", str(tmp_path / "h")
        )
        assert code == 0
        data = json.loads((tmp_path / "h" / "instance.json").read_text())
        assert data["kind"] == "hanoi"

    def test_solve_prints_the_canonical_response(self, tmp_path, capsys):
        out = tmp_path / "i"
        run(capsys, "gen", "reversal", "4", "--out", str(out))
        code, stdout, _ = run(capsys, "solve", str(out / "instance.json"))
        assert code == 0
        inst = generate(TaskKind.REVERSAL, 4, 0)
        assert stdout.rstrip("\n") == render_response(inst)

    def test_solve_can_write_a_file(self, tmp_path, capsys):
        out = tmp_path / "i"
        run(capsys, "gen", "vanilla_addition", "3", "--out", str(out))
        target = tmp_path / "response.txt"
        code, stdout, _ = run(
            capsys, "solve", str(out / "instance.json"), "--out", str(target)
        )
        assert code == 0 and stdout.strip() == str(target)
        assert target.read_text().startswith("ANSWER: ")

    def test_eval_reports_all_three_outcomes(self, tmp_path, capsys):
        out = tmp_path / "i"
        run(capsys, "gen", "vanilla_addition", "3", "--out", str(out))
        inst_path = str(out / "instance.json")
        inst = generate(TaskKind.VANILLA_ADDITION, 3, 0)

        right = tmp_path / "right.txt"
        right.write_text(render_response(inst))
        assert run(capsys, "eval", inst_path, str(right))[1].startswith(
            "outcome: correct"
        )

        wrong = tmp_path / "wrong.txt"
        wrong.write_text("ANSWER: 1")
        assert run(capsys, "eval", inst_path, str(wrong))[1].startswith(
            "outcome: incorrect"
        )

        garbage = tmp_path / "garbage.txt"
        garbage.write_text("I cannot tell.")
        code, stdout, _ = run(capsys, "eval", inst_path, str(garbage))
        assert code == 0
        assert "outcome: ungraded" in stdout
        assert "parse failure:" in stdout

    def test_domain_errors_exit_1(self, tmp_path, capsys):
        code, _, stderr = run(
            capsys, "gen", "sudoku", "5", "--out", str(tmp_path)
        )
        assert code == 1 and stderr.startswith("error:")
        code, _, stderr = run(
            capsys, "gen", "hanoi", "2000", "--out", str(tmp_path)
        )
        assert code == 1 and "error:" in stderr

    def test_missing_files_exit_1(self, tmp_path, capsys):
        code, _, stderr = run(capsys, "solve", str(tmp_path / "nope.json"))
        assert code == 1 and stderr.startswith("error:")

    def test_bad_usage_exits_2(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["collect"])
        assert exc.value.code == 2
        capsys.readouterr()
        with pytest.raises(SystemExit):
            main(["no_such_command"])
        capsys.readouterr()


@pytest.fixture
def pipeline_dir(tmp_path):
    provider = tmp_path / "provider.json"
    provider.write_text(json.dumps({"kind": "mock_noisy", "noise_rate": 0.05}))
    return tmp_path


def collect_args(d, store="trials.jsonl"):
    return [
        "collect",
        "--kind",
        "reversal",
        "--model-id",
        "demo",
        "--c-list",
        "2,4,8",
        "--samples-per-c",
        "20",
        "--base-seed",
        "1",
        "--provider-config",
        str(d / "provider.json"),
        "--store",
        str(d / store),
    ]


class TestPipeline:
    def test_collect_aggregate_fit_plot(self, pipeline_dir, capsys):
        d = pipeline_dir
        code, stdout, _ = run(capsys, *collect_args(d))
        assert code == 0
        assert "appended 60, skipped 0" in stdout

        # resumability through the CLI
        code, stdout, _ = run(capsys, *collect_args(d))
        assert code == 0
        assert "appended 0, skipped 60" in stdout
        assert len(TrialStore(d / "trials.jsonl")) == 60

        points_csv = d / "points.csv"
        code, stdout, _ = run(
            capsys,
            "aggregate",
            "--store",
            str(d / "trials.jsonl"),
            "--kind",
            "reversal",
            "--model-id",
            "demo",
            "--out",
            str(points_csv),
        )
        assert code == 0
        assert "wrote 3 points" in stdout
        _, _, points = load_points_csv(points_csv)
        assert [pt.c for pt in points] == [2, 4, 8]
        assert all(pt.n_trials == 20 for pt in points)

        report = d / "fit.json"
        code, stdout, _ = run(
            capsys,
            "fit",
            "--points",
            str(points_csv),
            "--alpha",
            "1.0",
            "--bootstrap-replicates",
            "0",
            "--out",
            str(report),
        )
        assert code == 0
        assert stdout.splitlines()[0].split() == [
            "mode",
            "alpha",
            "r",
            "q",
            "se_r",
            "se_q",
            "chi2",
        ]
        data = json.loads(report.read_text())
        assert data["task"] == "reversal" and data["model_id"] == "demo"
        assert data["n_points"] == 3
        (row,) = data["fits"]
        assert row["alpha_mode"] == "fixed" and row["alpha"] == 1.0
        assert row["se_r"] is None  # no bootstrap requested
        assert row["r"] > 0 and row["q"] > 0

        svg = d / "curve.svg"
        table = d / "curve.csv"
        code, stdout, _ = run(
            capsys,
            "plot",
            "--points",
            str(points_csv),
            "--fit-report",
            str(report),
            "--title",
            "demo run",
            "--out-svg",
            str(svg),
            "--out-csv",
            str(table),
        )
        assert code == 0
        assert svg.read_text().lstrip().startswith("<?xml")
        rows = list(csv.reader(table.open()))
        assert rows[0] == ["row_type", "c", "accuracy", "ci_halfwidth"]
        kinds = [row[0] for row in rows[1:]]
        assert kinds.count("point") == 3
        assert kinds.count("curve") == 256

        # figure output is byte-stable
        svg2 = d / "curve2.svg"
        run(
            capsys,
            "plot",
            "--points",
            str(points_csv),
            "--fit-report",
            str(report),
            "--title",
            "demo run",
            "--out-svg",
            str(svg2),
        )
        assert svg.read_bytes() == svg2.read_bytes()

    def test_aggregate_accepts_normalization_notation(self, pipeline_dir, capsys):
        d = pipeline_dir
        run(capsys, *collect_args(d))
        code, stdout, _ = run(
            capsys,
            "aggregate",
            "--store",
            str(d / "trials.jsonl"),
            "--kind",
            "reversal",
            "--model-id",
            "demo",
            "--normalize",
            "odd_up:20",
            "--out",
            str(d / "norm.csv"),
        )
        assert code == 0 and "wrote 3 points" in stdout
        code, _, stderr = run(
            capsys,
            "aggregate",
            "--store",
            str(d / "trials.jsonl"),
            "--kind",
            "reversal",
            "--model-id",
            "demo",
            "--normalize",
            "halve",
            "--out",
            str(d / "bad.csv"),
        )
        assert code == 1 and "error:" in stderr


def synthetic_points_csv(path, params, cs, halfwidth=0.01):
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(
            ["task", "model_id", "c", "n_trials", "n_correct", "accuracy", "ci_halfwidth"]
        )
        for c in cs:
            writer.writerow(
                [
                    "reversal",
                    "synthetic",
                    c,
                    "",
                    "",
                    repr(error_model.accuracy(params, c)),
                    repr(halfwidth),
                ]
            )


class TestFitCommand:
    def test_compare_prints_two_rows(self, tmp_path, capsys):
        params = error_model.ErrorModelParams(r=1e-3, q=3.0, alpha=1.0)
        path = tmp_path / "points.csv"
        synthetic_points_csv(path, params, [5, 10, 20, 40, 80, 160])
        code, stdout, _ = run(
            capsys,
            "fit",
            "--points",
            str(path),
            "--compare",
            "--bootstrap-replicates",
            "0",
        )
        assert code == 0
        rows = [line for line in stdout.splitlines() if line.startswith("fixed")]
        assert len(rows) == 2

    def test_bootstrap_needs_trial_counts(self, tmp_path, capsys):
        # synthetic points carry no counts to resample
        params = error_model.ErrorModelParams(r=1e-3, q=3.0, alpha=1.0)
        path = tmp_path / "points.csv"
        synthetic_points_csv(path, params, [5, 10, 20, 40])
        code, _, stderr = run(
            capsys,
            "fit",
            "--points",
            str(path),
            "--bootstrap-replicates",
            "200",
        )
        assert code == 1
        assert "error:" in stderr

    def test_degenerate_data_warns(self, tmp_path, capsys):
        path = tmp_path / "points.csv"
        with open(path, "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(
                [
                    "task",
                    "model_id",
                    "c",
                    "n_trials",
                    "n_correct",
                    "accuracy",
                    "ci_halfwidth",
                ]
            )
            for c in (2, 4, 8):
                writer.writerow(["reversal", "m", c, 50, 50, "1.0", "0.05"])
        code, _, stderr = run(
            capsys,
            "fit",
            "--points",
            str(path),
            "--bootstrap-replicates",
            "0",
        )
        assert code == 0
        assert "weakly constrained" in stderr


class TestSimulateCommands:
    def test_accuracy_cross_check(self, capsys):
        code, stdout, _ = run(
            capsys,
            "simulate",
            "accuracy",
            "--r",
            "0.01",
            "--q",
            "2",
            "--c-list",
            "1,4,16",
            "--samples",
            "4000",
            "--seed",
            "0",
        )
        assert code == 0
        last = stdout.splitlines()[-1]
        assert last.startswith("max |z| = ")
        assert float(last.split("=")[1]) < 5.0

    def test_scaling_demo(self, capsys):
        code, stdout, _ = run(
            capsys,
            "simulate",
            "scaling-demo",
            "--context-lengths",
            "1,2,4,8,16",
            "--trials-per-length",
            "500",
            "--seed",
            "2",
        )
        assert code == 0
        assert "alpha_uncorrelated" in stdout and "(expect 0.5)" in stdout
        assert "alpha_correlated" in stdout and "(expect 1.0)" in stdout


class TestPlotCommand:
    def test_direct_params_and_linear_axis(self, tmp_path, capsys):
        params = error_model.ErrorModelParams(r=1e-2, q=2.0, alpha=1.0)
        path = tmp_path / "points.csv"
        synthetic_points_csv(path, params, [2, 4, 8, 16])
        svg = tmp_path / "out.svg"
        code, _, _ = run(
            capsys,
            "plot",
            "--points",
            str(path),
            "--r",
            "0.01",
            "--q",
            "2",
            "--linear-x",
            "--out-svg",
            str(svg),
        )
        assert code == 0 and svg.exists()

    def test_r_without_q_is_an_error(self, tmp_path, capsys):
        params = error_model.ErrorModelParams(r=1e-2, q=2.0, alpha=1.0)
        path = tmp_path / "points.csv"
        synthetic_points_csv(path, params, [2, 4, 8])
        code, _, stderr = run(
            capsys,
            "plot",
            "--points",
            str(path),
            "--r",
            "0.01",
            "--out-svg",
            str(tmp_path / "x.svg"),
        )
        assert code == 1
        assert "--q" in stderr

    def test_points_only_plot(self, tmp_path, capsys):
        params = error_model.ErrorModelParams(r=1e-2, q=2.0, alpha=1.0)
        path = tmp_path / "points.csv"
        synthetic_points_csv(path, params, [2, 4, 8])
        svg = tmp_path / "bare.svg"
        code, _, _ = run(capsys, "plot", "--points", str(path), "--out-svg", str(svg))
        assert code == 0 and svg.exists()


class TestPlottingModule:
    def points(self, cs, params):
        return [
            AccuracyPoint.from_curve(c, error_model.accuracy(params, c), 0.02)
            for c in cs
        ]

    def test_curve_grid_spans_the_data_exactly(self):
        params = error_model.ErrorModelParams(r=1e-3, q=2.0, alpha=1.0)
        series = build_series(self.points([5, 10, 40], params), params)
        assert len(series.curve_c) == 256
        assert series.curve_c[0] == 5.0
        assert series.curve_c[-1] == 40.0
        assert list(series.curve_c) == sorted(series.curve_c)
        assert all(0.0 <= a <= 1.0 for a in series.curve_accuracy)

    def test_without_params_there_is_no_curve(self):
        params = error_model.ErrorModelParams(r=1e-3, q=2.0, alpha=1.0)
        series = build_series(self.points([5, 10], params))
        assert series.curve_c == () and series.curve_accuracy == ()

    def test_single_point_collapses_the_grid(self):
        params = error_model.ErrorModelParams(r=1e-3, q=2.0, alpha=1.0)
        series = build_series(self.points([7], params), params)
        assert set(series.curve_c) == {7.0}

    def test_points_are_sorted_into_the_series(self):
        params = error_model.ErrorModelParams(r=1e-3, q=2.0, alpha=1.0)
        series = build_series(self.points([40, 5, 10], params), params)
        assert series.point_c == (5, 10, 40)

    def test_empty_series_rejected(self):
        with pytest.raises(DomainError):
            build_series([])

    def test_csv_and_svg_are_deterministic(self, tmp_path):
        params = error_model.ErrorModelParams(r=1e-3, q=2.0, alpha=1.0)
        series = build_series(self.points([5, 10, 20], params), params, title="t")
        a, b = tmp_path / "a.svg", tmp_path / "b.svg"
        write_series_svg(series, a)
        write_series_svg(series, b)
        assert a.read_bytes() == b.read_bytes()
        ca, cb = tmp_path / "a.csv", tmp_path / "b.csv"
        write_series_csv(series, ca)
        write_series_csv(series, cb)
        assert ca.read_bytes() == cb.read_bytes()
        assert b"<dc:date>" not in a.read_bytes()

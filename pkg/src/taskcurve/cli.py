"""Command-line front end.

Subcommands cover the full pipeline: gen and solve for single
instances, collect for filling a trial store through a provider,
aggregate for turning records into accuracy points, fit for parameter
estimation, simulate for the analytic-versus-simulated cross-checks,
eval for grading one response, and plot for figures.  All file outputs
are byte-stable across reruns with the same arguments (timestamps
inside trial records excepted).
"""

import argparse
import json
import math
import os
import sys

from taskcurve import error_model, inference
from taskcurve.collector import ProviderConfig, SamplingPlan, run_plan
from taskcurve.datastore import (
    NormalizationRule,
    TrialStore,
    aggregate,
    export_points_csv,
    load_points_csv,
)
from taskcurve.exceptions import TaskcurveError
from taskcurve.tasks import (
    GradeOutcome,
    generate,
    grade,
    instance_from_dict,
    instance_to_dict,
    kind_from_name,
    parse,
    render_prompt,
    render_response,
)

__all__ = ["main"]


def _c_list(text: str):
    try:
        values = tuple(int(tok) for tok in text.split(",") if tok.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad c list {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("c list must be nonempty")
    return values


def _load_instance(path):
    with open(path, encoding="utf-8") as handle:
        return instance_from_dict(json.load(handle))


def _write_text(path, text):
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(text)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_gen(args) -> int:
    kind = kind_from_name(args.kind)
    inst = generate(kind, args.c, args.seed)
    os.makedirs(args.out, exist_ok=True)
    inst_path = os.path.join(args.out, "instance.json")
    prompt_path = os.path.join(args.out, "prompt.txt")
    _write_text(
        inst_path, json.dumps(instance_to_dict(inst), indent=2) + "\n"
    )
    _write_text(prompt_path, render_prompt(inst))
    print(inst_path)
    print(prompt_path)
    return 0


def cmd_solve(args) -> int:
    inst = _load_instance(args.instance)
    text = render_response(inst)
    if args.out:
        _write_text(args.out, text)
        print(args.out)
    else:
        print(text)
    return 0


def cmd_eval(args) -> int:
    inst = _load_instance(args.instance)
    with open(args.response, encoding="utf-8") as handle:
        response_text = handle.read()
    parsed = parse(inst.kind, response_text)
    outcome = grade(inst, parsed)
    print(f"outcome: {outcome.value}")
    if outcome is GradeOutcome.UNGRADED:
        print(f"parse failure: {parsed.failure_reason}")
    return 0


def cmd_collect(args) -> int:
    provider = ProviderConfig.from_file(args.provider_config)
    plan = SamplingPlan(
        task=kind_from_name(args.kind),
        model_id=args.model_id,
        c_values=args.c_list,
        samples_per_c=args.samples_per_c,
        base_seed=args.base_seed,
    )
    store = TrialStore(args.store)
    summary = run_plan(plan, provider, store)
    print(summary.format())
    print(f"appended {summary.total_sent}, skipped {summary.total_skipped}")
    return 0


def cmd_aggregate(args) -> int:
    kind = kind_from_name(args.kind)
    store = TrialStore(args.store)
    rule = NormalizationRule.from_text(args.normalize)
    points = aggregate(store.iter_records(), kind, args.model_id, rule)
    export_points_csv(points, kind, args.model_id, args.out)
    print(f"wrote {len(points)} points to {args.out}")
    return 0


def _fit_row(points, alpha, seed, replicates):
    result = inference.fit(
        points, alpha=alpha, seed=seed, bootstrap_replicates=replicates
    )
    return {
        "alpha_mode": "free" if alpha is None else "fixed",
        "alpha": result.params.alpha,
        "r": result.params.r,
        "q": result.params.q,
        "se_r": result.se_r,
        "se_q": result.se_q,
        "se_alpha": result.se_alpha,
        "chi_squared": result.chi_squared,
        "n_points": result.n_points,
        "converged": result.converged,
        "bootstrap_replicates": result.bootstrap_replicates,
        "degenerate": result.degenerate,
        "grid_ambiguity": len(result.grid_seeds),
    }


def _print_fit_table(rows):
    def fmt(value, width, spec):
        text = "-" if value is None else format(value, spec)
        return text.rjust(width)

    print(
        f"{'mode':<6} {'alpha':>7} {'r':>12} {'q':>9}"
        f" {'se_r':>12} {'se_q':>9} {'chi2':>9}"
    )
    for row in rows:
        print(
            f"{row['alpha_mode']:<6} {row['alpha']:>7.3f} {row['r']:>12.4e}"
            f" {row['q']:>9.3f} {fmt(row['se_r'], 12, '.2e')}"
            f" {fmt(row['se_q'], 9, '.3f')} {row['chi_squared']:>9.4f}"
        )


def cmd_fit(args) -> int:
    task, model_id, points = load_points_csv(args.points)
    if args.compare:
        alphas = [1.0, 0.5]
    elif args.alpha_free:
        alphas = [None]
    else:
        alphas = [args.alpha]
    rows = [
        _fit_row(points, alpha, args.seed, args.bootstrap_replicates)
        for alpha in alphas
    ]
    _print_fit_table(rows)
    for row in rows:
        if not row["converged"]:
            print("warning: descent did not converge", file=sys.stderr)
        if row["degenerate"]:
            print(
                "warning: no point resolves the curve's falling edge;"
                " parameters are weakly constrained",
                file=sys.stderr,
            )
    if args.out:
        report = {
            "task": task,
            "model_id": model_id,
            "n_points": len(points),
            "fits": rows,
        }
        _write_text(args.out, json.dumps(report, indent=2) + "\n")
        print(f"wrote {args.out}")
    return 0


def cmd_simulate_accuracy(args) -> int:
    cfg = error_model.MonteCarloConfig.from_rate(
        args.r, args.q, args.alpha, args.samples, args.seed
    )
    params = cfg.params()
    print(f"{'c':>8} {'analytic':>12} {'simulated':>12} {'se':>10} {'z':>8}")
    worst = 0.0
    for c in args.c_list:
        analytic = error_model.accuracy(params, c)
        simulated = error_model.mc_accuracy(cfg, c)
        se = math.sqrt(max(analytic * (1.0 - analytic), 0.0) / args.samples)
        if se > 0.0:
            z = (simulated - analytic) / se
            worst = max(worst, abs(z))
            z_text = f"{z:>8.2f}"
        else:
            z_text = f"{'-':>8}"
        print(
            f"{c:>8} {analytic:>12.6f} {simulated:>12.6f} {se:>10.2e} {z_text}"
        )
    print(f"max |z| = {worst:.2f}")
    return 0


def cmd_simulate_scaling(args) -> int:
    cfg = error_model.ScalingDemoConfig(
        token_classes=args.token_classes,
        context_lengths=args.context_lengths,
        trials_per_length=args.trials_per_length,
        per_term_noise=args.per_term_noise,
        seed=args.seed,
    )
    result = error_model.scaling_demo(cfg)
    print(f"{'c':>8} {'var_uncorrelated':>18} {'var_correlated':>16}")
    for c, vu, vc in zip(
        result.context_lengths,
        result.uncorrelated_variances,
        result.correlated_variances,
    ):
        print(f"{c:>8} {vu:>18.6g} {vc:>16.6g}")
    print(f"alpha_uncorrelated = {result.alpha_uncorrelated:.4f} (expect 0.5)")
    print(f"alpha_correlated   = {result.alpha_correlated:.4f} (expect 1.0)")
    return 0


def cmd_plot(args) -> int:
    from taskcurve.plotting import build_series, write_series_csv, write_series_svg

    _, _, points = load_points_csv(args.points)
    params = None
    if args.fit_report:
        with open(args.fit_report, encoding="utf-8") as handle:
            report = json.load(handle)
        row = report["fits"][0]
        params = error_model.ErrorModelParams(
            r=row["r"], q=row["q"], alpha=row["alpha"]
        )
    elif args.r is not None:
        if args.q is None:
            raise TaskcurveError("--r needs --q as well")
        params = error_model.ErrorModelParams(
            r=args.r, q=args.q, alpha=args.alpha
        )
    series = build_series(points, params, title=args.title)
    write_series_svg(series, args.out_svg, log_x=not args.linear_x)
    print(args.out_svg)
    if args.out_csv:
        write_series_csv(series, args.out_csv)
        print(args.out_csv)
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="taskcurve",
        description="Deterministic task suites with an accuracy-curve toolkit.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate one task instance")
    p.add_argument("kind", help="task kind, e.g. reversal or Hanoi")
    p.add_argument("c", type=int, help="problem complexity")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=".", help="output directory")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("solve", help="canonical response for an instance file")
    p.add_argument("instance")
    p.add_argument("--out", default="")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("eval", help="grade a response file against an instance")
    p.add_argument("instance")
    p.add_argument("response")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("collect", help="fill a trial store through a provider")
    p.add_argument("--kind", required=True)
    p.add_argument("--model-id", required=True)
    p.add_argument("--c-list", type=_c_list, required=True)
    p.add_argument("--samples-per-c", type=int, default=200)
    p.add_argument("--base-seed", type=int, default=0)
    p.add_argument("--provider-config", required=True)
    p.add_argument("--store", required=True)
    p.set_defaults(func=cmd_collect)

    p = sub.add_parser("aggregate", help="accuracy points from a trial store")
    p.add_argument("--store", required=True)
    p.add_argument("--kind", required=True)
    p.add_argument("--model-id", required=True)
    p.add_argument(
        "--normalize",
        default="identity",
        help="identity, odd_up[:THRESHOLD], or stride_down",
    )
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_aggregate)

    p = sub.add_parser("fit", help="fit the accuracy law to aggregated points")
    p.add_argument("--points", required=True, help="aggregate CSV")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--alpha", type=float, default=1.0)
    group.add_argument(
        "--alpha-free",
        action="store_true",
        help="fit the exponent instead of fixing it",
    )
    group.add_argument(
        "--compare",
        action="store_true",
        help="fit at alpha 1.0 and 0.5 and print both rows",
    )
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--bootstrap-replicates", type=int, default=200)
    p.add_argument("--out", default="", help="write a JSON report here")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("simulate", help="analytic-versus-simulated checks")
    sim = p.add_subparsers(dest="simulate_command", required=True)

    ps = sim.add_parser("accuracy", help="threshold simulation vs the law")
    ps.add_argument("--r", type=float, required=True)
    ps.add_argument("--q", type=int, required=True)
    ps.add_argument("--alpha", type=float, default=1.0)
    ps.add_argument("--c-list", type=_c_list, required=True)
    ps.add_argument("--samples", type=int, default=200_000)
    ps.add_argument("--seed", type=int, default=0)
    ps.set_defaults(func=cmd_simulate_accuracy)

    ps = sim.add_parser(
        "scaling-demo",
        help="variance growth of summed noise, correlated vs not",
    )
    ps.add_argument("--token-classes", type=int, default=1)
    ps.add_argument(
        "--context-lengths", type=_c_list, default=(1, 2, 4, 8, 16, 32, 64, 128)
    )
    ps.add_argument("--trials-per-length", type=int, default=4000)
    ps.add_argument("--per-term-noise", type=float, default=1.0)
    ps.add_argument("--seed", type=int, default=0)
    ps.set_defaults(func=cmd_simulate_scaling)

    p = sub.add_parser("plot", help="accuracy figure from an aggregate CSV")
    p.add_argument("--points", required=True)
    p.add_argument("--fit-report", default="", help="JSON report from fit")
    p.add_argument("--r", type=float, default=None)
    p.add_argument("--q", type=float, default=None)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--title", default="")
    p.add_argument("--out-svg", required=True)
    p.add_argument("--out-csv", default="")
    p.add_argument(
        "--linear-x", action="store_true", help="linear instead of log c axis"
    )
    p.set_defaults(func=cmd_plot)

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except TaskcurveError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Command-line surface: account over recorded distance streams, replay
simulation presets, convert serialized ledgers between the two (epsilon,
delta) forms, and report the implied attacker success probability.

Exit codes: 0 success, 2 usage or parse failure, 3 infeasible delta budget,
4 numeric failure.  Every report echoes the fully resolved configuration.
Primary outputs are JSON and CSV; ``--plot`` additionally renders figures
next to them.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .accountant import DEFAULT_LAMBDA_GRID, Ledger, MODE_BDP, MODE_MA, attack_success_probability
from .estimator import EstimatorConfig
from .exceptions import (
    BayesdpError,
    BudgetExhaustedError,
    ConfigurationError,
    DataError,
    DomainError,
    NumericsError,
    ParseError,
)
from .mechanisms import MechanismConfig, ma_privacy_cost
from .simulator import (
    PRESET_NAMES,
    ClipPolicy,
    GradientModel,
    NoisePolicy,
    SimulationPlan,
    preset_plans,
    run_logreg_baseline,
    run_logreg_dpsgd,
    run_simulation,
    bundled_dataset_path,
    step_costs_for_distances,
)

__all__ = ["main"]


def _grid(lambda_max: int | None) -> tuple[int, ...]:
    if lambda_max is None:
        return DEFAULT_LAMBDA_GRID
    grid = tuple(l for l in DEFAULT_LAMBDA_GRID if l <= lambda_max)
    if not grid:
        raise ConfigurationError(f"--lambda-max {lambda_max} leaves an empty grid")
    return grid


def _report_payload(report, steps: int, config: dict) -> dict:
    payload = report.as_dict()
    payload["steps"] = steps
    payload["config"] = config
    return payload


def _emit_json(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, indent=2)
    if out is None or out == "-":
        print(text)
    else:
        Path(out).write_text(text + "\n", encoding="utf-8")


def _summary_line(tag: str, report) -> str:
    return (
        f"{tag}: epsilon={report.epsilon:.4g} delta={report.delta:.4g} "
        f"lambda*={report.lambda_star} attack_success={report.attack_success:.4g}"
    )


# ----------------------------------------------------------------------
# account
# ----------------------------------------------------------------------


def _read_stream(path: str) -> list[tuple[int, np.ndarray]]:
    """JSON-lines records {"step": n, "distances": [...]} from a file or '-'."""
    handle = sys.stdin if path == "-" else open(path, "r", encoding="utf-8")
    records: list[tuple[int, np.ndarray]] = []
    try:
        for line_no, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON: {exc.msg}", line=line_no) from exc
            if not isinstance(record, dict) or "distances" not in record:
                raise ParseError("record must be an object with a 'distances' field", line=line_no)
            distances = np.asarray(record["distances"], dtype=float)
            if distances.ndim != 1 or distances.size == 0:
                raise ParseError("'distances' must be a non-empty flat list", line=line_no)
            if np.any(~np.isfinite(distances)) or np.any(distances < 0.0):
                raise ParseError("distances must be finite and non-negative", line=line_no)
            records.append((int(record.get("step", len(records))), distances))
    finally:
        if handle is not sys.stdin:
            handle.close()
    return records


def _cmd_account(args: argparse.Namespace) -> int:
    if args.mode in ("ma", "both") and args.clip is None:
        raise ConfigurationError(f"--mode {args.mode} requires --clip")
    if args.trace is not None and args.mode != "both":
        raise ConfigurationError("--trace needs --mode both (its columns carry both accountants)")
    cfg = MechanismConfig(sigma=args.sigma, q=args.q, clip=args.clip)
    grid = _grid(args.lambda_max)
    records = _read_stream(args.stream)

    ledgers: dict[str, Ledger] = {}
    if args.mode in ("bdp", "both"):
        ledgers[MODE_BDP] = Ledger(grid, mode=MODE_BDP, gamma=args.gamma)
    if args.mode in ("ma", "both"):
        ledgers[MODE_MA] = Ledger(grid, mode=MODE_MA, gamma=0.0)

    ma_costs = None
    if cfg.clip is not None:
        ma_costs = np.array([ma_privacy_cost(cfg, lam) for lam in grid])

    trace_rows = []
    for step_no, (stamp, distances) in enumerate(records, start=1):
        if MODE_BDP in ledgers:
            if distances.size < 2:
                raise DataError(
                    f"record {stamp}: estimated accounting needs >= 2 distances per step"
                )
            est_cfg = EstimatorConfig(
                m=distances.size, gamma=args.gamma, clamp_to_ma=not args.no_clamp
            )
            costs = step_costs_for_distances(distances, cfg, grid, est_cfg, ma_costs)
            estimated = True
            if est_cfg.clamp_to_ma and ma_costs is not None:
                estimated = bool(np.any(costs < ma_costs))
            ledgers[MODE_BDP].record_step(costs, estimated=estimated)
        if MODE_MA in ledgers:
            ledgers[MODE_MA].record_step(ma_costs)
        if args.trace is not None:
            row_dp = ledgers[MODE_MA].epsilon_at(args.delta)
            row_bdp = ledgers[MODE_BDP].epsilon_at(args.delta)
            trace_rows.append(
                f"{step_no},{row_dp.epsilon:.10g},{row_bdp.epsilon:.10g},"
                f"{args.delta:.10g},{row_dp.lambda_star},{row_bdp.lambda_star}"
            )

    config_echo = {
        "stream": args.stream,
        "sigma": args.sigma,
        "q": args.q,
        "clip": args.clip,
        "gamma": args.gamma,
        "delta": args.delta,
        "mode": args.mode,
        "lambda_grid": list(grid),
        "clamp_to_ma": not args.no_clamp,
    }
    reports = {mode: ledger.epsilon_at(args.delta) for mode, ledger in ledgers.items()}
    if args.mode == "both":
        payload = {
            mode: _report_payload(report, ledgers[mode].steps, config_echo)
            for mode, report in reports.items()
        }
    else:
        payload = _report_payload(reports[args.mode], ledgers[args.mode].steps, config_echo)
    _emit_json(payload, args.out)
    if args.out is not None:
        for mode, report in sorted(reports.items()):
            print(_summary_line(mode, report))
    if args.trace is not None:
        from .simulator import TRACE_HEADER

        Path(args.trace).write_text(
            TRACE_HEADER + "\n" + "\n".join(trace_rows) + ("\n" if trace_rows else ""),
            encoding="utf-8",
        )
    if args.ledger_out is not None:
        ledgers[MODE_BDP if args.mode != "ma" else MODE_MA].save(args.ledger_out)
    return 0


# ----------------------------------------------------------------------
# simulate
# ----------------------------------------------------------------------


def _write_metadata(directory: Path, name: str, payload: dict) -> None:
    (directory / f"{name}_metadata.json").write_text(
        json.dumps(payload, indent=2) + "\n", encoding="utf-8"
    )


def _cmd_simulate(args: argparse.Namespace) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    if args.preset is not None:
        plans = preset_plans(args.preset, seed=args.seed, steps=args.steps)
        name = args.preset
    else:
        plans = [("custom", _custom_plan(args))]
        name = "custom"

    entries = []
    variant_meta = []
    for variant, plan in plans:
        trace = run_simulation(plan)
        csv_path = out_dir / f"{name}_{variant}.csv"
        trace.to_csv(csv_path)
        meta = {"variant": variant, "trace": csv_path.name, **trace.metadata}
        if name == "fig6":
            profile = trace.ledger_dp.epsilon_profile(plan.delta)
            profile_path = out_dir / f"{name}_{variant}_profile.csv"
            with open(profile_path, "w", encoding="utf-8", newline="\n") as handle:
                handle.write("lambda,epsilon\n")
                for lam, eps in zip(trace.ledger_dp.lambda_grid, profile):
                    handle.write(f"{lam},{eps:.10g}\n")
            meta["profile"] = profile_path.name
        entries.append((variant, plan, trace))
        variant_meta.append(meta)
    _write_metadata(out_dir, name, {"preset": name, "seed": args.seed, "variants": variant_meta})

    summary_path = None
    if name.startswith(("fig1", "fig2")):
        summary_path = out_dir / f"{name}_summary.csv"
        with open(summary_path, "w", encoding="utf-8", newline="\n") as handle:
            handle.write("sigma,epsilon_dp,epsilon_bdp\n")
            for variant, plan, trace in entries:
                handle.write(
                    f"{plan.mechanism.sigma:.10g},{trace.epsilon_dp[-1]:.10g},"
                    f"{trace.epsilon_bdp[-1]:.10g}\n"
                )

    if args.plot:
        from . import plotting

        figure_path = out_dir / f"{name}.png"
        if name.startswith(("fig1", "fig2")):
            points = [
                (plan.mechanism.sigma, trace.epsilon_dp[-1], trace.epsilon_bdp[-1])
                for _, plan, trace in entries
            ]
            plotting.plot_sigma_sweep(points, figure_path, title=name)
        elif name == "fig6":
            profiles = [
                (variant, trace.ledger_dp.lambda_grid, trace.ledger_dp.epsilon_profile(plan.delta))
                for variant, plan, trace in entries
            ]
            plotting.plot_lambda_profiles(profiles, figure_path, title=name)
        else:
            plotting.plot_traces(
                [(variant, trace) for variant, _, trace in entries], figure_path, title=name
            )
        print(f"figure written to {figure_path}")

    for variant, plan, trace in entries:
        print(
            f"{name}/{variant}: steps={plan.steps} "
            f"eps_dp={trace.epsilon_dp[-1]:.4g} eps_bdp={trace.epsilon_bdp[-1]:.4g}"
        )
    return 0


def _custom_plan(args: argparse.Namespace) -> SimulationPlan:
    model = GradientModel(
        kind=args.model, shape=args.shape, scale=args.scale, seed=args.seed
    )
    if args.clip_quantile is not None and args.clip_absolute is not None:
        raise ConfigurationError("give at most one of --clip-quantile and --clip-absolute")
    if args.clip_quantile is not None:
        clip_policy = ClipPolicy.quantile(args.clip_quantile)
    elif args.clip_absolute is not None:
        clip_policy = ClipPolicy.absolute(args.clip_absolute)
    else:
        clip_policy = ClipPolicy.none()
    if args.noise_quantile is not None and args.noise_absolute is not None:
        raise ConfigurationError("give at most one of --noise-quantile and --noise-absolute")
    if args.noise_quantile is not None:
        noise_policy = NoisePolicy.quantile(args.noise_quantile)
    else:
        noise_policy = NoisePolicy.absolute(args.noise_absolute)
    return SimulationPlan(
        model=model,
        steps=args.steps,
        mechanism=MechanismConfig(
            sigma=args.sigma,
            q=args.q,
            clip=args.clip,
            noise_multiplier_factor=args.factor,
        ),
        estimator=EstimatorConfig(m=args.m, gamma=args.gamma),
        clip_policy=clip_policy,
        noise_policy=noise_policy,
        delta=args.delta,
        lambda_grid=_grid(args.lambda_max),
        seed=args.seed,
    )


# ----------------------------------------------------------------------
# convert / attack-prob / train-logreg
# ----------------------------------------------------------------------


def _cmd_convert(args: argparse.Namespace) -> int:
    if (args.delta is None) == (args.epsilon is None):
        raise ConfigurationError("give exactly one of --delta and --epsilon")
    ledger = Ledger.load(args.ledger)
    if args.delta is not None:
        report = ledger.epsilon_at(args.delta)
    else:
        report = ledger.delta_at(args.epsilon)
    config_echo = {"ledger": args.ledger, "delta": args.delta, "epsilon": args.epsilon}
    _emit_json(_report_payload(report, ledger.steps, config_echo), args.out)
    if args.out is not None:
        print(_summary_line(report.mode, report))
    return 0


def _cmd_attack_prob(args: argparse.Namespace) -> int:
    print(f"{attack_success_probability(args.epsilon):.4g}")
    return 0


def _cmd_train_logreg(args: argparse.Namespace) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    data = args.data if args.data is not None else str(bundled_dataset_path())
    plan = SimulationPlan(
        model=GradientModel("constant", scale=1.0, seed=args.seed),
        steps=args.steps,
        mechanism=MechanismConfig(
            sigma=args.sigma, q=args.q, clip=args.clip, noise_multiplier_factor=args.factor
        ),
        estimator=EstimatorConfig(m=args.m, gamma=args.gamma),
        delta=args.delta,
        lambda_grid=_grid(args.lambda_max),
        seed=args.seed,
        gradient_aggregation=args.aggregation,
    )
    result = run_logreg_dpsgd(data, plan, label_col=args.label_col, learning_rate=args.lr)
    trace = result.trace
    trace.to_csv(out_dir / "trace.csv")
    baseline = None
    if args.baseline:
        baseline = run_logreg_baseline(data, plan, label_col=args.label_col, learning_rate=args.lr)
    payload = {
        "train_accuracy": result.train_accuracy,
        "test_accuracy": result.test_accuracy,
        "baseline_test_accuracy": baseline.test_accuracy if baseline else None,
        "final": {
            "epsilon_dp": float(trace.epsilon_dp[-1]),
            "epsilon_bdp": float(trace.epsilon_bdp[-1]),
            "delta": plan.delta,
        },
        "config": trace.metadata,
    }
    (out_dir / "accuracy.json").write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    if args.plot:
        from . import plotting

        plotting.plot_training(
            trace, result.train_accuracy, result.test_accuracy, out_dir / "training.png"
        )
    print(
        f"final: test_acc={result.test_accuracy[-1]:.4g} "
        f"eps_dp={trace.epsilon_dp[-1]:.4g} eps_bdp={trace.epsilon_bdp[-1]:.4g}"
    )
    return 0


# ----------------------------------------------------------------------
# parser
# ----------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bayesdp",
        description="Privacy accounting for the subsampled Gaussian mechanism.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_account = sub.add_parser("account", help="account over a recorded distance stream")
    p_account.add_argument("stream", help="JSON-lines distance stream, or - for stdin")
    p_account.add_argument("--sigma", type=float, required=True, help="noise multiplier")
    p_account.add_argument("--q", type=float, required=True, help="subsampling probability")
    p_account.add_argument("--delta", type=float, required=True, help="total failure budget")
    p_account.add_argument("--clip", type=float, default=None, help="sensitivity bound")
    p_account.add_argument("--gamma", type=float, default=1e-15, help="estimator failure probability")
    p_account.add_argument("--mode", choices=("ma", "bdp", "both"), default="bdp")
    p_account.add_argument("--lambda-max", type=int, default=None, help="truncate the order grid")
    p_account.add_argument("--no-clamp", action="store_true", help="disable the worst-case cap")
    p_account.add_argument("--out", default=None, help="report JSON path (default: stdout)")
    p_account.add_argument("--trace", default=None, help="per-step CSV path (needs --mode both)")
    p_account.add_argument("--ledger-out", default=None, help="serialize the ledger here")
    p_account.set_defaults(func=_cmd_account)

    p_sim = sub.add_parser("simulate", help="run a synthetic accounting simulation")
    p_sim.add_argument("--preset", choices=PRESET_NAMES, default=None)
    p_sim.add_argument("--steps", type=int, default=10_000)
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--out", required=True, help="output directory")
    p_sim.add_argument("--plot", action="store_true", help="render figures next to the CSVs")
    p_sim.add_argument("--model", choices=("weibull", "lognormal", "constant"), default="weibull")
    p_sim.add_argument("--shape", type=float, default=0.5)
    p_sim.add_argument("--scale", type=float, default=1.0)
    p_sim.add_argument("--q", type=float, default=64.0 / 60000.0)
    p_sim.add_argument("--sigma", type=float, default=1.0)
    p_sim.add_argument("--factor", type=float, default=1.0, help="noise multiplier factor")
    p_sim.add_argument("--clip", type=float, default=None, help="mechanism clip bound")
    p_sim.add_argument("--clip-quantile", type=float, default=None)
    p_sim.add_argument("--clip-absolute", type=float, default=None)
    p_sim.add_argument("--noise-quantile", type=float, default=None)
    p_sim.add_argument("--noise-absolute", type=float, default=None)
    p_sim.add_argument("--m", type=int, default=16, help="distance samples per step")
    p_sim.add_argument("--gamma", type=float, default=1e-15)
    p_sim.add_argument("--delta", type=float, default=1e-5)
    p_sim.add_argument("--lambda-max", type=int, default=None)
    p_sim.set_defaults(func=_cmd_simulate)

    p_conv = sub.add_parser("convert", help="fixed-delta or fixed-epsilon conversion of a ledger")
    p_conv.add_argument("--ledger", required=True, help="serialized ledger JSON")
    p_conv.add_argument("--delta", type=float, default=None)
    p_conv.add_argument("--epsilon", type=float, default=None)
    p_conv.add_argument("--out", default=None)
    p_conv.set_defaults(func=_cmd_convert)

    p_attack = sub.add_parser("attack-prob", help="attacker success probability for an epsilon")
    p_attack.add_argument("--epsilon", type=float, required=True)
    p_attack.set_defaults(func=_cmd_attack_prob)

    p_train = sub.add_parser("train-logreg", help="noisy-SGD logistic regression on a CSV")
    p_train.add_argument("--data", default=None, help="dataset CSV (default: bundled synthetic)")
    p_train.add_argument("--label-col", default="label")
    p_train.add_argument("--sigma", type=float, default=4.0, help="noise multiplier")
    p_train.add_argument("--q", type=float, default=0.04, help="subsampling probability")
    p_train.add_argument("--clip", type=float, default=1.0)
    p_train.add_argument("--factor", type=float, default=1.0)
    p_train.add_argument("--gamma", type=float, default=1e-15)
    p_train.add_argument("--m", type=int, default=16)
    p_train.add_argument("--delta", type=float, default=1e-5)
    p_train.add_argument("--steps", type=int, default=400)
    p_train.add_argument("--lr", type=float, default=0.5)
    p_train.add_argument("--aggregation", choices=("mean", "sum"), default="mean")
    p_train.add_argument("--seed", type=int, default=0)
    p_train.add_argument("--lambda-max", type=int, default=None)
    p_train.add_argument("--out", required=True, help="output directory")
    p_train.add_argument("--baseline", action="store_true", help="also run the noise-free twin")
    p_train.add_argument("--plot", action="store_true")
    p_train.set_defaults(func=_cmd_train_logreg)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ParseError as exc:
        location = f" (line {exc.line})" if exc.line is not None else ""
        location += f" (column {exc.column})" if exc.column is not None else ""
        print(f"error: {exc}{location}", file=sys.stderr)
        return 2
    except BudgetExhaustedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except NumericsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except (ConfigurationError, DataError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except BayesdpError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

Exit status is 0 when no agent failed, 1 when the simulation produced
failures, and 2 for usage or configuration errors.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import Sequence, TextIO

from botcharging import scenarios
from botcharging.config import load_config
from botcharging.engine import ConfigError, MetricsReport, SimConfig, run, simulate, write_trace
from botcharging.scheduler import Policy

EXIT_OK, EXIT_FAILURES, EXIT_USAGE = 0, 1, 2


def _add_common(p: argparse.ArgumentParser, config: bool = True) -> None:
    if config:
        p.add_argument("--config", metavar="PATH", help="key = value config file")
        p.add_argument(
            "--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
            help="override a config key (repeatable)",
        )
    p.add_argument("--trace", metavar="PATH", help="write the per-tick trace as CSV")
    p.add_argument("--seed", type=int)
    p.add_argument("--ticks", type=int)
    p.add_argument("--policy", choices=[p.value for p in Policy])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="botcharging",
        description="Battery-limited patrol agents sharing one charger.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    _add_common(sub.add_parser("run", help="run one simulation and print its metrics"))
    _add_common(
        sub.add_parser("replay-paper", help="replay the bundled four-bot reference scenario"),
        config=False,
    )
    _add_common(sub.add_parser("compare", help="run plain and immune FCFS side by side"))
    sweep = sub.add_parser("sweep", help="run many seeds and aggregate failures")
    _add_common(sweep)
    sweep.add_argument("--runs", type=int, default=200, help="number of seeds (default 200)")
    sweep.add_argument("--jobs", type=int, default=1, help="worker processes")
    return parser


def resolve_config(args: argparse.Namespace) -> SimConfig:
    cfg = load_config(args.config, args.overrides)
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.ticks is not None:
        changes["ticks"] = args.ticks
    if args.policy is not None:
        changes["policy"] = Policy(args.policy)
    return dataclasses.replace(cfg, **changes) if changes else cfg


def _write_trace(path: str, rows) -> None:
    try:
        with open(path, "w", newline="") as fh:
            write_trace(rows, fh)
    except OSError as exc:
        raise OSError(f"cannot write trace {path}: {exc.strerror}") from None


def _print_metrics(cfg: SimConfig, metrics: MetricsReport, out: TextIO) -> None:
    out.write(f"policy = {cfg.policy.value}\nseed = {cfg.seed}\n")
    out.write(metrics.to_text())


def cmd_run(args: argparse.Namespace, out: TextIO) -> int:
    cfg = resolve_config(args)
    trace, metrics = run(cfg, record=args.trace is not None)
    if args.trace:
        _write_trace(args.trace, trace)
    _print_metrics(cfg, metrics, out)
    return EXIT_OK if metrics.failures == 0 else EXIT_FAILURES


def cmd_replay_paper(args: argparse.Namespace, out: TextIO) -> int:
    cfg = scenarios.scenario_config("paper")
    changes = {k: v for k, v in (("seed", args.seed), ("ticks", args.ticks)) if v is not None}
    if args.policy:
        changes["policy"] = Policy(args.policy)
    cfg = dataclasses.replace(cfg, **changes)
    state = simulate(cfg)
    if args.trace:
        _write_trace(args.trace, state.trace)
    metrics = state.metrics()
    jumps = [(r.tick, r.agent_id) for r in state.trace if "escalated" in r.event.split("|")]
    failed = [a.id for a in state.agents if a.state.value == "Failed"]
    fmt = lambda pairs: ", ".join(f"bot {a} at tick {t}" for t, a in pairs) or "-"  # noqa: E731
    out.write(f"policy = {cfg.policy.value}\n")
    out.write(f"grant_order = {','.join(map(str, metrics.grants)) or '-'}\n")
    out.write(f"grants = {fmt(state.grants)}\n")
    out.write(f"queue_jumps = {fmt(jumps)}\n")
    out.write(f"critical = {fmt(state.criticals)}\n")
    out.write(f"failures = {metrics.failures}\n")
    out.write(f"failed_bots = {','.join(map(str, failed)) or '-'}\n")
    ok = metrics.grants == scenarios.PAPER_GRANT_ORDER and any(
        a == scenarios.PAPER_CRITICAL_BOT for _, a in jumps
    )
    out.write(f"matches_reference = {'yes' if ok else 'no'}\n")
    return EXIT_OK if ok else EXIT_FAILURES


COMPARE_ROWS = (
    "failures",
    "total_work",
    "max_wait_ticks",
    "mean_wait_ticks",
    "queue_jumps",
    "charger_busy_fraction",
)


def cmd_compare(args: argparse.Namespace, out: TextIO) -> int:
    cfg = resolve_config(args)
    reports = {
        policy: run(dataclasses.replace(cfg, policy=policy), record=False)[1] for policy in Policy
    }
    as_dict = {p: dict(line.split(" = ", 1) for line in m.as_lines()) for p, m in reports.items()}
    out.write(f"seed = {cfg.seed}\n")
    out.write(f"{'metric':<24}{'plain':>14}{'immune':>14}\n")
    for key in COMPARE_ROWS:
        out.write(
            f"{key:<24}{as_dict[Policy.PLAIN][key]:>14}{as_dict[Policy.IMMUNE][key]:>14}\n"
        )
    return EXIT_OK


def _failures_for(cfg: SimConfig) -> int:
    return run(cfg, record=False)[1].failures


def cmd_sweep(args: argparse.Namespace, out: TextIO) -> int:
    cfg = resolve_config(args)
    if args.runs < 1:
        raise ConfigError("runs", "must be >= 1")
    configs = [dataclasses.replace(cfg, seed=(cfg.seed + i) % (1 << 64)) for i in range(args.runs)]
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            failures = list(pool.map(_failures_for, configs, chunksize=8))
    else:
        failures = [_failures_for(c) for c in configs]
    bad = [c.seed for c, f in zip(configs, failures) if f]
    out.write(f"policy = {cfg.policy.value}\n")
    out.write(f"runs = {args.runs}\n")
    out.write(f"first_seed = {cfg.seed}\n")
    out.write(f"ticks = {cfg.ticks}\n")
    out.write(f"total_failures = {sum(failures)}\n")
    out.write(f"runs_with_failures = {len(bad)}\n")
    out.write(f"failing_seeds = {','.join(map(str, bad[:20])) or '-'}\n")
    return EXIT_FAILURES if bad else EXIT_OK


COMMANDS = {
    "run": cmd_run,
    "replay-paper": cmd_replay_paper,
    "compare": cmd_compare,
    "sweep": cmd_sweep,
}


def main(argv: Sequence[str] | None = None, out: TextIO | None = None) -> int:
    out = out if out is not None else sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

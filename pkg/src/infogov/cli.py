"""Command-line entry points: simulate, train, sweep, microval, report."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from infogov import experiment, governor
from infogov.agents import TableSLA
from infogov.ledger import InfoTier
from infogov.simulation import ScenarioConfig, build_policies, run_experiment

log = logging.getLogger("infogov")


def _config(args: argparse.Namespace) -> ScenarioConfig:
    cfg = ScenarioConfig.from_json(args.config) if args.config else ScenarioConfig()
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if getattr(args, "rounds", None) is not None:
        changes["rounds"] = args.rounds
    if getattr(args, "backend", None) is not None:
        changes["agent_backend"] = args.backend
    llm = dict(cfg.llm)
    for key in ("model", "temperature"):
        if getattr(args, key, None) is not None:
            llm[key] = getattr(args, key)
    if getattr(args, "decision_log", None):
        llm["decision_log"] = args.decision_log
    if llm != cfg.llm:
        changes["llm"] = llm
    if getattr(args, "checkpoint", None) and args.command == "simulate":
        changes["tier_policy"] = f"rl:{args.checkpoint}"
    elif getattr(args, "tier", None):
        changes["tier_policy"] = f"static:{InfoTier.parse(args.tier).value}"
    return cfg.replace(**changes) if changes else cfg


def cmd_simulate(args: argparse.Namespace) -> int:
    cfg = _config(args)
    res = run_experiment(cfg)
    out = Path(args.out)
    experiment.write_round_logs(res.logs, out)
    if res.valid_logs:
        experiment.write_summary_csv({cfg.tier_policy: res}, out / "summary.csv")
        experiment.emit_report({cfg.tier_policy: res.valid_logs}, out)
    for k, v in res.summary.items():
        print(f"{k:>16s}  {v:.4f}")
    if res.invalid:
        print(f"invalid rounds: {res.invalid}", file=sys.stderr)
        return 1
    return 0


def cmd_train(args: argparse.Namespace) -> int:
    cfg = _config(args)
    tcfg = governor.TrainingConfig(episodes=args.episodes, entropy_coeff=args.entropy_coeff)

    def progress(p: governor.CurvePoint) -> None:
        if (p.episode + 1) % max(1, args.episodes // 10) == 0:
            log.info("episode %d  return %.2f  coop %.3f", p.episode + 1, p.discounted_return, p.mean_coop)

    net, curve = governor.train(cfg, tcfg, cfg.seed, progress=progress)
    governor.save_checkpoint(net, args.out, tcfg)
    curve_path = Path(args.curve) if args.curve else Path(args.out).with_suffix(".curve.csv")
    governor.write_curve(curve, curve_path)
    print(f"checkpoint: {args.out}\nlearning curve: {curve_path}")
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    cfg = _config(args)
    rl = None
    if args.checkpoint:
        rl = governor.RLTierPolicy(governor.load_checkpoint(args.checkpoint), greedy=True)
    else:
        log.warning("no --checkpoint given; the RL row is omitted")
    results = experiment.sweep_baselines(cfg, rl, build_policies(cfg), paired=not args.independent)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    experiment.write_summary_csv(results, out / "summary.csv")
    for name, res in results.items():
        experiment.write_round_logs(res.logs, out / "rounds", prefix=f"{name}_")
    experiment.emit_report({n: r.valid_logs for n, r in results.items() if r.valid_logs}, out)
    print(f"{'scenario':<8s} {'avgC%':>7s} {'finalC%':>8s} {'avgSW':>7s} {'finalSW':>8s}")
    for row in experiment.summary_rows(results):
        print(
            f"{row['scenario']:<8s} {100 * row['avg_coop']:7.1f} {100 * row['final_coop']:8.1f} "
            f"{row['avg_sw']:7.2f} {row['final_sw']:8.2f}"
        )
    return 1 if any(r.invalid for r in results.values()) else 0


def cmd_microval(args: argparse.Namespace) -> int:
    cfg = _config(args)
    backend = build_policies(cfg)
    table = None
    if isinstance(backend, TableSLA):
        table = backend.table
    scenarios = experiment.calibration_scenarios(args.trials, include_ar=args.include_ar)
    results = [experiment.microval(s, backend, cfg.seed + k) for k, s in enumerate(scenarios)]
    experiment.write_microval_csv(results, args.out, table)
    for r in results:
        lo, hi = r.interval
        exp = "" if table is None else f"  expected {table.probability(r.scenario.view()):.3f}"
        print(f"{r.scenario.label():<32s} {r.frequency:.3f} [{lo:.3f}, {hi:.3f}]{exp}")
    return 1 if any(r.errors for r in results) else 0


def cmd_report(args: argparse.Namespace) -> int:
    logs = experiment.read_round_logs(args.rounds_dir)
    if not logs:
        print(f"no round_*.json files in {args.rounds_dir}", file=sys.stderr)
        return 2
    experiment.emit_report({args.label: [lg for lg in logs if lg.valid]}, args.out)
    invalid = [lg.round_index for lg in logs if not lg.valid]
    if invalid:
        print(f"invalid rounds: {invalid}", file=sys.stderr)
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="infogov", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp: argparse.ArgumentParser) -> None:
        sp.add_argument("--config", help="scenario config JSON")
        sp.add_argument("--seed", type=int, help="master seed (overrides config)")
        sp.add_argument("--backend", choices=["table", "llm", "all-c", "all-d"])
        sp.add_argument("--model", help="LLM model name")
        sp.add_argument("--temperature", type=float, help="LLM sampling temperature")
        sp.add_argument("--decision-log", help="JSON-lines file for LLM decision records")

    sp = sub.add_parser("simulate", help="run rounds under one tier policy")
    common(sp)
    sp.add_argument("--tier", help="static tier: LA, LA_AR or LA_NR")
    sp.add_argument("--checkpoint", help="use a trained governor instead of a static tier")
    sp.add_argument("--rounds", type=int)
    sp.add_argument("--out", default="runs/simulate")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("train", help="train the governor")
    common(sp)
    sp.add_argument("--episodes", type=int, default=200)
    sp.add_argument("--entropy-coeff", type=float, default=0.01)
    sp.add_argument("--out", default="governor.json")
    sp.add_argument("--curve", help="learning-curve CSV (default: <out>.curve.csv)")
    sp.set_defaults(func=cmd_train)

    sp = sub.add_parser("sweep", help="static baselines (+ RL) on paired seeds")
    common(sp)
    sp.add_argument("--checkpoint")
    sp.add_argument("--rounds", type=int)
    sp.add_argument("--independent", action="store_true", help="independent seeds per scenario")
    sp.add_argument("--out", default="runs/sweep")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("microval", help="cooperation frequency under fixed views")
    common(sp)
    sp.add_argument("--trials", type=int, default=100)
    sp.add_argument("--include-ar", action="store_true")
    sp.add_argument("--out", default="microval.csv")
    sp.set_defaults(func=cmd_microval)

    sp = sub.add_parser("report", help="series CSVs and charts from round logs")
    common(sp)
    sp.add_argument("--rounds-dir", required=True)
    sp.add_argument("--label", default="run")
    sp.add_argument("--out", default="runs/report")
    sp.set_defaults(func=cmd_report)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO, format="%(levelname)s %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

Subcommands: ``scenarios``, ``inspect``, ``simulate`` and ``trace``.  Options
may also come from a JSON file given with ``--config``; command-line flags
override it.  Exit codes: 0 success, 2 config error, 3 model error, 4 IO error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import analysis
from .errors import ModelError
from .loader import load_model
from .pseudo import build_table, classify
from .scenarios import SCENARIOS, get_scenario
from .sim import ExperimentConfig, atomic_write, csv_text, derive_seed, run_experiment, run_single

EXIT_CONFIG, EXIT_MODEL, EXIT_IO = 2, 3, 4

DEFAULTS = {
    "T": 50_000,
    "runs": 500,
    "seed": 0,
    "policies": "ucb1,cucb",
    "stride": None,
    "grid": None,
    "out": None,
    "format": None,
    "t_grid": None,
    "t0": None,
    "run": 0,
    "beta": 1.0,
}


class ConfigError(Exception):
    pass


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="corrbandit", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def model_args(p):
        src = p.add_mutually_exclusive_group()
        src.add_argument("--model", help="model JSON file")
        src.add_argument("--scenario", help="built-in scenario name (see 'scenarios')")
        p.add_argument("--rewards", help="JSON reward table for discrete5-case scenarios")
        p.add_argument("--grid", type=int, help="grid size N for continuous sources")
        p.add_argument("--config", help="JSON file with option values; flags override it")
        p.add_argument("--out", help="output path (default: stdout)")

    p = sub.add_parser("scenarios", help="list built-in scenarios")
    p.add_argument("--format", choices=("text", "json"))

    p = sub.add_parser("inspect", help="classification, bounds and lower-bound rate")
    model_args(p)
    p.add_argument("--T", type=int, help="single horizon for the bound table")
    p.add_argument("--t-grid", dest="t_grid", help="comma-separated horizons for the bound table")
    p.add_argument("--t0", type=float, help="threshold round for the bounds (default: smallest valid)")
    p.add_argument("--beta", type=float, help="constant of the worst-case bound")
    p.add_argument("--format", choices=("json", "csv"))

    for name, text in (("simulate", "Monte-Carlo regret curves"),
                       ("trace", "per-round decision log of one run (JSON lines)")):
        p = sub.add_parser(name, help=text)
        model_args(p)
        p.add_argument("--T", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--policies", help="comma-separated: ucb1,cucb,fixed<k>")
        if name == "simulate":
            p.add_argument("--runs", type=int)
            p.add_argument("--stride", type=int)
            p.add_argument("--format", choices=("csv", "json"))
        else:
            p.add_argument("--run", type=int, help="run index whose seed is used")
    return ap


def _resolve(args: argparse.Namespace) -> dict:
    opts = dict(DEFAULTS)
    cfg_path = getattr(args, "config", None)
    if cfg_path:
        try:
            cfg = json.loads(Path(cfg_path).read_text())
        except OSError as exc:
            raise ConfigError(f"config: cannot read {cfg_path}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config: invalid JSON: {exc}") from None
        if not isinstance(cfg, dict):
            raise ConfigError("config: top-level value must be an object")
        for key, value in cfg.items():
            if key not in DEFAULTS and key not in ("model", "scenario", "rewards"):
                raise ConfigError(f"config: unknown option {key!r}")
            opts[key] = value
    for key, value in vars(args).items():
        if value is not None and key not in ("command", "config"):
            opts[key] = value
    if isinstance(opts["policies"], list):
        opts["policies"] = ",".join(opts["policies"])
    for key in ("T", "runs", "grid", "stride"):
        v = opts.get(key)
        if v is not None and (not isinstance(v, int) or v < 1):
            raise ConfigError(f"{key}: must be a positive integer")
    return opts


def _load(opts: dict):
    model_path, scenario = opts.get("model"), opts.get("scenario")
    if bool(model_path) == bool(scenario):
        raise ConfigError("exactly one of --model or --scenario is required")
    if model_path:
        return load_model(model_path, grid=opts.get("grid"))
    rewards = opts.get("rewards")
    if isinstance(rewards, str):
        try:
            rewards = json.loads(Path(rewards).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ModelError(f"rewards: cannot read table from {opts['rewards']}: {exc}") from None
    try:
        return get_scenario(scenario, grid=opts.get("grid") or 1000, rewards=rewards)
    except KeyError:
        raise ConfigError(f"scenario: unknown name {scenario!r}") from None


def _emit(text: str, out: str | None) -> None:
    if out:
        atomic_write(out, text)
    else:
        sys.stdout.write(text)


def _jsonable(x):
    if isinstance(x, float) and not np.isfinite(x):
        return None
    return x


def cmd_scenarios(opts: dict) -> int:
    if opts.get("format") == "json":
        doc = [{"name": s.name, "description": s.description, "params": s.params}
               for s in SCENARIOS.values()]
        sys.stdout.write(json.dumps(doc, indent=2) + "\n")
        return 0
    for s in SCENARIOS.values():
        sys.stdout.write(f"{s.name}\n    {s.description}\n    {json.dumps(s.params)}\n")
    return 0


def inspect_report(model, horizons, t0=None, beta=1.0) -> dict:
    table = build_table(model)
    c = classify(model, table)
    report = {
        "model": {"arms": model.n_arms, "outcomes": model.n_outcomes,
                  "reward_span": model.reward_span},
        **c.to_dict(),
        "bounds": [],
    }
    if model.n_arms < 2:
        report["lower_bound_rate"] = 0.0
        return report
    params = analysis.BoundParams.from_classification(c, horizons[0], t0)
    report["t0"] = _jsonable(params.t0)
    report["hypotheses"] = analysis.hypotheses(params)
    for T in horizons:
        p = params.with_T(T)
        row = {"T": T,
               "competitive_pulls": {str(k): analysis.bound_competitive(p, k) for k in c.competitive},
               "noncompetitive_pulls": (_jsonable(analysis.bound_noncompetitive(p))
                                        if c.non_competitive else None),
               "total_regret": _jsonable(analysis.bound_total(c, p)),
               "worst_case_regret": analysis.bound_worst_case(model.n_arms, T, beta) if T >= 2 else None}
        report["bounds"].append(row)
    report["lower_bound_rate"] = analysis.lower_bound(model, table, c)
    return report


def _inspect_csv(report: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    comp = [int(k) for k in report["competitive"]]
    w.writerow(["T", "total_regret", "noncompetitive_pulls", "worst_case_regret"]
               + [f"competitive_pulls_{k}" for k in comp])
    for row in report["bounds"]:
        vals = [row["total_regret"], row["noncompetitive_pulls"], row["worst_case_regret"]]
        vals += [row["competitive_pulls"][str(k)] for k in comp]
        w.writerow([row["T"]] + ["" if v is None else f"{v:.12g}" for v in vals])
    return buf.getvalue()


def cmd_inspect(opts: dict) -> int:
    model = _load(opts)
    if opts.get("t_grid"):
        try:
            horizons = [int(v) for v in str(opts["t_grid"]).split(",")]
        except ValueError:
            raise ConfigError("t_grid: must be comma-separated integers") from None
    else:
        horizons = [int(opts["T"])]
    if any(T < 1 for T in horizons):
        raise ConfigError("t_grid: horizons must be positive")
    report = inspect_report(model, horizons, opts.get("t0"), float(opts["beta"]))
    if opts.get("format") == "csv":
        _emit(_inspect_csv(report), opts.get("out"))
    else:
        _emit(json.dumps(report, indent=2) + "\n", opts.get("out"))
    return 0


def _policies(opts: dict) -> tuple[str, ...]:
    names = tuple(p.strip() for p in str(opts["policies"]).split(",") if p.strip())
    for p in names:
        if p not in ("ucb1", "cucb") and not (p.startswith("fixed") and p[5:].isdigit()):
            raise ConfigError(f"policies: unknown policy {p!r}")
    if not names:
        raise ConfigError("policies: at least one policy is required")
    return names


def cmd_simulate(opts: dict) -> int:
    model = _load(opts)
    policies = _policies(opts)
    for p in policies:
        if p.startswith("fixed") and int(p[5:]) >= model.n_arms:
            raise ConfigError(f"policies: {p} is out of range for {model.n_arms} arms")
    config = ExperimentConfig(T=opts["T"], runs=opts["runs"], base_seed=opts["seed"],
                              policies=policies, record_stride=opts.get("stride"))
    traces = run_experiment(model, config)
    if opts.get("format") == "json":
        doc = {p: {"t": tr.rounds.tolist(), "mean_regret": tr.mean_regret.tolist(),
                   "stderr_regret": tr.stderr_regret.tolist(), "mean_pulls": tr.mean_pulls.tolist()}
               for p, tr in sorted(traces.items())}
        text = json.dumps(doc) + "\n"
    else:
        text = csv_text(traces)
    summary = sys.stderr if not opts.get("out") else sys.stdout
    _emit(text, opts.get("out"))
    summary.write(f"T={config.T} runs={config.runs} seed={config.base_seed}\n")
    for p, tr in sorted(traces.items()):
        summary.write(f"{p:>8}  regret {tr.mean_regret[-1]:.4f} +/- {tr.stderr_regret[-1]:.4f}\n")
    return 0


def cmd_trace(opts: dict) -> int:
    model = _load(opts)
    table = build_table(model)
    seed = derive_seed(opts["seed"], opts["run"])
    lines = []
    for p in _policies(opts):
        ep = run_single(model, p, opts["T"], seed, table=table)
        for row in ep.decision_log():
            lines.append(json.dumps({"policy": p, **row}))
    _emit("\n".join(lines) + "\n", opts.get("out"))
    return 0


COMMANDS = {"scenarios": cmd_scenarios, "inspect": cmd_inspect,
            "simulate": cmd_simulate, "trace": cmd_trace}


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        opts = _resolve(args)
        return COMMANDS[args.command](opts)
    except ConfigError as exc:
        print(f"corrbandit: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ModelError as exc:
        print(f"corrbandit: model error: {exc}", file=sys.stderr)
        return EXIT_MODEL
    except (OSError, ValueError) as exc:
        kind = "IO error" if isinstance(exc, OSError) else "config error"
        print(f"corrbandit: {kind}: {exc}", file=sys.stderr)
        return EXIT_IO if isinstance(exc, OSError) else EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

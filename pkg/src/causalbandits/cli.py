"""Command-line front end for the scenario runners.

Exit codes: 0 success, 1 configuration error (bad flags, bad config file,
invalid model), 2 runtime error.  Every flag has a config-file equivalent
(JSON, same key names as the flag destinations); explicit flags override
file values and the manifest records the merged result.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import runner, scm
from .runner import AgentSpec, ExperimentConfig, SCENARIOS


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would sys.exit(2); we want exit 1
        self.print_usage(sys.stderr)
        raise CliError(message)


def parse_int_list(text: str) -> list[int]:
    """Accept ``2,3,4`` or a range ``2..6`` (inclusive)."""
    text = text.strip()
    if ".." in text:
        lo, hi = text.split("..", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(v) for v in text.split(",") if v]


def parse_agents(value) -> tuple[AgentSpec, ...]:
    """Comma list on the command line; list of names or dicts in config files."""
    if isinstance(value, str):
        value = [v.strip() for v in value.split(",") if v.strip()]
    specs = []
    for item in value:
        if isinstance(item, AgentSpec):
            specs.append(item)
        elif isinstance(item, str):
            specs.append(AgentSpec(name=item))
        else:
            specs.append(AgentSpec(**item))
    return tuple(specs)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--t", type=int, default=None, help="horizon (rounds per replication)")
    p.add_argument("--reps", type=int, default=None, help="number of replications")
    p.add_argument("--seed", type=int, default=None, help="base seed")
    p.add_argument("--agents", default=None, help="comma-separated agent names")
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("--threads", type=int, default=None, help="worker pool size")
    p.add_argument("--config", default=None, help="JSON config file; flags override it")
    p.add_argument("--arm-budget", type=int, default=None, help="refuse runs beyond this many arms")


def build_parser() -> _Parser:
    parser = _Parser(prog="causal-bandits", description=__doc__)
    sub = parser.add_subparsers(dest="command", metavar="command")

    run = sub.add_parser("run", parents=[], help="run a named scenario", add_help=True)
    run.add_argument("--scenario", default=None, choices=sorted(SCENARIOS), help="scenario preset")
    run.add_argument("--prior-sd", type=float, default=None, help="prior sd for Bayesian scenarios")
    _add_common(run)

    scale = sub.add_parser("scale", help="regret vs domain size m or parent count n")
    scale.add_argument("--axis", default=None, choices=["m", "n"])
    scale.add_argument("--values", default=None, help="axis values, e.g. 2,3,4,5,6 or 2..6")
    scale.add_argument("--scan-m", type=int, default=None, help="fixed m for the n axis")
    scale.add_argument("--scan-n", type=int, default=None, help="fixed n for the m axis")
    scale.add_argument("--noise-sd", type=float, default=None)
    _add_common(scale)

    lower = sub.add_parser("lower-bound", help="regret vs variable count on hard instances")
    lower.add_argument("--n-values", default=None, help="variable counts, e.g. 2..6")
    lower.add_argument("--delta", type=float, default=None, help="reward gap coefficient")
    lower.add_argument("--p1", type=float, default=None, help="P(X1=1)")
    _add_common(lower)

    val = sub.add_parser("validate", help="check a model file")
    val.add_argument("--model", required=True, help="network definition file")

    sub.add_parser("list-scenarios", help="print scenario presets")
    return parser


def _load_config_file(path: str | None) -> dict:
    if not path:
        return {}
    try:
        with open(path) as f:
            data = json.load(f)
    except OSError as exc:
        raise CliError(f"cannot read config file: {exc}")
    except json.JSONDecodeError as exc:
        raise CliError(f"config file is not valid JSON: {exc}")
    if not isinstance(data, dict):
        raise CliError("config file must hold a JSON object")
    return data


def _pick(args, file_cfg: dict, key: str, default):
    flag = getattr(args, key, None)
    if flag is not None:
        return flag
    if key in file_cfg:
        return file_cfg[key]
    return default


def _experiment_config(args, file_cfg: dict, scenario: str, defaults: dict) -> ExperimentConfig:
    agents = _pick(args, file_cfg, "agents", defaults["agents"])
    try:
        return ExperimentConfig(
            scenario=scenario,
            horizon=int(_pick(args, file_cfg, "t", defaults["t"])),
            replications=int(_pick(args, file_cfg, "reps", 20)),
            base_seed=int(_pick(args, file_cfg, "seed", 0)),
            agents=parse_agents(agents),
            bayesian=defaults.get("bayesian", False),
            prior_sd=float(_pick(args, file_cfg, "prior_sd", 0.1)),
            workers=int(_pick(args, file_cfg, "threads", 1)),
            arm_budget=int(_pick(args, file_cfg, "arm_budget", runner.DEFAULT_ARM_BUDGET)),
            noise_sd=float(_pick(args, file_cfg, "noise_sd", 0.1)),
            scan_m=int(_pick(args, file_cfg, "scan_m", 3)),
            scan_n=int(_pick(args, file_cfg, "scan_n", 4)),
            delta=float(_pick(args, file_cfg, "delta", 0.3)),
            p1=float(_pick(args, file_cfg, "p1", 0.5)),
        )
    except (TypeError, ValueError) as exc:
        raise CliError(str(exc))


def _out_dir(args, file_cfg: dict) -> Path:
    out = Path(_pick(args, file_cfg, "out", "results"))
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_run(args) -> int:
    file_cfg = _load_config_file(args.config)
    scenario_name = _pick(args, file_cfg, "scenario", None)
    if not scenario_name:
        raise CliError("run requires --scenario (or a scenario key in the config file)")
    if scenario_name not in SCENARIOS:
        raise CliError(f"unknown scenario {scenario_name!r}; see list-scenarios")
    scenario = SCENARIOS[scenario_name]
    config = _experiment_config(
        args,
        file_cfg,
        scenario_name,
        {
            "agents": scenario.default_agents,
            "t": scenario.default_horizon,
            "bayesian": scenario.bayesian,
        },
    )
    out = _out_dir(args, file_cfg)
    result = runner.run_experiment(config)
    curves = out / "curves.csv"
    runner.write_csv(result, curves)
    runner.write_manifest(result, out / "manifest.json", files=[curves.name])
    print(f"wrote {curves} ({len(result.traces)} traces x {config.horizon} rounds)")
    for name, curve in result.mean_curves.items():
        print(f"  {name}: mean final regret {curve[-1]:.2f}")
    return 0


def cmd_scale(args) -> int:
    file_cfg = _load_config_file(args.config)
    axis = _pick(args, file_cfg, "axis", None)
    if axis not in ("m", "n"):
        raise CliError("scale requires --axis m or --axis n")
    values_raw = _pick(args, file_cfg, "values", "2,3,4,5,6")
    values = parse_int_list(values_raw) if isinstance(values_raw, str) else [int(v) for v in values_raw]
    default_t = 5000 if axis == "m" else 10000
    all_six = ("ucb", "ts-gauss", "c-ucb", "c-ts-gauss", "cl-ucb", "cl-ts")
    config = _experiment_config(
        args, file_cfg, f"scale-{axis}", {"agents": all_six, "t": default_t}
    )
    out = _out_dir(args, file_cfg)
    result = runner.scaling_scan(axis, values, config)
    path = out / f"scan_{axis}.csv"
    runner.write_csv(result, path)
    runner.write_manifest(result, out / f"scan_{axis}_manifest.json", files=[path.name])
    print(f"wrote {path}")
    for spec in config.agents:
        regrets = result.final_regrets(spec.name)
        line = ", ".join(f"{axis}={v}: {r:.1f}" for v, r in regrets.items())
        print(f"  {spec.name}: {line}")
    return 0


def cmd_lower_bound(args) -> int:
    file_cfg = _load_config_file(args.config)
    values_raw = _pick(args, file_cfg, "n_values", "2..6")
    values = parse_int_list(values_raw) if isinstance(values_raw, str) else [int(v) for v in values_raw]
    config = _experiment_config(
        args, file_cfg, "lower-bound", {"agents": ("ucb", "c-ucb"), "t": 10000}
    )
    out = _out_dir(args, file_cfg)
    result = runner.scaling_scan("N", values, config)
    path = out / "scan_N.csv"
    runner.write_csv(result, path)
    runner.write_manifest(result, out / "scan_N_manifest.json", files=[path.name])
    print(f"wrote {path}")
    for spec in config.agents:
        regrets = result.final_regrets(spec.name)
        line = ", ".join(f"N={v}: {r:.1f}" for v, r in regrets.items())
        print(f"  {spec.name}: {line}")
    return 0


def cmd_validate(args) -> int:
    try:
        network = scm.load_network(args.model)
    except OSError as exc:
        raise CliError(f"cannot read model file: {exc}")
    except (KeyError, ValueError, json.JSONDecodeError) as exc:
        raise CliError(f"malformed model file: {exc}")
    report = scm.validate(network)
    if report.ok:
        print(f"{args.model}: valid ({network.n_variables} variables, k_z={network.k_z})")
        return 0
    print(f"{args.model}: INVALID", file=sys.stderr)
    for problem in report.problems:
        print(f"  - {problem}", file=sys.stderr)
    return 1


def cmd_list_scenarios(_args) -> int:
    for name in sorted(SCENARIOS):
        s = SCENARIOS[name]
        print(f"{name}: T={s.default_horizon}, agents={','.join(s.default_agents)}")
        print(f"    {s.description}")
    return 0


_COMMANDS = {
    "run": cmd_run,
    "scale": cmd_scale,
    "lower-bound": cmd_lower_bound,
    "validate": cmd_validate,
    "list-scenarios": cmd_list_scenarios,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not args.command:
            parser.print_usage(sys.stderr)
            return 1
        return _COMMANDS[args.command](args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # unexpected: runtime failure
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()

"""Monte-Carlo experiment orchestration with reproducible seeding.

Every replication owns two independent RNG streams (environment draws and
agent-internal sampling) derived from
``SeedSequence([base_seed, crc32(scenario), crc32(agent), crc32(context), i])``,
so adding or removing an agent never perturbs another agent's environment
draws, and results are identical across machines and across serial/parallel
execution.  Regret is accounted against ground-truth arm means, not realized
rewards.
"""

from __future__ import annotations

import concurrent.futures
import csv
import dataclasses
import json
import time
import zlib
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from . import environments as envs
from .agents import make_agent
from .environments import BanditEnvironment

DEFAULT_ARM_BUDGET = 100_000


def _crc(label: str) -> int:
    return zlib.crc32(str(label).encode())


def stream_entropy(
    base_seed: int, scenario: str, agent: str, replication: int, context: str = ""
) -> list[int]:
    """Entropy list for one replication's root SeedSequence."""
    if base_seed < 0:
        raise ValueError("base_seed must be nonnegative")
    return [base_seed, _crc(scenario), _crc(agent), _crc(context), replication]


def seed_digest(entropy: Sequence[int]) -> int:
    """Stable 64-bit fingerprint of an entropy list, recorded in traces."""
    return int(np.random.SeedSequence(list(entropy)).generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class AgentSpec:
    name: str
    delta: float | None = None
    v: float = 1.0
    beta_override: float | None = None

    @staticmethod
    def of(spec: "AgentSpec | str") -> "AgentSpec":
        return spec if isinstance(spec, AgentSpec) else AgentSpec(name=spec)


@dataclass
class ExperimentConfig:
    scenario: str
    horizon: int
    replications: int
    base_seed: int
    agents: tuple[AgentSpec, ...]
    bayesian: bool = False
    prior_sd: float = 0.1
    workers: int = 1
    arm_budget: int = DEFAULT_ARM_BUDGET
    noise_sd: float = envs.PURE_SIM_NOISE_SD
    scan_m: int = 3
    scan_n: int = 4
    theta: tuple[float, ...] | None = None
    delta: float = 0.3
    p1: float = 0.5

    def __post_init__(self):
        self.agents = tuple(AgentSpec.of(a) for a in self.agents)
        if self.horizon < 1 or self.replications < 1:
            raise ValueError("horizon and replications must be at least 1")
        if not self.agents:
            raise ValueError("at least one agent is required")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")

    def agent_names(self) -> list[str]:
        return [a.name for a in self.agents]


@dataclass
class RegretTrace:
    scenario: str
    agent: str
    replication: int
    seed: int
    instant: np.ndarray
    cumulative: np.ndarray


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    traces: list[RegretTrace]
    mean_curves: dict[str, np.ndarray]
    stderr_curves: dict[str, np.ndarray]
    wall_time_s: float

    def final_regret(self, agent: str) -> float:
        return float(self.mean_curves[agent][-1])


@dataclass
class ScanPoint:
    scenario: str
    agent: str
    axis: str
    axis_value: int
    replication: int
    final_regret: float


@dataclass
class ScanResult:
    config: ExperimentConfig
    axis: str
    values: tuple[int, ...]
    points: list[ScanPoint]
    wall_time_s: float

    def final_regrets(self, agent: str) -> dict[int, float]:
        """Mean final regret per axis value for one agent."""
        out: dict[int, list[float]] = {}
        for p in self.points:
            if p.agent == agent:
                out.setdefault(p.axis_value, []).append(p.final_regret)
        return {v: float(np.mean(r)) for v, r in sorted(out.items())}


# ---------------------------------------------------------------------------
# Scenario registry
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Scenario:
    name: str
    env_factory: Callable[[], BanditEnvironment]
    default_agents: tuple[str, ...]
    default_horizon: int
    bayesian: bool = False
    description: str = ""


SCENARIOS = {
    "pure-sim": Scenario(
        name="pure-sim",
        env_factory=envs.build_pure_sim_benchmark,
        default_agents=("ucb", "c-ucb", "cl-ucb", "ts-gauss", "c-ts-gauss", "cl-ts"),
        default_horizon=5000,
        description="Fixed chain-graph benchmark, linear Gaussian reward.",
    ),
    "pure-sim-bayes": Scenario(
        name="pure-sim-bayes",
        env_factory=envs.build_pure_sim_benchmark,
        default_agents=("ts-gauss", "c-ts-gauss", "cl-ts"),
        default_horizon=5000,
        bayesian=True,
        description="Chain-graph benchmark with the linear coefficient drawn "
        "from its prior each replication (Bayesian regret).",
    ),
    "email": Scenario(
        name="email",
        env_factory=envs.build_email_env,
        default_agents=("ucb", "c-ucb", "ts-beta", "c-ts-beta"),
        default_horizon=3000,
        description="80-arm campaign graph with Bernoulli click reward.",
    ),
    "lower-bound-n3": Scenario(
        name="lower-bound-n3",
        env_factory=envs.PRESETS["lower-bound-n3"],
        default_agents=("ucb", "c-ucb"),
        default_horizon=10000,
        description="27-arm hard instance where only X1 feeds the reward.",
    ),
}


# ---------------------------------------------------------------------------
# Single replication
# ---------------------------------------------------------------------------


def play(env: BanditEnvironment, agent, horizon: int, env_rng: np.random.Generator) -> np.ndarray:
    """Drive one agent for ``horizon`` rounds; returns instantaneous regret."""
    instant = np.empty(horizon)
    true_means = env.true_means
    optimal = env.optimal_mean
    for t in range(1, horizon + 1):
        arm = agent.select_arm(t)
        obs = env.pull(arm, env_rng)
        agent.update(arm, obs)
        instant[t - 1] = optimal - true_means[arm]
    return instant


def run_replication(
    env: BanditEnvironment,
    agent_spec: AgentSpec | str,
    horizon: int,
    seed: int | Sequence[int],
    scenario: str = "adhoc",
    replication: int = 0,
) -> RegretTrace:
    """One seeded replication; environment and agent use independent substreams."""
    spec = AgentSpec.of(agent_spec)
    entropy = (
        stream_entropy(seed, scenario, spec.name, replication)
        if isinstance(seed, int)
        else list(seed)
    )
    root = np.random.SeedSequence(entropy)
    env_ss, agent_ss = root.spawn(2)
    agent = make_agent(
        spec.name,
        env,
        horizon,
        np.random.default_rng(agent_ss),
        delta=spec.delta,
        v=spec.v,
        beta_override=spec.beta_override,
    )
    instant = play(env, agent, horizon, np.random.default_rng(env_ss))
    return RegretTrace(
        scenario=scenario,
        agent=spec.name,
        replication=replication,
        seed=seed_digest(entropy),
        instant=instant,
        cumulative=np.cumsum(instant),
    )


def _curve_task(args) -> RegretTrace:
    env, spec, horizon, entropy, scenario, replication = args
    return run_replication(env, spec, horizon, entropy, scenario, replication)


def _run_tasks(tasks, task_fn, workers: int) -> list:
    if workers <= 1 or len(tasks) <= 1:
        return [task_fn(t) for t in tasks]
    with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(task_fn, tasks))


# ---------------------------------------------------------------------------
# Experiments
# ---------------------------------------------------------------------------


def _bayes_theta(config: ExperimentConfig, replication: int, dim: int) -> np.ndarray:
    entropy = stream_entropy(config.base_seed, config.scenario, "theta", replication)
    rng = np.random.default_rng(np.random.SeedSequence(entropy))
    return rng.normal(0.0, config.prior_sd, size=dim)


def run_experiment(
    config: ExperimentConfig, env: BanditEnvironment | None = None
) -> ExperimentResult:
    """Run all configured agents for R replications and aggregate regret curves.

    In Bayesian mode a fresh reward coefficient is drawn per replication and
    shared by every agent in that replication, so curves differ by policy only.
    """
    start = time.perf_counter()
    if env is None:
        if config.scenario not in SCENARIOS:
            raise ValueError(
                f"unknown scenario {config.scenario!r}; known: {', '.join(SCENARIOS)}"
            )
        env = SCENARIOS[config.scenario].env_factory()
    if env.n_arms > config.arm_budget:
        raise ValueError(
            f"environment has {env.n_arms} arms, exceeding the arm budget "
            f"{config.arm_budget}; raise arm_budget to proceed"
        )

    rep_envs: list[BanditEnvironment] = []
    for r in range(config.replications):
        if config.bayesian:
            theta = _bayes_theta(config, r, env.features.shape[1])
            rep_envs.append(env.with_reward_theta(theta))
        else:
            rep_envs.append(env)

    tasks = []
    for spec in config.agents:
        for r in range(config.replications):
            entropy = stream_entropy(config.base_seed, config.scenario, spec.name, r)
            tasks.append((rep_envs[r], spec, config.horizon, entropy, config.scenario, r))
    traces = _run_tasks(tasks, _curve_task, config.workers)

    mean_curves: dict[str, np.ndarray] = {}
    stderr_curves: dict[str, np.ndarray] = {}
    for spec in config.agents:
        stack = np.vstack(
            [t.cumulative for t in traces if t.agent == spec.name]
        )
        mean_curves[spec.name] = stack.mean(axis=0)
        if stack.shape[0] > 1:
            stderr_curves[spec.name] = stack.std(axis=0, ddof=1) / np.sqrt(stack.shape[0])
        else:
            stderr_curves[spec.name] = np.zeros(stack.shape[1])
    return ExperimentResult(
        config=config,
        traces=traces,
        mean_curves=mean_curves,
        stderr_curves=stderr_curves,
        wall_time_s=time.perf_counter() - start,
    )


def _scan_env_arms(axis: str, value: int, config: ExperimentConfig) -> int:
    if axis == "m":
        return (value + 1) ** config.scan_n
    if axis == "n":
        return (config.scan_m + 1) ** value
    if axis == "N":
        return 3**value
    raise ValueError(f"unknown scan axis {axis!r} (expected m, n or N)")


def _scan_theta(axis: str, value: int, config: ExperimentConfig):
    if config.theta is not None:
        return np.asarray(config.theta, dtype=float)
    if axis == "m":
        return np.asarray(envs.PURE_SIM_THETA) if config.scan_n == 4 else None
    # Keep the reward scale fixed while the parent count grows.
    theta = np.zeros(value)
    theta[0] = 1.0
    return theta


def _scan_instance(axis: str, value: int, rep: int, config: ExperimentConfig) -> BanditEnvironment:
    if axis == "N":
        return envs.build_lowerbound_env(
            value, config.delta, [config.p1] * value, name=f"lower-bound-N{value}"
        )
    entropy = stream_entropy(
        config.base_seed, config.scenario, "instance", rep, context=f"{axis}={value}"
    )
    rng = np.random.default_rng(np.random.SeedSequence(entropy))
    theta = _scan_theta(axis, value, config)
    if axis == "m":
        return envs.build_random_instance(
            value, config.scan_n, rng, theta=theta, noise_sd=config.noise_sd
        )
    return envs.build_random_instance(
        config.scan_m, value, rng, theta=theta, noise_sd=config.noise_sd
    )


def _scan_task(args) -> ScanPoint:
    axis, value, rep, config, spec = args
    env = _scan_instance(axis, value, rep, config)
    entropy = stream_entropy(
        config.base_seed, config.scenario, spec.name, rep, context=f"{axis}={value}"
    )
    trace = run_replication(env, spec, config.horizon, entropy, config.scenario, rep)
    return ScanPoint(
        scenario=config.scenario,
        agent=spec.name,
        axis=axis,
        axis_value=value,
        replication=rep,
        final_regret=float(trace.cumulative[-1]),
    )


def scaling_scan(axis: str, values: Sequence[int], config: ExperimentConfig) -> ScanResult:
    """Final cumulative regret per (axis value, agent): fresh random instance
    per replication per value on the m/n axes, fixed hard instances on N."""
    start = time.perf_counter()
    values = tuple(int(v) for v in values)
    if list(values) != sorted(values):
        raise ValueError("axis values must be sorted ascending")
    for v in values:
        arms = _scan_env_arms(axis, v, config)
        if arms > config.arm_budget:
            raise ValueError(
                f"scan point {axis}={v} needs {arms} arms, exceeding the arm "
                f"budget {config.arm_budget}; raise arm_budget to proceed"
            )
    tasks = [
        (axis, value, rep, config, spec)
        for spec in config.agents
        for value in values
        for rep in range(config.replications)
    ]
    points = _run_tasks(tasks, _scan_task, config.workers)
    points.sort(key=lambda p: (config.agent_names().index(p.agent), p.axis_value, p.replication))
    return ScanResult(
        config=config,
        axis=axis,
        values=values,
        points=points,
        wall_time_s=time.perf_counter() - start,
    )


# ---------------------------------------------------------------------------
# CSV and manifest emission
# ---------------------------------------------------------------------------

CURVES_HEADER = ["scenario", "agent", "replication", "seed", "t", "instant_regret", "cum_regret"]
SCAN_HEADER = ["scenario", "agent", "axis", "axis_value", "replication", "final_regret"]


def _fmt(x: float) -> str:
    return repr(float(x))


def write_curves_csv(traces: Iterable[RegretTrace], path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    try:
        with open(path, "w", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(CURVES_HEADER)
            for trace in traces:
                for t in range(len(trace.instant)):
                    writer.writerow(
                        [
                            trace.scenario,
                            trace.agent,
                            trace.replication,
                            trace.seed,
                            t + 1,
                            _fmt(trace.instant[t]),
                            _fmt(trace.cumulative[t]),
                        ]
                    )
    except OSError as exc:
        raise OSError(f"failed writing curves CSV to {path}: {exc}") from exc


def write_scan_csv(points: Iterable[ScanPoint], path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    try:
        with open(path, "w", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(SCAN_HEADER)
            for p in points:
                writer.writerow(
                    [p.scenario, p.agent, p.axis, p.axis_value, p.replication, _fmt(p.final_regret)]
                )
    except OSError as exc:
        raise OSError(f"failed writing scan CSV to {path}: {exc}") from exc


def write_csv(result: ExperimentResult | ScanResult, path: str | Path) -> None:
    """Emit the per-replication rows of either result flavor."""
    if isinstance(result, ScanResult):
        write_scan_csv(result.points, path)
    else:
        write_curves_csv(result.traces, path)


def write_manifest(
    result: ExperimentResult | ScanResult,
    path: str | Path,
    files: Sequence[str] = (),
    extra: dict | None = None,
) -> None:
    """Echo the effective config, per-run seeds, and wall time."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    config = dataclasses.asdict(result.config)
    if isinstance(result, ScanResult):
        runs = [
            {
                "agent": p.agent,
                "replication": p.replication,
                "axis": p.axis,
                "axis_value": p.axis_value,
            }
            for p in result.points
        ]
    else:
        runs = [
            {"agent": t.agent, "replication": t.replication, "seed": t.seed}
            for t in result.traces
        ]
    payload = {
        "config": config,
        "runs": runs,
        "wall_time_s": result.wall_time_s,
        "files": list(files),
    }
    if extra:
        payload.update(extra)
    with open(path, "w") as f:
        json.dump(payload, f, indent=2, default=str)
        f.write("\n")

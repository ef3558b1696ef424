"""Acceptance gates for the simulator.

Each test prints one PASS/FAIL line per criterion clause (run with ``-s`` to
see them live) and asserts the stated tolerance.  Heavy experiment fixtures
are session-scoped and shared between criteria that reference the same
configuration.
"""

import time

import numpy as np
import pytest

from causalbandits import environments as envs
from causalbandits import linalg, scm
from causalbandits.agents import CausalUcb, StandardUcb
from causalbandits.environments import Observation
from causalbandits.runner import (
    AgentSpec,
    ExperimentConfig,
    run_experiment,
    scaling_scan,
    write_csv,
)

from oracles import brute_force_parent_distribution, gauss_jordan_inverse, tv_distance

BASE_SEED = 12345
REPLICATIONS = 20
WORKERS = 2


def report(criterion: str, ok: bool, detail: str) -> bool:
    print(f"ACCEPTANCE {criterion}: {'PASS' if ok else 'FAIL'} — {detail}")
    return ok


@pytest.fixture(scope="session")
def comparison_run():
    config = ExperimentConfig(
        scenario="pure-sim",
        horizon=2000,
        replications=REPLICATIONS,
        base_seed=BASE_SEED,
        agents=("ucb", "c-ucb", "cl-ucb", "ts-gauss", "c-ts-gauss"),
        workers=WORKERS,
    )
    start = time.perf_counter()
    result = run_experiment(config)
    return result, time.perf_counter() - start


@pytest.fixture(scope="session")
def sublinear_run():
    config = ExperimentConfig(
        scenario="pure-sim",
        horizon=4000,
        replications=REPLICATIONS,
        base_seed=BASE_SEED,
        agents=("c-ucb", "c-ts-gauss", "cl-ucb", "cl-ts"),
        workers=WORKERS,
    )
    return run_experiment(config)


@pytest.fixture(scope="session")
def email_run():
    config = ExperimentConfig(
        scenario="email",
        horizon=3000,
        replications=REPLICATIONS,
        base_seed=BASE_SEED,
        agents=("ucb", "c-ucb", "ts-beta", "c-ts-beta"),
        workers=WORKERS,
    )
    return run_experiment(config)


@pytest.fixture(scope="session")
def m_scan():
    config = ExperimentConfig(
        scenario="scale-m",
        horizon=5000,
        replications=REPLICATIONS,
        base_seed=BASE_SEED,
        agents=("ucb", "c-ucb"),
        workers=WORKERS,
    )
    return scaling_scan("m", [2, 3, 4, 5, 6], config)


@pytest.fixture(scope="session")
def n_scan():
    config = ExperimentConfig(
        scenario="scale-n",
        horizon=10000,
        replications=REPLICATIONS,
        base_seed=BASE_SEED,
        agents=("ucb", "c-ucb"),
        workers=WORKERS,
    )
    return scaling_scan("n", [2, 3, 4, 5, 6], config)


@pytest.fixture(scope="session")
def lowerbound_scan():
    config = ExperimentConfig(
        scenario="lower-bound",
        horizon=10000,
        replications=REPLICATIONS,
        base_seed=BASE_SEED,
        agents=("ucb", "c-ucb"),
        workers=WORKERS,
        delta=0.3,
        p1=0.5,
    )
    return scaling_scan("N", [2, 3, 4, 5, 6], config)


def test_c01_regret_ordering(comparison_run):
    result, wall = comparison_run
    ucb = result.final_regret("ucb")
    cucb = result.final_regret("c-ucb")
    ts = result.final_regret("ts-gauss")
    cts = result.final_regret("c-ts-gauss")
    ok_ucb = report(
        "regret-ordering/ucb",
        cucb <= 0.5 * ucb,
        f"c-ucb {cucb:.1f} vs 0.5*ucb {0.5 * ucb:.1f}",
    )
    ok_ts = report(
        "regret-ordering/ts",
        cts <= 0.5 * ts,
        f"c-ts-gauss {cts:.1f} vs 0.5*ts-gauss {0.5 * ts:.1f}",
    )
    ok_time = report("regret-ordering/runtime", wall < 60.0, f"{wall:.1f}s (target < 60s)")
    assert ok_ucb and ok_ts and ok_time


def test_c02_causal_linear_improvement(comparison_run):
    result, _ = comparison_run
    cucb = result.final_regret("c-ucb")
    clucb = result.final_regret("cl-ucb")
    ok = report(
        "cl-improvement",
        clucb <= 1.10 * cucb,
        f"cl-ucb {clucb:.1f} vs 1.1*c-ucb {1.10 * cucb:.1f}",
    )
    assert ok


def test_c03_m_scaling_flatness(m_scan):
    cucb = m_scan.final_regrets("c-ucb")
    ucb = m_scan.final_regrets("ucb")
    flat = max(cucb.values()) <= 1.5 * min(cucb.values())
    growing = ucb[6] >= 2.0 * ucb[2]
    ok_flat = report(
        "m-scaling/c-ucb-flat",
        flat,
        f"c-ucb max {max(cucb.values()):.1f} vs 1.5*min {1.5 * min(cucb.values()):.1f}",
    )
    ok_grow = report(
        "m-scaling/ucb-grows",
        growing,
        f"ucb m=6 {ucb[6]:.1f} vs 2*m=2 {2 * ucb[2]:.1f}",
    )
    assert ok_flat and ok_grow


def test_c04_n_scaling(n_scan):
    ucb = n_scan.final_regrets("ucb")
    cucb = n_scan.final_regrets("c-ucb")
    steps = [ucb[v + 1] / ucb[v] for v in (2, 3, 4, 5)]
    ok_ucb = report(
        "n-scaling/ucb-increasing",
        all(s >= 1.10 for s in steps),
        "step ratios " + ", ".join(f"{s:.2f}" for s in steps),
    )
    ratio = max(cucb.values()) / min(cucb.values())
    ok_cucb = report("n-scaling/c-ucb-bounded", ratio <= 2.0, f"c-ucb max/min {ratio:.2f}")
    assert ok_ucb and ok_cucb


def test_c05_lowerbound_scaling(lowerbound_scan):
    ucb = lowerbound_scan.final_regrets("ucb")
    cucb = lowerbound_scan.final_regrets("c-ucb")
    values = sorted(ucb)
    monotone = all(ucb[a] < ucb[b] for a, b in zip(values, values[1:]))
    ok_mono = report(
        "lower-bound/ucb-monotone",
        monotone,
        " -> ".join(f"{ucb[v]:.0f}" for v in values),
    )
    ok_ratio = report(
        "lower-bound/ucb-3x",
        ucb[6] >= 3.0 * ucb[2],
        f"ucb N=6 {ucb[6]:.1f} vs 3*N=2 {3 * ucb[2]:.1f}",
    )
    spread = max(cucb.values()) / min(cucb.values())
    ok_flat = report("lower-bound/c-ucb-flat", spread <= 1.5, f"c-ucb max/min {spread:.2f}")
    assert ok_mono and ok_ratio and ok_flat


def test_c06_sublinear_growth(sublinear_run):
    ok = True
    for name in ("c-ucb", "c-ts-gauss", "cl-ucb", "cl-ts"):
        curve = sublinear_run.mean_curves[name]
        ratio = curve[3999] / curve[999]
        ok = report(f"sublinear/{name}", ratio <= 3.0, f"r(4000)/r(1000) = {ratio:.2f}") and ok
    assert ok


def test_c07_email_ordering(email_run):
    ucb = email_run.final_regret("ucb")
    cucb = email_run.final_regret("c-ucb")
    ts = email_run.final_regret("ts-beta")
    cts = email_run.final_regret("c-ts-beta")
    ok_ucb = report(
        "email/ucb",
        cucb <= 0.7 * ucb,
        f"c-ucb {cucb:.1f} vs 0.7*ucb {0.7 * ucb:.1f} (improvement {100 * (1 - cucb / ucb):.1f}%)",
    )
    ok_ts = report(
        "email/ts",
        cts <= 0.7 * ts,
        f"c-ts-beta {cts:.1f} vs 0.7*ts-beta {0.7 * ts:.1f} (improvement {100 * (1 - cts / ts):.1f}%)",
    )
    assert ok_ucb and ok_ts


def test_c08_inference_oracle():
    rng = np.random.default_rng(BASE_SEED)
    draws = 100_000
    ok = True
    for name, factory in (
        ("pure-sim", envs.build_pure_sim_benchmark),
        ("email", envs.build_email_env),
        ("lower-bound-n3", envs.PRESETS["lower-bound-n3"]),
    ):
        env = factory()
        max_exact_err = 0.0
        max_tv = 0.0
        for arm_id in range(env.n_arms):
            intervention = env.arm_intervention(arm_id)
            exact = scm.parent_distribution(env.network, intervention)
            brute = brute_force_parent_distribution(env.network, intervention)
            max_exact_err = max(max_exact_err, float(np.max(np.abs(exact - brute))))
            samples = scm.sample_many(env.network, intervention, draws, rng)
            counts = np.zeros(env.k_z)
            z_cols = np.array(env.network.reward_parents)
            strides = np.array(env.network._z_strides)
            idx = (samples[:, z_cols] - 1) @ strides
            np.add.at(counts, idx, 1.0)
            max_tv = max(max_tv, tv_distance(exact, counts / draws))
        ok = report(
            f"inference-oracle/{name}",
            max_exact_err <= 1e-9 and max_tv < 0.01,
            f"max |exact - brute force| {max_exact_err:.2e}, max TV {max_tv:.4f} over {env.n_arms} arms",
        ) and ok
    assert ok


def test_c09_decomposition_reduction():
    ok = True
    for seed in range(10):
        rng = np.random.default_rng(seed)
        k = 8
        perm = rng.permutation(k)
        table = np.zeros((k, k))
        table[np.arange(k), perm] = 1.0
        causal = CausalUcb(table, horizon=300)
        standard = StandardUcb(k, horizon=300)
        for t in range(1, 301):
            a_causal = causal.select_arm(t)
            a_standard = standard.select_arm(t)
            if a_causal != a_standard:
                ok = False
                break
            reward = rng.standard_normal() + 0.25 * a_causal
            causal.update(a_causal, Observation(z_index=int(perm[a_causal]), reward=reward))
            standard.update(a_standard, Observation(z_index=0, reward=reward))
        if not ok:
            break
    ok = report("decomposition-reduction", ok, "bit-identical arm sequences over 10 seeds")
    assert ok


def test_c10_numerics():
    rng = np.random.default_rng(BASE_SEED)
    worst = 0.0
    for _ in range(100):
        d = int(rng.integers(1, 9))
        b = rng.standard_normal((d, d))
        v = b @ b.T + 0.5 * np.eye(d)
        x = rng.standard_normal(d)
        want = float(x @ gauss_jordan_inverse(v) @ x)
        got = linalg.quad_norm_inv(v, x) ** 2
        worst = max(worst, abs(got - want) / max(1.0, abs(want)))
    ok_quad = report("numerics/quad-norm", worst <= 1e-8, f"worst relative error {worst:.2e}")

    factor = np.array([[1.0, 0.0, 0.0], [0.4, 0.9, 0.0], [-0.3, 0.2, 0.8]])
    mean = np.array([0.5, -1.0, 2.0])
    draws = np.array([linalg.mvn_sample(mean, factor, rng) for _ in range(100_000)])
    cov_err = float(np.max(np.abs(np.cov(draws.T) - factor @ factor.T)))
    ok_mvn = report("numerics/mvn-cov", cov_err <= 0.02, f"max covariance error {cov_err:.4f}")
    assert ok_quad and ok_mvn


def test_c11_determinism(tmp_path):
    configs = [
        ExperimentConfig(
            scenario="email",
            horizon=200,
            replications=3,
            base_seed=BASE_SEED,
            agents=("ucb", "c-ucb", "c-ts-beta"),
            workers=1,
        ),
        ExperimentConfig(
            scenario="pure-sim",
            horizon=150,
            replications=2,
            base_seed=BASE_SEED,
            agents=("c-ucb", "cl-ts"),
            workers=1,
        ),
    ]
    ok = True
    for config in configs:
        paths = []
        for i, workers in enumerate((1, 1, 2)):
            cfg = ExperimentConfig(
                **{**config.__dict__, "workers": workers, "agents": config.agents}
            )
            path = tmp_path / f"{config.scenario}-{i}.csv"
            write_csv(run_experiment(cfg), path)
            paths.append(path.read_bytes())
        same = paths[0] == paths[1] == paths[2]
        ok = report(
            f"determinism/{config.scenario}",
            same,
            "serial x2 and parallel runs byte-identical",
        ) and ok
    assert ok

import numpy as np
import pytest

from causalbandits import environments as envs
from causalbandits import runner, scm
from causalbandits.runner import (
    AgentSpec,
    ExperimentConfig,
    run_experiment,
    run_replication,
    scaling_scan,
    write_csv,
    write_manifest,
)


def single_arm_env():
    network = scm.DiscreteNetwork(
        variables=[("X", 2), ("W", 2)],
        parents=[(), (0,)],
        cpts=[np.array([[0.4, 0.6]]), np.array([[0.9, 0.1], [0.3, 0.7]])],
        reward_parents=[1],
        intervenable=[],
        name="one-arm",
    )
    return envs.environment_from_network(
        network, {"kind": "linear_gaussian", "theta": [1.0], "noise_sd": 0.1}
    )


def email_config(**over):
    base = dict(
        scenario="email",
        horizon=120,
        replications=3,
        base_seed=7,
        agents=("ucb", "c-ucb"),
    )
    base.update(over)
    return ExperimentConfig(**base)


class TestRunReplication:
    def test_single_arm_env_has_zero_regret(self):
        env = single_arm_env()
        assert env.n_arms == 1
        trace = run_replication(env, "ucb", 200, seed=0)
        assert np.all(trace.cumulative == 0.0)

    def test_same_seed_identical_traces(self):
        env = envs.build_email_env()
        a = run_replication(env, "c-ts-beta", 150, seed=5, scenario="email")
        b = run_replication(env, "c-ts-beta", 150, seed=5, scenario="email")
        np.testing.assert_array_equal(a.instant, b.instant)
        assert a.seed == b.seed

    def test_different_seeds_differ(self):
        env = envs.build_email_env()
        a = run_replication(env, "ts-beta", 150, seed=5, scenario="email")
        b = run_replication(env, "ts-beta", 150, seed=6, scenario="email")
        assert not np.array_equal(a.instant, b.instant)

    def test_cumulative_nondecreasing_and_nonnegative(self):
        env = envs.build_email_env()
        trace = run_replication(env, "ts-beta", 200, seed=1, scenario="email")
        assert np.all(trace.instant >= 0.0)
        assert np.all(np.diff(trace.cumulative) >= 0.0)

    def test_beta_agent_on_unbounded_rewards_propagates(self):
        env = envs.build_lowerbound_env(1, 0.3, [0.5])
        with pytest.raises(ValueError, match=r"\[0, 1\]"):
            run_replication(env, "ts-beta", 50, seed=0)

    def test_sublinear_growth_smoke(self):
        env = envs.build_pure_sim_benchmark()
        trace = run_replication(env, "c-ucb", 2000, seed=3, scenario="pure-sim")
        assert trace.cumulative[1999] / trace.cumulative[499] < 4.0


class TestRunExperiment:
    def test_r1_reduces_to_run_replication(self):
        config = email_config(replications=1)
        result = run_experiment(config)
        env = envs.build_email_env()
        for spec in config.agents:
            trace = run_replication(
                env, spec, config.horizon, config.base_seed, scenario="email", replication=0
            )
            np.testing.assert_array_equal(result.mean_curves[spec.name], trace.cumulative)

    def test_mean_curve_is_arithmetic_mean(self):
        result = run_experiment(email_config())
        for name in ("ucb", "c-ucb"):
            stack = [t.cumulative for t in result.traces if t.agent == name]
            want = sum(stack) / len(stack)
            assert np.max(np.abs(result.mean_curves[name] - want)) < 1e-12

    def test_adding_agent_does_not_perturb_existing_traces(self):
        solo = run_experiment(email_config(agents=("ucb",)))
        both = run_experiment(email_config(agents=("ucb", "c-ts-beta")))
        solo_traces = [t for t in solo.traces if t.agent == "ucb"]
        both_traces = [t for t in both.traces if t.agent == "ucb"]
        for a, b in zip(solo_traces, both_traces):
            np.testing.assert_array_equal(a.instant, b.instant)

    def test_bayes_zero_prior_sd_gives_zero_regret(self):
        config = ExperimentConfig(
            scenario="pure-sim-bayes",
            horizon=50,
            replications=2,
            base_seed=1,
            agents=("c-ts-gauss",),
            bayesian=True,
            prior_sd=0.0,
        )
        result = run_experiment(config)
        for trace in result.traces:
            assert np.all(trace.cumulative == 0.0)

    def test_bayes_theta_shared_across_agents(self):
        config = ExperimentConfig(
            scenario="pure-sim-bayes",
            horizon=30,
            replications=2,
            base_seed=3,
            agents=("ts-gauss", "c-ts-gauss"),
            bayesian=True,
        )
        thetas = [runner._bayes_theta(config, r, 4) for r in range(2)]
        assert not np.allclose(thetas[0], thetas[1])
        # same replication: both agents see the same environment draw of theta
        again = runner._bayes_theta(config, 0, 4)
        np.testing.assert_array_equal(thetas[0], again)

    def test_unknown_scenario_rejected(self):
        with pytest.raises(ValueError, match="unknown scenario"):
            run_experiment(email_config(scenario="nope"))

    def test_arm_budget_guard(self):
        with pytest.raises(ValueError, match="arm budget"):
            run_experiment(email_config(arm_budget=10))


class TestScalingScan:
    def test_scan_point_arm_counts(self):
        config = email_config(scenario="scale-m")
        assert [runner._scan_env_arms("m", v, config) for v in (2, 3, 4, 5, 6)] == [
            81,
            256,
            625,
            1296,
            2401,
        ]
        assert [runner._scan_env_arms("n", v, config) for v in (2, 3, 4, 5, 6)] == [
            16,
            64,
            256,
            1024,
            4096,
        ]
        assert [runner._scan_env_arms("N", v, config) for v in (2, 3, 4, 5, 6)] == [
            9,
            27,
            81,
            243,
            729,
        ]

    def test_lowerbound_scan_smoke(self):
        config = ExperimentConfig(
            scenario="lower-bound",
            horizon=80,
            replications=2,
            base_seed=9,
            agents=("c-ucb",),
        )
        result = scaling_scan("N", [1, 2], config)
        assert len(result.points) == 4
        regrets = result.final_regrets("c-ucb")
        assert set(regrets) == {1, 2}

    def test_m_scan_uses_fresh_instances_per_replication(self):
        config = ExperimentConfig(
            scenario="scale-m",
            horizon=10,
            replications=2,
            base_seed=2,
            agents=("ucb",),
        )
        env_a = runner._scan_instance("m", 2, 0, config)
        env_b = runner._scan_instance("m", 2, 1, config)
        env_a2 = runner._scan_instance("m", 2, 0, config)
        assert not np.array_equal(env_a.decomposition, env_b.decomposition)
        np.testing.assert_array_equal(env_a.decomposition, env_a2.decomposition)

    def test_unsorted_values_rejected(self):
        config = email_config(scenario="scale-m")
        with pytest.raises(ValueError, match="sorted"):
            scaling_scan("m", [3, 2], config)

    def test_budget_guard_message(self):
        config = email_config(scenario="scale-n", arm_budget=100)
        with pytest.raises(ValueError, match="arm budget"):
            scaling_scan("n", [2, 6], config)


class TestCsvOutput:
    def test_curves_schema_and_row_count(self, tmp_path):
        config = email_config(horizon=40, replications=2)
        result = run_experiment(config)
        path = tmp_path / "curves.csv"
        write_csv(result, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "scenario,agent,replication,seed,t,instant_regret,cum_regret"
        assert len(lines) == 1 + len(config.agents) * 2 * 40
        first = lines[1].split(",")
        assert first[0] == "email" and first[1] == "ucb"
        assert first[2] == "0" and first[4] == "1"

    def test_rerun_is_byte_identical(self, tmp_path):
        config = email_config(horizon=60, replications=2)
        a = tmp_path / "a.csv"
        b = tmp_path / "b.csv"
        write_csv(run_experiment(config), a)
        write_csv(run_experiment(config), b)
        assert a.read_bytes() == b.read_bytes()

    def test_parallel_matches_serial_bytes(self, tmp_path):
        serial = email_config(horizon=50, replications=3, workers=1)
        parallel = email_config(horizon=50, replications=3, workers=2)
        a = tmp_path / "serial.csv"
        b = tmp_path / "parallel.csv"
        write_csv(run_experiment(serial), a)
        write_csv(run_experiment(parallel), b)
        assert a.read_bytes() == b.read_bytes()

    def test_scan_schema(self, tmp_path):
        config = ExperimentConfig(
            scenario="lower-bound",
            horizon=30,
            replications=2,
            base_seed=4,
            agents=("c-ucb",),
        )
        result = scaling_scan("N", [1, 2], config)
        path = tmp_path / "scan.csv"
        write_csv(result, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "scenario,agent,axis,axis_value,replication,final_regret"
        assert len(lines) == 1 + 4

    def test_manifest_contents(self, tmp_path):
        import json

        config = email_config(horizon=30, replications=2)
        result = run_experiment(config)
        path = tmp_path / "manifest.json"
        write_manifest(result, path, files=["curves.csv"])
        data = json.loads(path.read_text())
        assert data["config"]["scenario"] == "email"
        assert data["config"]["base_seed"] == 7
        assert len(data["runs"]) == 4
        assert data["files"] == ["curves.csv"]
        assert data["wall_time_s"] > 0

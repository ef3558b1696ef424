"""Bandit environments over discrete causal models.

An environment bundles a causal network, an arm set (one arm per joint
intervention code, 0 meaning "leave the variable alone"), the exact
reward-parent distribution for every arm, and a reward model.  Ground-truth
arm means are kept for regret bookkeeping only; agents never see them.
"""

from __future__ import annotations

import functools
import json
from bisect import bisect_right
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from . import scm
from .scm import DiscreteNetwork, Intervention


@dataclass(frozen=True)
class Arm:
    id: int
    intervention: Intervention


@dataclass(frozen=True)
class Observation:
    z_index: int
    reward: float


@dataclass(frozen=True)
class LinearGaussianReward:
    theta: tuple[float, ...]
    noise_sd: float

    kind = "linear_gaussian"


@dataclass(frozen=True)
class BernoulliEmailReward:
    """Click indicator with mean ``1 - (Z1 + Z2 + Z3) / 9``."""

    kind = "bernoulli_email"


@dataclass(frozen=True)
class LowerBoundReward:
    """Reward ``delta * X1 + N(0, 1)`` used by the hard instances for
    non-causal algorithms."""

    delta: float

    kind = "lower_bound"


RewardModel = LinearGaussianReward | BernoulliEmailReward | LowerBoundReward


# ---------------------------------------------------------------------------
# Arm coding: mixed radix over per-variable {0..domain} codes, 0 = skip
# ---------------------------------------------------------------------------


def arm_radices(network: DiscreteNetwork) -> tuple[int, ...]:
    return tuple(network.variables[v].domain_size + 1 for v in network.intervenable)


def arm_codes(radices: Sequence[int], arm_id: int) -> tuple[int, ...]:
    codes = []
    for r in reversed(radices):
        codes.append(arm_id % r)
        arm_id //= r
    return tuple(reversed(codes))


def arm_id_of(radices: Sequence[int], codes: Sequence[int]) -> int:
    out = 0
    for r, c in zip(radices, codes):
        out = out * r + c
    return out


class BanditEnvironment:
    """Immutable environment: arms, exact decomposition tables, reward model."""

    def __init__(
        self,
        network: DiscreteNetwork,
        reward_model: RewardModel,
        features: np.ndarray,
        z_means: np.ndarray,
        decomposition: np.ndarray,
        name: str,
    ):
        self.network = network
        self.reward_model = reward_model
        self.name = name
        self.radices = arm_radices(network)
        self.n_arms = int(np.prod(self.radices)) if self.radices else 1
        self.k_z = network.k_z
        self.z_assignments = scm.enumerate_parent_assignments(network)
        self.features = np.asarray(features, dtype=float)
        self.z_means = np.asarray(z_means, dtype=float)
        self.decomposition = np.ascontiguousarray(decomposition, dtype=float)
        if self.decomposition.shape != (self.n_arms, self.k_z):
            raise ValueError(
                f"decomposition shape {self.decomposition.shape} != "
                f"({self.n_arms}, {self.k_z})"
            )
        self.arm_features = self.decomposition @ self.features
        self.true_means = self.decomposition @ self.z_means
        self.optimal_mean = float(self.true_means.max())
        self._plans: dict[int, tuple] = {}

    # -- arms ---------------------------------------------------------------

    def arm_intervention(self, arm_id: int) -> Intervention:
        codes = arm_codes(self.radices, arm_id)
        return Intervention(
            {v: c for v, c in zip(self.network.intervenable, codes) if c > 0}
        )

    def arm(self, arm_id: int) -> Arm:
        return Arm(id=arm_id, intervention=self.arm_intervention(arm_id))

    def arms(self) -> list[Arm]:
        return [self.arm(a) for a in range(self.n_arms)]

    # -- ground truth (regret bookkeeping only) ------------------------------

    def true_mean(self, arm_id: int) -> float:
        return float(self.true_means[arm_id])

    # -- interaction ----------------------------------------------------------

    def _plan(self, arm_id: int):
        plan = self._plans.get(arm_id)
        if plan is None:
            net = self.network
            fixed = {
                v: c - 1
                for v, c in zip(net.intervenable, arm_codes(self.radices, arm_id))
                if c > 0
            }
            closure = scm._mutilated_closure(net, fixed)
            steps = tuple(
                (v, net._cum_rows[v], net.parents[v], net._parent_strides[v])
                for v in closure
                if v not in fixed
            )
            z_parts = tuple(zip(net.reward_parents, net._z_strides))
            plan = (tuple(fixed.items()), steps, z_parts)
            self._plans[arm_id] = plan
        return plan

    def sample_z_index(self, arm_id: int, rng: np.random.Generator) -> int:
        """Ancestral sample of the mutilated graph, reduced to the
        reward-parent assignment index."""
        fixed_items, steps, z_parts = self._plan(arm_id)
        codes = [0] * self.network.n_variables
        for v, c in fixed_items:
            codes[v] = c
        draws = rng.random(len(steps))
        for (v, cum_rows, parents, strides), u in zip(steps, draws):
            row = 0
            for p, s in zip(parents, strides):
                row += codes[p] * s
            crow = cum_rows[row]
            codes[v] = min(bisect_right(crow, u), len(crow) - 1)
        z = 0
        for v, s in z_parts:
            z += codes[v] * s
        return z

    def sample_reward(self, z_index: int, rng: np.random.Generator) -> float:
        model = self.reward_model
        if isinstance(model, BernoulliEmailReward):
            return 1.0 if rng.random() < self.z_means[z_index] else 0.0
        if isinstance(model, LowerBoundReward):
            return float(self.z_means[z_index] + rng.standard_normal())
        return float(
            self.z_means[z_index] + model.noise_sd * rng.standard_normal()
        )

    def pull(self, arm_id: int, rng: np.random.Generator) -> Observation:
        if not (0 <= arm_id < self.n_arms):
            raise ValueError(f"arm id {arm_id} out of range 0..{self.n_arms - 1}")
        z = self.sample_z_index(arm_id, rng)
        return Observation(z_index=z, reward=self.sample_reward(z, rng))

    def with_reward_theta(self, theta: Sequence[float]) -> "BanditEnvironment":
        """Same graph and arms, new linear coefficient (used for Bayesian runs)."""
        if not isinstance(self.reward_model, LinearGaussianReward):
            raise ValueError("theta replacement requires a linear-Gaussian reward")
        theta = tuple(float(t) for t in theta)
        model = LinearGaussianReward(theta=theta, noise_sd=self.reward_model.noise_sd)
        return BanditEnvironment(
            network=self.network,
            reward_model=model,
            features=self.features,
            z_means=self.features @ np.asarray(theta),
            decomposition=self.decomposition,
            name=self.name,
        )


def true_mean(env: BanditEnvironment, arm_id: int) -> float:
    return env.true_mean(arm_id)


def optimal_mean(env: BanditEnvironment) -> float:
    return env.optimal_mean


def pull(env: BanditEnvironment, arm_id: int, rng: np.random.Generator) -> Observation:
    return env.pull(arm_id, rng)


def generic_decomposition(network: DiscreteNetwork) -> np.ndarray:
    """Exact ``(arms, k_z)`` table via per-arm inference on the mutilated graph."""
    radices = arm_radices(network)
    n_arms = int(np.prod(radices)) if radices else 1
    rows = np.empty((n_arms, network.k_z))
    for a in range(n_arms):
        codes = arm_codes(radices, a)
        intervention = Intervention(
            {v: c for v, c in zip(network.intervenable, codes) if c > 0}
        )
        rows[a] = scm.parent_distribution(network, intervention)
    return rows


# ---------------------------------------------------------------------------
# Pure simulation: X_i -> W_i chains, linear reward on the W values
# ---------------------------------------------------------------------------

PURE_SIM_MARGINALS = (
    (0.3, 0.4, 0.3),
    (0.3, 0.3, 0.4),
    (0.5, 0.3, 0.2),
    (0.25, 0.25, 0.5),
)
PURE_SIM_CONDITIONALS = (
    (0.2, 0.5, 0.8),
    (0.3, 0.2, 0.8),
    (0.4, 0.6, 0.5),
    (0.3, 0.5, 0.6),
)
PURE_SIM_THETA = (0.25, 0.25, -0.25, -0.25)
PURE_SIM_NOISE_SD = 0.1


def parallel_network(m: int, n: int, marginals, conditionals, name: str) -> DiscreteNetwork:
    variables = [(f"X{i+1}", m) for i in range(n)] + [(f"W{i+1}", 2) for i in range(n)]
    parents = [() for _ in range(n)] + [(i,) for i in range(n)]
    cpts = [np.atleast_2d(np.asarray(marginals[i], dtype=float)) for i in range(n)]
    for i in range(n):
        cpts.append(np.array([[p, 1.0 - p] for p in conditionals[i]]))
    return DiscreteNetwork(
        variables=variables,
        parents=parents,
        cpts=cpts,
        reward_parents=[n + i for i in range(n)],
        intervenable=list(range(n)),
        name=name,
    )


def build_parallel_sim(
    m: int,
    n: int,
    marginals,
    conditionals,
    theta,
    noise_sd: float = PURE_SIM_NOISE_SD,
    name: str = "pure-sim",
) -> BanditEnvironment:
    """Environment with ``(m+1)^n`` arms and ``2^n`` reward-parent assignments.

    ``marginals[i]`` is the distribution of X_{i+1} over its ``m`` values;
    ``conditionals[i][j]`` is P(W_{i+1} = 1 | X_{i+1} = j+1).  The reward is
    ``<(W_1..W_n), theta> + N(0, noise_sd^2)``.
    """
    if m < 2 or n < 1:
        raise ValueError("need m >= 2 and n >= 1")
    marginals = np.asarray(marginals, dtype=float)
    conditionals = np.asarray(conditionals, dtype=float)
    theta = np.asarray(theta, dtype=float)
    if marginals.shape != (n, m):
        raise ValueError(f"marginals must have shape ({n}, {m}), got {marginals.shape}")
    if np.any(np.abs(marginals.sum(axis=1) - 1.0) > scm.ROW_SUM_TOL):
        raise ValueError("each marginal row must sum to 1")
    if conditionals.shape != (n, m):
        raise ValueError(f"conditionals must have shape ({n}, {m}), got {conditionals.shape}")
    if np.any((conditionals < 0) | (conditionals > 1)):
        raise ValueError("conditionals must lie in [0, 1]")
    if theta.shape != (n,):
        raise ValueError(f"theta must have length {n}")

    network = parallel_network(m, n, marginals, conditionals, name)
    # Under any intervention the chains stay independent, so the table
    # factorizes per coordinate: P(Z|a) = prod_i P(W_i | a_i).
    coord = []
    for i in range(n):
        mat = np.empty((m + 1, 2))
        mat[0, 0] = float(marginals[i] @ conditionals[i])
        mat[0, 1] = 1.0 - mat[0, 0]
        for j in range(m):
            mat[j + 1] = (conditionals[i, j], 1.0 - conditionals[i, j])
        coord.append(mat)
    decomposition = functools.reduce(np.kron, coord)
    features = np.array(
        [pa.values for pa in scm.enumerate_parent_assignments(network)], dtype=float
    )
    return BanditEnvironment(
        network=network,
        reward_model=LinearGaussianReward(theta=tuple(theta), noise_sd=float(noise_sd)),
        features=features,
        z_means=features @ theta,
        decomposition=decomposition,
        name=name,
    )


def build_pure_sim_benchmark() -> BanditEnvironment:
    return build_parallel_sim(
        3,
        4,
        PURE_SIM_MARGINALS,
        PURE_SIM_CONDITIONALS,
        PURE_SIM_THETA,
        PURE_SIM_NOISE_SD,
        name="pure-sim",
    )


def build_random_instance(
    m: int,
    n: int,
    rng: np.random.Generator,
    theta=None,
    noise_sd: float = PURE_SIM_NOISE_SD,
    name: str | None = None,
) -> BanditEnvironment:
    """Random parallel-graph instance: marginals ~ Dirichlet(1_m), conditional
    success probabilities uniform on [0, 1]."""
    if theta is None:
        if n != 4:
            raise ValueError("default theta is 4-dimensional; pass theta explicitly")
        theta = PURE_SIM_THETA
    marginals = rng.dirichlet(np.ones(m), size=n)
    conditionals = rng.uniform(size=(n, m))
    return build_parallel_sim(
        m,
        n,
        marginals,
        conditionals,
        theta,
        noise_sd,
        name=name or f"random-m{m}-n{n}",
    )


# ---------------------------------------------------------------------------
# Email campaign
# ---------------------------------------------------------------------------

EMAIL_PX1 = (0.2, 0.2, 0.6)
EMAIL_PX2 = (0.05, 0.6, 0.3, 0.05)
EMAIL_PZ3 = (0.5, 0.2, 0.3)
EMAIL_Z1_GIVEN_X2 = (0.7, 0.7, 0.3, 0.3)
EMAIL_Z2_GIVEN_X1_3 = (0.6, 0.7, 0.6, 0.5)
EMAIL_Z2_GIVEN_X1_OTHER = (0.8, 0.9, 0.5, 0.2)


def email_network() -> DiscreteNetwork:
    variables = [("X1", 3), ("X2", 4), ("Z1", 2), ("Z2", 2), ("Z3", 3)]
    parents = [(), (), (1,), (0, 1), ()]
    z2_rows = []
    for x1 in (1, 2, 3):
        table = EMAIL_Z2_GIVEN_X1_3 if x1 == 3 else EMAIL_Z2_GIVEN_X1_OTHER
        z2_rows.extend([p, 1.0 - p] for p in table)
    cpts = [
        np.array([EMAIL_PX1]),
        np.array([EMAIL_PX2]),
        np.array([[p, 1.0 - p] for p in EMAIL_Z1_GIVEN_X2]),
        np.array(z2_rows),
        np.array([EMAIL_PZ3]),
    ]
    return DiscreteNetwork(
        variables=variables,
        parents=parents,
        cpts=cpts,
        reward_parents=[2, 3, 4],
        intervenable=[0, 1, 4],
        name="email",
    )


def email_click_means(assignments) -> np.ndarray:
    return np.array([1.0 - sum(pa.values) / 9.0 for pa in assignments])


def build_email_env() -> BanditEnvironment:
    """80-arm campaign environment: do(product, purpose, send time); binary
    click reward with mean ``1 - (Z1 + Z2 + Z3) / 9``."""
    network = email_network()
    features = np.array(
        [(1.0, *pa.values) for pa in scm.enumerate_parent_assignments(network)]
    )
    return BanditEnvironment(
        network=network,
        reward_model=BernoulliEmailReward(),
        features=features,
        z_means=email_click_means(scm.enumerate_parent_assignments(network)),
        decomposition=generic_decomposition(network),
        name="email",
    )


# ---------------------------------------------------------------------------
# Lower-bound environment
# ---------------------------------------------------------------------------


def build_lowerbound_env(
    n_variables: int, delta: float, p, name: str | None = None
) -> BanditEnvironment:
    """``3^N`` arms over N independent binary variables; only X1 feeds the
    reward ``delta * X1 + N(0, 1)``."""
    if n_variables < 1:
        raise ValueError("need at least one variable")
    if delta <= 0:
        raise ValueError("delta must be positive")
    p = np.asarray(p, dtype=float)
    if p.shape != (n_variables,):
        raise ValueError(f"p must have length {n_variables}")
    if np.any((p <= 0) | (p >= 1)):
        raise ValueError("each p_i must lie in (0, 1)")
    network = DiscreteNetwork(
        variables=[(f"X{i+1}", 2) for i in range(n_variables)],
        parents=[() for _ in range(n_variables)],
        cpts=[np.array([[pi, 1.0 - pi]]) for pi in p],
        reward_parents=[0],
        intervenable=list(range(n_variables)),
        name=name or f"lower-bound-n{n_variables}",
    )
    features = np.array([[1.0], [2.0]])
    return BanditEnvironment(
        network=network,
        reward_model=LowerBoundReward(delta=float(delta)),
        features=features,
        z_means=delta * features[:, 0],
        decomposition=generic_decomposition(network),
        name=network.name,
    )


# ---------------------------------------------------------------------------
# File format: network fields plus a reward_model stanza
# ---------------------------------------------------------------------------


def reward_model_to_dict(model: RewardModel) -> dict:
    if isinstance(model, LinearGaussianReward):
        return {
            "kind": "linear_gaussian",
            "theta": list(model.theta),
            "noise_sd": model.noise_sd,
        }
    if isinstance(model, LowerBoundReward):
        return {"kind": "lower_bound", "delta": model.delta}
    return {"kind": "bernoulli_email"}


def environment_from_network(
    network: DiscreteNetwork, stanza: Mapping, name: str | None = None
) -> BanditEnvironment:
    assignments = scm.enumerate_parent_assignments(network)
    kind = stanza["kind"]
    if kind == "linear_gaussian":
        theta = np.asarray(stanza["theta"], dtype=float)
        features = np.array([pa.values for pa in assignments], dtype=float)
        model: RewardModel = LinearGaussianReward(
            theta=tuple(theta), noise_sd=float(stanza["noise_sd"])
        )
        z_means = features @ theta
    elif kind == "bernoulli_email":
        features = np.array([(1.0, *pa.values) for pa in assignments])
        model = BernoulliEmailReward()
        z_means = email_click_means(assignments)
    elif kind == "lower_bound":
        delta = float(stanza["delta"])
        features = np.array([pa.values for pa in assignments], dtype=float)
        model = LowerBoundReward(delta=delta)
        z_means = delta * features[:, 0]
    else:
        raise ValueError(f"unknown reward model kind: {kind!r}")
    return BanditEnvironment(
        network=network,
        reward_model=model,
        features=features,
        z_means=z_means,
        decomposition=generic_decomposition(network),
        name=name or network.name,
    )


def load_environment(path: str | Path) -> BanditEnvironment:
    with open(path) as f:
        data = json.load(f)
    if "reward_model" not in data:
        raise ValueError(f"{path}: missing reward_model stanza")
    network = scm.network_from_dict(data)
    return environment_from_network(network, data["reward_model"])


def save_environment(env: BanditEnvironment, path: str | Path) -> None:
    scm.save_network(
        env.network, path, extra={"reward_model": reward_model_to_dict(env.reward_model)}
    )


PRESETS = {
    "pure-sim": build_pure_sim_benchmark,
    "email": build_email_env,
    "lower-bound-n3": lambda: build_lowerbound_env(3, 0.3, [0.5, 0.5, 0.5]),
}

"""Bandit policies behind one contract: ``select_arm(t) -> arm id`` then
``update(arm, observation)``, called in strict alternation.

Causal agents receive the per-arm distribution over reward-parent
assignments (a row-stochastic ``(arms, k_z)`` table) and keep statistics per
assignment; linear agents receive per-arm feature vectors; the standard
baselines see nothing but the arm count.  Ties are always broken by lowest
arm id, which makes every agent deterministic given its RNG stream.
"""

from __future__ import annotations

import math

import numpy as np

from . import linalg
from .environments import BanditEnvironment, Observation


def default_delta(horizon: int) -> float:
    return 1.0 / horizon**2


def default_beta(horizon: int, dim: int) -> float:
    return 1.0 + math.sqrt(2 * math.log(horizon) + dim * math.log(1 + horizon / dim))


def _check_table(table: np.ndarray) -> np.ndarray:
    table = np.ascontiguousarray(table, dtype=float)
    if table.ndim != 2:
        raise ValueError("decomposition table must be 2-d (arms x assignments)")
    if np.any(table < 0) or np.any(np.abs(table.sum(axis=1) - 1.0) > 1e-9):
        raise ValueError("decomposition table rows must be distributions")
    return table


def _check_unit_reward(reward: float) -> float:
    if not (0.0 <= reward <= 1.0):
        raise ValueError(f"Beta-prior agents need rewards in [0, 1], got {reward}")
    return reward


class CausalUcb:
    """Optimism over reward-parent assignments, mixed through the known
    assignment distribution of each arm.

    Per assignment j the index is ``mean_j + sqrt(2 log(1/delta) / max(1, n_j))``;
    an arm scores the table-weighted sum of assignment indices.
    """

    name = "c-ucb"

    def __init__(self, decomposition, horizon: int, delta: float | None = None):
        self.table = _check_table(decomposition)
        self.horizon = int(horizon)
        self.delta = default_delta(self.horizon) if delta is None else float(delta)
        self.k_z = self.table.shape[1]
        self.counts = np.zeros(self.k_z, dtype=np.int64)
        self.means = np.zeros(self.k_z)
        self._log_term = 2.0 * math.log(1.0 / self.delta)

    def assignment_indices(self) -> np.ndarray:
        width = np.sqrt(self._log_term / np.maximum(1, self.counts))
        return self.means + width

    def select_arm(self, t: int) -> int:
        return int(np.argmax(self.table @ self.assignment_indices()))

    def update(self, arm: int, obs: Observation) -> None:
        j = obs.z_index
        c = self.counts[j]
        self.means[j] = (self.means[j] * c + obs.reward) / (c + 1)
        self.counts[j] = c + 1


class CausalTsBeta:
    """Thompson sampling with independent Beta posteriors per assignment.

    Real rewards in [0, 1] are binarized by a coin flip with success
    probability equal to the reward before the conjugate update.
    """

    name = "c-ts-beta"

    def __init__(self, decomposition, horizon: int, rng: np.random.Generator):
        self.table = _check_table(decomposition)
        self.horizon = int(horizon)
        self.rng = rng
        self.k_z = self.table.shape[1]
        self.successes = np.ones(self.k_z)
        self.failures = np.ones(self.k_z)

    def select_arm(self, t: int) -> int:
        draws = self.rng.beta(self.successes, self.failures)
        return int(np.argmax(self.table @ draws))

    def update(self, arm: int, obs: Observation) -> None:
        r = _check_unit_reward(obs.reward)
        if self.rng.random() < r:
            self.successes[obs.z_index] += 1.0
        else:
            self.failures[obs.z_index] += 1.0


class CausalTsGauss:
    """Thompson sampling with ``N(mean_j, 1 / (n_j + 1))`` posteriors per
    assignment."""

    name = "c-ts-gauss"

    def __init__(self, decomposition, horizon: int, rng: np.random.Generator):
        self.table = _check_table(decomposition)
        self.horizon = int(horizon)
        self.rng = rng
        self.k_z = self.table.shape[1]
        self.counts = np.zeros(self.k_z, dtype=np.int64)
        self.means = np.zeros(self.k_z)

    def select_arm(self, t: int) -> int:
        sd = 1.0 / np.sqrt(self.counts + 1.0)
        draws = self.means + sd * self.rng.standard_normal(self.k_z)
        return int(np.argmax(self.table @ draws))

    def update(self, arm: int, obs: Observation) -> None:
        j = obs.z_index
        c = self.counts[j]
        self.means[j] = (self.means[j] * c + obs.reward) / (c + 1)
        self.counts[j] = c + 1


class _LinearState:
    """Shared ridge state: V = I + sum m mᵀ, g = sum m * reward."""

    def __init__(self, arm_features):
        self.arm_features = np.ascontiguousarray(arm_features, dtype=float)
        if self.arm_features.ndim != 2:
            raise ValueError("arm features must be 2-d (arms x dim)")
        self.dim = self.arm_features.shape[1]
        self.gram = np.eye(self.dim)
        self.g = np.zeros(self.dim)
        self.theta_hat = np.zeros(self.dim)

    def absorb(self, arm: int, reward: float) -> None:
        m = self.arm_features[arm]
        self.gram = linalg.rank1_update(self.gram, m)
        self.g = self.g + m * reward
        self.theta_hat = linalg.solve(self.gram, self.g)


class CausalLinearUcb(_LinearState):
    """Linear optimism on the mixed feature vectors ``m_a``: score is
    ``<theta_hat, m_a> + beta * ||m_a||_{V^-1}``."""

    name = "cl-ucb"

    def __init__(self, arm_features, horizon: int, beta_override: float | None = None):
        super().__init__(arm_features)
        self.horizon = int(horizon)
        self.beta = (
            default_beta(self.horizon, self.dim)
            if beta_override is None
            else float(beta_override)
        )

    def select_arm(self, t: int) -> int:
        factor = linalg.cholesky_with_jitter(self.gram)
        widths = linalg.inv_factor_norms(factor, self.arm_features)
        return int(np.argmax(self.arm_features @ self.theta_hat + self.beta * widths))

    def update(self, arm: int, obs: Observation) -> None:
        self.absorb(arm, obs.reward)


class CausalLinearTs(_LinearState):
    """Linear Thompson sampling: draw ``theta ~ N(theta_hat, v² V⁻¹)`` and act
    greedily on it."""

    name = "cl-ts"

    def __init__(self, arm_features, horizon: int, rng: np.random.Generator, v: float = 1.0):
        super().__init__(arm_features)
        self.horizon = int(horizon)
        self.rng = rng
        if v < 0:
            raise ValueError("v must be nonnegative")
        self.v = float(v)

    def select_arm(self, t: int) -> int:
        factor = linalg.cholesky_with_jitter(self.gram)
        draw = linalg.sample_gaussian_inv_cov(self.theta_hat, factor, self.v, self.rng)
        return int(np.argmax(self.arm_features @ draw))

    def update(self, arm: int, obs: Observation) -> None:
        self.absorb(arm, obs.reward)


class StandardUcb:
    """Baseline UCB over raw arms: same width formula and delta as the causal
    variant, indexed per arm, ignoring the observed assignment."""

    name = "ucb"

    def __init__(self, n_arms: int, horizon: int, delta: float | None = None):
        self.n_arms = int(n_arms)
        self.horizon = int(horizon)
        self.delta = default_delta(self.horizon) if delta is None else float(delta)
        self.counts = np.zeros(self.n_arms, dtype=np.int64)
        self.means = np.zeros(self.n_arms)
        self._log_term = 2.0 * math.log(1.0 / self.delta)

    def select_arm(self, t: int) -> int:
        width = np.sqrt(self._log_term / np.maximum(1, self.counts))
        return int(np.argmax(self.means + width))

    def update(self, arm: int, obs: Observation) -> None:
        c = self.counts[arm]
        self.means[arm] = (self.means[arm] * c + obs.reward) / (c + 1)
        self.counts[arm] = c + 1


class StandardTsBeta:
    name = "ts-beta"

    def __init__(self, n_arms: int, horizon: int, rng: np.random.Generator):
        self.n_arms = int(n_arms)
        self.horizon = int(horizon)
        self.rng = rng
        self.successes = np.ones(self.n_arms)
        self.failures = np.ones(self.n_arms)

    def select_arm(self, t: int) -> int:
        return int(np.argmax(self.rng.beta(self.successes, self.failures)))

    def update(self, arm: int, obs: Observation) -> None:
        r = _check_unit_reward(obs.reward)
        if self.rng.random() < r:
            self.successes[arm] += 1.0
        else:
            self.failures[arm] += 1.0


class StandardTsGauss:
    name = "ts-gauss"

    def __init__(self, n_arms: int, horizon: int, rng: np.random.Generator):
        self.n_arms = int(n_arms)
        self.horizon = int(horizon)
        self.rng = rng
        self.counts = np.zeros(self.n_arms, dtype=np.int64)
        self.means = np.zeros(self.n_arms)

    def select_arm(self, t: int) -> int:
        sd = 1.0 / np.sqrt(self.counts + 1.0)
        return int(np.argmax(self.means + sd * self.rng.standard_normal(self.n_arms)))

    def update(self, arm: int, obs: Observation) -> None:
        c = self.counts[arm]
        self.means[arm] = (self.means[arm] * c + obs.reward) / (c + 1)
        self.counts[arm] = c + 1


AGENT_NAMES = (
    "c-ucb",
    "c-ts-beta",
    "c-ts-gauss",
    "cl-ucb",
    "cl-ts",
    "ucb",
    "ts-beta",
    "ts-gauss",
)


def make_agent(
    name: str,
    env: BanditEnvironment,
    horizon: int,
    rng: np.random.Generator,
    delta: float | None = None,
    v: float = 1.0,
    beta_override: float | None = None,
):
    """Construct an agent by name, handing it only the information its family
    is allowed to see."""
    if name == "c-ucb":
        return CausalUcb(env.decomposition, horizon, delta=delta)
    if name == "c-ts-beta":
        return CausalTsBeta(env.decomposition, horizon, rng)
    if name == "c-ts-gauss":
        return CausalTsGauss(env.decomposition, horizon, rng)
    if name == "cl-ucb":
        return CausalLinearUcb(env.arm_features, horizon, beta_override=beta_override)
    if name == "cl-ts":
        return CausalLinearTs(env.arm_features, horizon, rng, v=v)
    if name == "ucb":
        return StandardUcb(env.n_arms, horizon, delta=delta)
    if name == "ts-beta":
        return StandardTsBeta(env.n_arms, horizon, rng)
    if name == "ts-gauss":
        return StandardTsGauss(env.n_arms, horizon, rng)
    raise ValueError(f"unknown agent {name!r}; known: {', '.join(AGENT_NAMES)}")

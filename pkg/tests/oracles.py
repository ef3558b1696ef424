"""Independent reference computations kept deliberately naive.

Nothing here shares code paths with the library: joint distributions come
from enumerating every variable of the original graph, matrix inverses from
Gauss-Jordan elimination.
"""

import itertools

import numpy as np


def brute_force_parent_distribution(network, intervention) -> np.ndarray:
    """P(reward parents | do(...)) by summing the full joint over ALL variables."""
    n = network.n_variables
    fixed = {v: val - 1 for v, val in intervention.assignments.items()}
    out = np.zeros(network.k_z)
    domains = [range(network.variables[v].domain_size) for v in range(n)]
    for combo in itertools.product(*domains):
        p = 1.0
        for v in range(n):
            if v in fixed:
                if combo[v] != fixed[v]:
                    p = 0.0
                    break
                continue
            row = 0
            for q, s in zip(network.parents[v], network._parent_strides[v]):
                row += combo[q] * s
            p *= network.cpts[v][row, combo[v]]
            if p == 0.0:
                break
        if p == 0.0:
            continue
        z = 0
        for q, s in zip(network.reward_parents, network._z_strides):
            z += combo[q] * s
        out[z] += p
    return out


def brute_force_mean(network, intervention, z_means) -> float:
    """E[reward | do(...)] via the full-joint distribution and per-assignment means."""
    dist = brute_force_parent_distribution(network, intervention)
    return float(np.dot(dist, z_means))


def tv_distance(p, q) -> float:
    return 0.5 * float(np.sum(np.abs(np.asarray(p) - np.asarray(q))))


def empirical_z_distribution(network, samples) -> np.ndarray:
    """Histogram of reward-parent assignment indices from full-joint samples."""
    counts = np.zeros(network.k_z)
    for row in np.atleast_2d(samples):
        z = 0
        for q, s in zip(network.reward_parents, network._z_strides):
            z += (row[q] - 1) * s
        counts[z] += 1
    return counts / counts.sum()


def gauss_jordan_inverse(a: np.ndarray) -> np.ndarray:
    """Matrix inverse by Gauss-Jordan elimination with partial pivoting."""
    a = np.asarray(a, dtype=float)
    d = a.shape[0]
    aug = np.hstack([a.copy(), np.eye(d)])
    for col in range(d):
        pivot = col + int(np.argmax(np.abs(aug[col:, col])))
        if abs(aug[pivot, col]) < 1e-14:
            raise ValueError("singular matrix")
        if pivot != col:
            aug[[col, pivot]] = aug[[pivot, col]]
        aug[col] /= aug[col, col]
        for r in range(d):
            if r != col:
                aug[r] -= aug[r, col] * aug[col]
    return aug[:, d:]

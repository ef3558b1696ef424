"""Small dense symmetric positive-definite helpers for the linear agents.

Matrices are plain float ndarrays; everything is value-semantics and safe to
call concurrently.
"""

from __future__ import annotations

import numpy as np

JITTER = 1e-10


class FactorizationError(ValueError):
    """Raised when a matrix expected to be positive definite is not."""


def rank1_update(v: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Return ``v + x xᵀ`` (exactly symmetric by construction)."""
    v = np.asarray(v, dtype=float)
    x = np.asarray(x, dtype=float)
    if x.shape != (v.shape[0],) or v.shape[0] != v.shape[1]:
        raise ValueError(f"dimension mismatch: matrix {v.shape}, vector {x.shape}")
    return v + np.outer(x, x)


def cholesky(v: np.ndarray) -> np.ndarray:
    """Lower-triangular ``L`` with ``L Lᵀ = v``."""
    try:
        return np.linalg.cholesky(np.asarray(v, dtype=float))
    except np.linalg.LinAlgError as exc:
        raise FactorizationError(f"matrix is not positive definite: {exc}") from exc


def cholesky_with_jitter(v: np.ndarray, jitter: float = JITTER) -> np.ndarray:
    """Cholesky factor, retrying once with ``jitter`` added to the diagonal."""
    try:
        return cholesky(v)
    except FactorizationError:
        return cholesky(v + jitter * np.eye(v.shape[0]))


def solve(v: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Return ``v⁻¹ b`` for positive-definite ``v``."""
    l = cholesky(v)
    y = np.linalg.solve(l, np.asarray(b, dtype=float))
    return np.linalg.solve(l.T, y)


def quad_norm_inv(v: np.ndarray, x: np.ndarray) -> float:
    """The norm ``‖x‖_{v⁻¹} = sqrt(xᵀ v⁻¹ x)``."""
    x = np.asarray(x, dtype=float)
    q = float(x @ solve(v, x))
    return float(np.sqrt(max(q, 0.0)))


def inv_factor_norms(l: np.ndarray, rows: np.ndarray) -> np.ndarray:
    """``‖rows[i]‖_{V⁻¹}`` for every row, given the factor ``L`` of ``V``.

    Uses ``xᵀV⁻¹x = ‖L⁻¹x‖²`` so only one triangular solve is needed for the
    whole batch.
    """
    sol = np.linalg.solve(l, np.asarray(rows, dtype=float).T)
    return np.sqrt(np.maximum(np.sum(sol * sol, axis=0), 0.0))


def mvn_sample(
    mean: np.ndarray, cov_factor: np.ndarray, rng: np.random.Generator
) -> np.ndarray:
    """Draw ``mean + F z`` with ``z`` iid standard normal; ``F Fᵀ`` is the covariance."""
    mean = np.asarray(mean, dtype=float)
    cov_factor = np.asarray(cov_factor, dtype=float)
    if cov_factor.shape[0] != mean.shape[0]:
        raise ValueError("dimension mismatch between mean and factor")
    return mean + cov_factor @ rng.standard_normal(cov_factor.shape[1])


def sample_gaussian_inv_cov(
    mean: np.ndarray, v_factor: np.ndarray, scale: float, rng: np.random.Generator
) -> np.ndarray:
    """Draw from ``N(mean, scale² V⁻¹)`` given the factor ``L`` of ``V``.

    With ``V = L Lᵀ`` the draw is ``mean + scale · L⁻ᵀ z``, avoiding an
    explicit inverse.
    """
    z = rng.standard_normal(len(mean))
    return np.asarray(mean, dtype=float) + scale * np.linalg.solve(v_factor.T, z)

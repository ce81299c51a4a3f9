"""Scalar diagnostics of a configuration.

All pairwise sums are multiplicity-weighted: a merged agent of multiplicity
k stands for k coincident original agents, and the prefactors use the
original agent count N.  This keeps the variance continuous across merge
events and makes the entropies report -inf exactly on clustered states
(any merged agent contains original pairs at distance zero).
"""

from __future__ import annotations

import math

import numpy as np

from .core import NEG_INF, Configuration, DomainError, EntropyGenerator


def _pairs(c: Configuration):
    """Index pairs i<j over current agents with distances and weight products."""
    n = c.n_effective
    if n < 2:
        empty = np.empty(0)
        return np.empty(0, dtype=int), np.empty(0, dtype=int), empty, empty
    i_idx, j_idx = np.triu_indices(n, k=1)
    diffs = c.positions[i_idx] - c.positions[j_idx]
    dist = np.linalg.norm(diffs, axis=1)
    wprod = (c.multiplicities[i_idx] * c.multiplicities[j_idx]).astype(float)
    return i_idx, j_idx, dist, wprod


def _is_clustered(c: Configuration, dist: np.ndarray) -> bool:
    return bool(np.any(c.multiplicities > 1) or np.any(dist == 0.0))


def variance(c: Configuration) -> float:
    """V = (1/(2N^2)) sum_{i<j} ||x_i - x_j||^2 over original-agent pairs.

    Zero exactly on consensus (all original agents coincident).
    """
    _, _, dist, wprod = _pairs(c)
    n = c.n_original
    return float(np.dot(wprod, dist**2) / (2.0 * n * n))


def log_entropy(c: Configuration) -> float:
    """W = (1/N^2) sum_{i<j} ln ||x_i - x_j||; -inf on clustered states."""
    _, _, dist, wprod = _pairs(c)
    if _is_clustered(c, dist):
        return NEG_INF
    n = c.n_original
    return float(np.dot(wprod, np.log(dist)) / (n * n))


def generalized_entropy(c: Configuration, g: EntropyGenerator) -> float:
    """W_g = (1/(2N^2)) sum_{i<j} g(||x_i - x_j||^2); -inf on clustered states.

    Note g applies to squared distances.
    """
    _, _, dist, wprod = _pairs(c)
    if _is_clustered(c, dist):
        return NEG_INF
    n = c.n_original
    return float(np.dot(wprod, g.evaluate(dist**2)) / (2.0 * n * n))


def partial_entropy(
    c: Configuration, g: EntropyGenerator, delta: float
) -> tuple[float, list[tuple[int, int]]]:
    """Entropy restricted to the danger set of pairs within distance delta.

    Returns ``(value, danger)`` where ``danger`` lists the current-agent
    index pairs (i, j), i < j, with ||x_i - x_j|| <= delta.  The value is
    0 when the danger set is empty and -inf when a danger pair sits at
    distance exactly zero (including pairs inside a merged agent).
    """
    if not delta > 0:
        raise DomainError("delta must be > 0")
    i_idx, j_idx, dist, wprod = _pairs(c)
    mask = dist <= delta
    danger = [(int(i), int(j)) for i, j in zip(i_idx[mask], j_idx[mask])]
    if np.any(c.multiplicities > 1) or np.any(dist[mask] == 0.0):
        return NEG_INF, danger
    if not np.any(mask):
        return 0.0, danger
    n = c.n_original
    value = float(np.dot(wprod[mask], g.evaluate(dist[mask] ** 2)) / (2.0 * n * n))
    return value, danger


def entropy_lower_bound(K: float, g: EntropyGenerator, n: int) -> float:
    """Guaranteed minimum pairwise distance for any N-agent state with W_g >= K.

    Inverts the entropy: every pair satisfies
    ``||x_i - x_j|| >= sqrt(g^-1(2 N^2 K - (N(N-1)/2 - 1) m))``.
    """
    if K == NEG_INF:
        return 0.0
    pairs = n * (n - 1) // 2
    arg = 2.0 * n * n * K - (pairs - 1) * g.m
    if arg >= g.m:
        raise DomainError(f"2N^2 K - (N(N-1)/2 - 1) m = {arg} is not below sup g = {g.m}")
    return math.sqrt(g.inverse(arg))


def min_pairwise_distance(c: Configuration) -> float:
    """Minimum distance over distinct current agents; +inf with fewer than two."""
    _, _, dist, _ = _pairs(c)
    if dist.size == 0:
        return math.inf
    return float(dist.min())

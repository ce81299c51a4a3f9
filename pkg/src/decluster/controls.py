"""Sparse feedback controls and their instantaneous-derivative diagnostics.

Each policy maps the current configuration to a budget-feasible control
that pushes a single agent at full strength:

- variance control: push the agent furthest from the barycenter outward,
  which maximizes dV/dt under the l1-l2 budget;
- entropy control: push the agent with the largest entropy gradient score,
  which maximizes dW_g/dt;
- partial-entropy control: same, restricted to pairs inside the danger
  radius delta, used to prevent clustering.

Argmax ties break to the lowest index so runs are reproducible; degenerate
all-zero scores yield the zero control.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import (
    ClusterError,
    Configuration,
    ConfigError,
    ControlVector,
    EntropyGenerator,
    InteractionKernel,
)
from .dynamics import barycenter, hk_rhs


def _sparse_control(scores: np.ndarray, directions: np.ndarray, M: float) -> ControlVector:
    """Full-budget push of the top-scoring agent; zero control if all scores vanish."""
    n, d = directions.shape
    if float(scores.max(initial=0.0)) == 0.0:
        return ControlVector.zero(n, d)
    i = int(np.argmax(scores))
    u = np.zeros((n, d))
    u[i] = M * directions[i] / scores[i]
    return ControlVector(u, active_index=i)


def control_uV(c: Configuration, M: float) -> ControlVector:
    """Push the agent with the largest offset from the barycenter outward."""
    R = c.positions - barycenter(c)
    return _sparse_control(np.linalg.norm(R, axis=1), R, M)


def _entropy_scores(c: Configuration, g: EntropyGenerator) -> np.ndarray:
    """S_i = (1/N) sum_{j != i} m_j g'(||x_i - x_j||^2)(x_i - x_j)."""
    diff = c.positions[:, None, :] - c.positions[None, :, :]
    d2 = np.sum(diff**2, axis=2)
    if np.any((d2 == 0.0) & ~np.eye(c.n_effective, dtype=bool)):
        raise ClusterError("entropy gradient undefined: two agents coincide")
    np.fill_diagonal(d2, 1.0)  # placeholder; diagonal weight is zeroed below
    coeff = g.derivative(d2) * (c.multiplicities / c.n_original)[None, :]
    np.fill_diagonal(coeff, 0.0)
    return np.einsum("ij,ijd->id", coeff, diff)


def control_uW(c: Configuration, g: EntropyGenerator, M: float) -> ControlVector:
    """Push the agent with the largest entropy-gradient score."""
    S = _entropy_scores(c, g)
    return _sparse_control(np.linalg.norm(S, axis=1), S, M)


def control_udelta(
    c: Configuration, g_delta: EntropyGenerator, delta: float, M: float
) -> ControlVector:
    """Danger-set variant: scores sum only over pairs within distance delta.

    ``g_delta`` must vanish at delta^2 with positive supremum, so the
    partial entropy stays continuous when pairs cross the danger radius.
    """
    if not delta > 0:
        raise ConfigError("delta must be > 0")
    if not (g_delta.m > 0 and abs(g_delta.evaluate(delta**2)) <= 1e-9 * g_delta.m):
        raise ConfigError("generator must satisfy g(delta^2) = 0 and sup g > 0")
    diff = c.positions[:, None, :] - c.positions[None, :, :]
    d2 = np.sum(diff**2, axis=2)
    off = ~np.eye(c.n_effective, dtype=bool)
    danger = off & (d2 <= delta * delta)
    if np.any(danger & (d2 == 0.0)):
        raise ClusterError("danger set contains an exact cluster")
    if not danger.any():
        return ControlVector.zero(c.n_effective, c.d)
    d2_safe = np.where(danger, d2, 1.0)
    coeff = g_delta.derivative(d2_safe) * c.multiplicities[None, :]
    coeff[~danger] = 0.0
    S = np.einsum("ij,ijd->id", coeff, diff)
    return _sparse_control(np.linalg.norm(S, axis=1), S, M)


def random_feasible_control(n: int, d: int, M: float, seed) -> ControlVector:
    """Budget-saturating control with seeded random directions.

    Gaussian directions rescaled so the norms sum exactly to M; used as a
    sampling oracle in the optimality tests.
    """
    rng = np.random.default_rng(seed)
    v = rng.standard_normal((n, d))
    total = np.linalg.norm(v, axis=1).sum()
    if total == 0.0:
        return ControlVector.zero(n, d)
    return ControlVector(v * (M / total))


def variance_derivative(
    c: Configuration, kernel: InteractionKernel, u: ControlVector
) -> float:
    """dV/dt along the controlled flow: (1/N) sum_i m_i <x_i - xbar, f_i + u_i>."""
    R = c.positions - barycenter(c)
    vel = hk_rhs(c, kernel) + u.vectors
    w = c.multiplicities / c.n_original
    return float(np.sum(w[:, None] * R * vel))


def entropy_derivative(
    c: Configuration,
    kernel: InteractionKernel,
    g: EntropyGenerator,
    u: ControlVector,
) -> float:
    """dW_g/dt along the controlled flow: (1/N) sum_i m_i <S_i, f_i + u_i>."""
    S = _entropy_scores(c, g)
    vel = hk_rhs(c, kernel) + u.vectors
    w = c.multiplicities / c.n_original
    return float(np.sum(w[:, None] * S * vel))


@dataclass(frozen=True)
class ControlPolicy:
    """Named feedback policy with its parameters; ``compute`` evaluates it.

    Tags: ``zero``, ``variance_max``, ``entropy_max``, ``partial_entropy_max``
    (needs ``g`` with g(delta^2)=0 and ``delta``), ``random_feasible``
    (needs ``seed``; draws a fresh control per call, seeded per step).
    """

    tag: str
    M: float = 0.0
    g: Optional[EntropyGenerator] = None
    delta: Optional[float] = None
    seed: Optional[int] = None

    def __post_init__(self):
        known = {"zero", "variance_max", "entropy_max", "partial_entropy_max", "random_feasible"}
        if self.tag not in known:
            raise ConfigError(f"unknown policy tag {self.tag!r}")
        if self.tag != "zero" and not self.M > 0:
            raise ConfigError(f"policy {self.tag!r} requires a positive budget M")
        if self.tag in ("entropy_max", "partial_entropy_max") and self.g is None:
            raise ConfigError(f"policy {self.tag!r} requires an entropy generator")
        if self.tag == "partial_entropy_max" and not (self.delta and self.delta > 0):
            raise ConfigError("partial_entropy_max requires delta > 0")
        if self.tag == "random_feasible" and self.seed is None:
            raise ConfigError("random_feasible requires a seed")
        object.__setattr__(self, "_calls", [0])

    def compute(self, c: Configuration) -> ControlVector:
        if self.tag == "zero":
            return ControlVector.zero(c.n_effective, c.d)
        if self.tag == "variance_max":
            return control_uV(c, self.M)
        if self.tag == "entropy_max":
            return control_uW(c, self.g, self.M)
        if self.tag == "partial_entropy_max":
            return control_udelta(c, self.g, self.delta, self.M)
        # random_feasible: an independent draw per call, reproducible for a
        # fixed seed and call sequence.
        k = self._calls[0]
        self._calls[0] = k + 1
        return random_feasible_control(c.n_effective, c.d, self.M, (self.seed, k))


def zero_policy() -> ControlPolicy:
    return ControlPolicy(tag="zero")

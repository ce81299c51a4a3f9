"""Time integration of the controlled Hegselmann-Krause system.

The right-hand side is the multiplicity-weighted attraction sum plus a
sample-and-hold feedback control.  Integration is explicit RK4 on a fixed
base step; near kernel blow-up (velocities above ``rhs_cap``) the step is
subdivided so no agent moves more than a fixed fraction of the current
minimum pairwise distance, which lets colliding pairs reach ``merge_tol``
instead of overshooting.  When two agents come within ``merge_tol`` they
merge into one agent at their multiplicity-weighted mean and stay merged
(a(0) = 0), which conserves the barycenter exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import (
    Configuration,
    ConfigError,
    ControlVector,
    InteractionKernel,
    StiffnessError,
)
from .functionals import generalized_entropy, min_pairwise_distance, variance

#: Max pairwise compression per sub-step: h is chosen so that no pair's
#: relative displacement exceeds this fraction of its current distance.
_COMPRESSION_FRACTION = 0.2

#: Pairs closer than this multiple of merge_tol always get compression-limited
#: sub-steps, so slow collisions cross merge_tol instead of jumping over it.
_NEAR_MERGE_FACTOR = 1e3


def _compression_rate(positions: np.ndarray, vels: np.ndarray) -> float:
    """max over pairs of |v_i - v_j| / ||x_i - x_j||, the inverse time scale
    on which some pairwise distance can change by order one."""
    n = positions.shape[0]
    if n < 2:
        return 0.0
    i_idx, j_idx = np.triu_indices(n, k=1)
    dist = np.linalg.norm(positions[i_idx] - positions[j_idx], axis=1)
    relv = np.linalg.norm(vels[i_idx] - vels[j_idx], axis=1)
    with np.errstate(divide="ignore"):
        rates = np.where(dist > 0, relv / dist, np.where(relv > 0, np.inf, 0.0))
    return float(rates.max())


@dataclass(frozen=True)
class IntegratorSettings:
    dt: float = 0.01
    t_final: float = 10.0
    merge_tol: float = 1e-8
    rhs_cap: float = 0.5  # velocity norm above which sub-stepping may engage
    max_halvings: int = 60
    record_every: int = 1

    def __post_init__(self):
        if not (self.dt > 0 and self.t_final > 0 and self.merge_tol > 0):
            raise ConfigError("dt, t_final and merge_tol must be positive")
        if self.record_every < 1 or self.max_halvings < 0:
            raise ConfigError("record_every >= 1 and max_halvings >= 0 required")


@dataclass(frozen=True)
class MergeEvent:
    time: float
    indices: tuple[int, int]  # current-agent indices at merge time
    kind: str = "merge"


@dataclass(frozen=True)
class BudgetSaturationEvent:
    time: float
    kind: str = "budget_saturation"


@dataclass(frozen=True)
class HalvingEvent:
    time: float
    kind: str = "halving"


@dataclass
class Trajectory:
    """Recorded time series of one simulation run."""

    times: np.ndarray
    configurations: list[Configuration]
    variance: np.ndarray
    entropy: np.ndarray  # W_g with the diagnostic generator (-inf once clustered)
    min_dist: np.ndarray
    active_index: np.ndarray  # controlled agent per record, -1 when none
    events: list = field(default_factory=list)

    @property
    def merge_events(self) -> list[MergeEvent]:
        return [e for e in self.events if isinstance(e, MergeEvent)]

    @property
    def clustering_time(self) -> Optional[float]:
        merges = self.merge_events
        return merges[0].time if merges else None


def barycenter(c: Configuration) -> np.ndarray:
    """Multiplicity-weighted mean position; conserved by the uncontrolled flow."""
    w = c.multiplicities / c.n_original
    return w @ c.positions


def _velocities(
    positions: np.ndarray, weights: np.ndarray, kernel: InteractionKernel
) -> np.ndarray:
    # v_i = sum_j w_j a(||x_j - x_i||) (x_j - x_i); a(0) = 0 kills i = j terms.
    diff = positions[None, :, :] - positions[:, None, :]
    dist = np.linalg.norm(diff, axis=2)
    coeff = kernel.evaluate(dist) * weights[None, :]
    return np.einsum("ij,ijd->id", coeff, diff)


def hk_rhs(c: Configuration, kernel: InteractionKernel) -> np.ndarray:
    """Uncontrolled velocities of the current agents, shape (n_effective, d)."""
    return _velocities(c.positions, c.multiplicities / c.n_original, kernel)


def _rk4(positions, weights, kernel, u, h):
    """One RK4 step of x' = interaction velocities + u; returns new positions."""

    def f(pos):
        return _velocities(pos, weights, kernel) + u

    k1 = f(positions)
    k2 = f(positions + 0.5 * h * k1)
    k3 = f(positions + 0.5 * h * k2)
    k4 = f(positions + h * k3)
    return positions + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def step(
    c: Configuration,
    kernel: InteractionKernel,
    u: ControlVector,
    settings: IntegratorSettings,
    h: Optional[float] = None,
    _depth: int = 0,
) -> Configuration:
    """One RK4 step of x' = hk_rhs + u with u held constant.

    If the largest stage velocity exceeds ``rhs_cap`` and would move an
    agent further than a fraction of the minimum pairwise distance, the
    step is recursively halved; :class:`StiffnessError` when
    ``max_halvings`` levels do not suffice.  ``h`` defaults to the base
    step and may be negative (used by finite-difference checks).
    """
    if h is None:
        h = settings.dt
    if u.vectors.shape != c.positions.shape:
        raise ConfigError("control shape does not match configuration")
    weights = c.multiplicities / c.n_original
    vels = _velocities(c.positions, weights, kernel) + u.vectors
    vmax = float(np.linalg.norm(vels, axis=1).max())
    if vmax > settings.rhs_cap:
        rate = _compression_rate(c.positions, vels)
        if rate * abs(h) > _COMPRESSION_FRACTION:
            if _depth >= settings.max_halvings:
                raise StiffnessError(
                    f"velocity {vmax:.3e} exceeds cap {settings.rhs_cap} and "
                    f"compression persists after {settings.max_halvings} halvings"
                )
            half = step(c, kernel, u, settings, h / 2.0, _depth + 1)
            return step(half, kernel, u, settings, h / 2.0, _depth + 1)
    return c.with_positions(_rk4(c.positions, weights, kernel, u.vectors, h))


def _merge_pass(state: Configuration, merge_tol: float, t: float, events: list):
    """Merge all pairs within merge_tol (closest first); returns new state
    and the post-merge minimum pairwise distance."""
    while state.n_effective > 1:
        dmin = min_pairwise_distance(state)
        if dmin > merge_tol:
            return state, dmin
        pos = state.positions
        n = state.n_effective
        i_idx, j_idx = np.triu_indices(n, k=1)
        dists = np.linalg.norm(pos[i_idx] - pos[j_idx], axis=1)
        k = int(np.argmin(dists))
        i, j = int(i_idx[k]), int(j_idx[k])
        events.append(MergeEvent(time=t, indices=(i, j)))
        state = state.merge(i, j)
    return state, math.inf


def simulate(
    c0: Configuration,
    kernel: InteractionKernel,
    policy,
    settings: IntegratorSettings,
    entropy_generator=None,
    stop_condition=None,
) -> Trajectory:
    """Integrate with the feedback policy recomputed every base step.

    The policy is any object with ``compute(Configuration) -> ControlVector``
    and an ``M`` budget attribute (see :mod:`decluster.controls`).  Runs to
    ``t_final`` or until a single agent remains (full consensus); an
    optional ``stop_condition(t, state) -> bool`` is checked at base-step
    boundaries for early termination.
    """
    if entropy_generator is None:
        entropy_generator = getattr(policy, "g", None)
    if entropy_generator is None:
        from .core import inverse_generator

        entropy_generator = inverse_generator()

    dt = settings.dt
    events: list = []
    times, configs, v_series, w_series, dmin_series, act_series = [], [], [], [], [], []

    def record(t: float, state: Configuration, active: Optional[int]):
        times.append(t)
        configs.append(state)
        v_series.append(variance(state))
        w_series.append(generalized_entropy(state, entropy_generator))
        dmin_series.append(min_pairwise_distance(state))
        act_series.append(-1 if active is None else int(active))

    state, dmin = _merge_pass(c0, settings.merge_tol, 0.0, events)
    budget_saturated = False
    step_index = 0
    t = 0.0
    h_floor = dt / (2.0**settings.max_halvings)

    while t < settings.t_final - 1e-12 * settings.t_final and state.n_effective > 1:
        if stop_condition is not None and stop_condition(t, state):
            break
        h_base = min(dt, settings.t_final - t)
        u = policy.compute(state)
        M = getattr(policy, "M", None)
        if (
            not budget_saturated
            and M is not None
            and u.norm_sum >= M * (1.0 - 1e-9)
        ):
            events.append(BudgetSaturationEvent(time=t))
            budget_saturated = True
        if step_index % settings.record_every == 0:
            record(t, state, u.active_index)

        remaining = h_base
        halved_here = False
        weights = state.multiplicities / state.n_original
        while remaining > 1e-15 * dt:
            t_now = t + (h_base - remaining)
            merged_before = len(events)
            state, dmin = _merge_pass(state, settings.merge_tol, t_now, events)
            if state.n_effective == 1:
                break
            if len(events) != merged_before:
                u = policy.compute(state)
                weights = state.multiplicities / state.n_original
            vels = _velocities(state.positions, weights, kernel) + u.vectors
            vmax = float(np.linalg.norm(vels, axis=1).max())
            h = remaining
            if vmax > settings.rhs_cap or dmin <= _NEAR_MERGE_FACTOR * settings.merge_tol:
                rate = _compression_rate(state.positions, vels)
                if rate * remaining > _COMPRESSION_FRACTION:
                    h = _COMPRESSION_FRACTION / rate
                    if h < h_floor:
                        raise StiffnessError(
                            f"sub-step {h:.3e} below dt/2^{settings.max_halvings} "
                            f"at t={t_now:.6g} (velocity {vmax:.3e})"
                        )
                    if not halved_here:
                        events.append(HalvingEvent(time=t_now))
                        halved_here = True
            new = _rk4(state.positions, weights, kernel, u.vectors, h)
            state = state.with_positions(new)
            remaining -= h

        step_index += 1
        t = step_index * dt if step_index * dt <= settings.t_final else settings.t_final

    state, dmin = _merge_pass(state, settings.merge_tol, t, events)
    final_active = None
    if state.n_effective > 1:
        final_active = policy.compute(state).active_index
    record(t, state, final_active)

    return Trajectory(
        times=np.array(times),
        configurations=configs,
        variance=np.array(v_series),
        entropy=np.array(w_series),
        min_dist=np.array(dmin_series),
        active_index=np.array(act_series, dtype=int),
        events=events,
    )

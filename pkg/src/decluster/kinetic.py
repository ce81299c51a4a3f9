"""Weighted-particle approximation of the controlled mean-field dynamics.

The agent density is carried by particles with probability weights; the
controlled transport moves each particle along the interaction field plus
a control field supported on a region of bounded volume.  Particle
(Lagrangian) transport keeps the measure structure exact, so an
equal-weight ensemble without control reproduces the microscopic system
term by term.  Colliding particles merge with summed weights, which is
how atom formation (blow-up) is represented.

Entropy diagnostics come in two flavours: the product-measure form counts
self-pairs, so it is -inf for any atomic ensemble (an atom is already a
cluster); the off-diagonal form drops self-pairs and is the finite series
reported along trajectories.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from .core import (
    ConfigError,
    EntropyGenerator,
    GeometryError,
    InteractionKernel,
    NEG_INF,
    StiffnessError,
)
from .dynamics import (
    _COMPRESSION_FRACTION,
    _NEAR_MERGE_FACTOR,
    _compression_rate,
    HalvingEvent,
    IntegratorSettings,
    MergeEvent,
    _velocities,
)


@dataclass(frozen=True)
class ParticleEnsemble:
    """Positions with nonnegative probability weights summing to one."""

    positions: np.ndarray  # (P, d)
    weights: np.ndarray  # (P,)

    def __init__(self, positions, weights=None):
        pos = np.asarray(positions, dtype=float)
        if pos.ndim == 1:
            pos = pos[:, None]
        if pos.ndim != 2 or pos.shape[0] < 1:
            raise ConfigError(f"positions must be (P, d), got shape {pos.shape}")
        if not np.all(np.isfinite(pos)):
            raise ConfigError("positions must be finite")
        if weights is None:
            w = np.full(pos.shape[0], 1.0 / pos.shape[0])
        else:
            w = np.asarray(weights, dtype=float)
        if w.shape != (pos.shape[0],) or np.any(w < 0):
            raise ConfigError("weights must be nonnegative, one per particle")
        if abs(w.sum() - 1.0) > 1e-12:
            raise ConfigError(f"weights must sum to 1, got {w.sum()!r}")
        pos = np.array(pos)
        pos.setflags(write=False)
        w = np.array(w)
        w.setflags(write=False)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "weights", w)

    @property
    def size(self) -> int:
        return self.positions.shape[0]

    @property
    def d(self) -> int:
        return self.positions.shape[1]

    def with_positions(self, positions) -> "ParticleEnsemble":
        return ParticleEnsemble(positions, self.weights)

    def merge(self, i: int, j: int) -> "ParticleEnsemble":
        i, j = min(i, j), max(i, j)
        pos = np.array(self.positions)
        w = np.array(self.weights)
        tot = w[i] + w[j]
        if tot > 0:
            pos[i] = (w[i] * pos[i] + w[j] * pos[j]) / tot
        w[i] = tot
        keep = [k for k in range(self.size) if k != j]
        return ParticleEnsemble(pos[keep], w[keep])

    def barycenter(self) -> np.ndarray:
        return self.weights @ self.positions


def unit_ball_volume(d: int) -> float:
    return math.pi ** (d / 2.0) / math.gamma(d / 2.0 + 1.0)


def ball_volume(d: int, r: float) -> float:
    return unit_ball_volume(d) * r**d


def ball_radius_for_volume(d: int, volume: float) -> float:
    return (volume / unit_ball_volume(d)) ** (1.0 / d)


@dataclass(frozen=True)
class ControlRegion:
    """Disjoint balls with total volume within the sparsity budget c."""

    balls: tuple  # of (center ndarray, radius float)
    volume_budget: float

    def __init__(self, balls, volume_budget):
        if not volume_budget > 0:
            raise GeometryError("volume budget must be > 0")
        norm_balls = []
        for center, radius in balls:
            center = np.asarray(center, dtype=float)
            if center.ndim != 1 or not radius > 0:
                raise GeometryError("each ball is (center vector, radius > 0)")
            norm_balls.append((center, float(radius)))
        d = norm_balls[0][0].shape[0] if norm_balls else 0
        total = sum(ball_volume(d, r) for _, r in norm_balls)
        if total > volume_budget * (1.0 + 1e-12):
            raise GeometryError(
                f"total ball volume {total} exceeds budget {volume_budget}"
            )
        for a in range(len(norm_balls)):
            for b in range(a + 1, len(norm_balls)):
                ca, ra = norm_balls[a]
                cb, rb = norm_balls[b]
                if np.linalg.norm(ca - cb) < ra + rb:
                    raise GeometryError("control balls must be disjoint")
        object.__setattr__(self, "balls", tuple(norm_balls))
        object.__setattr__(self, "volume_budget", float(volume_budget))

    def contains(self, points: np.ndarray) -> np.ndarray:
        """Boolean mask of points inside the union of balls."""
        points = np.asarray(points, dtype=float)
        mask = np.zeros(points.shape[0], dtype=bool)
        for center, radius in self.balls:
            mask |= np.linalg.norm(points - center, axis=1) <= radius
        return mask


@dataclass(frozen=True)
class KineticControl:
    """Region-supported control field with amplitude bound M.

    ``field(t, points)`` returns one vector per point with norm <= M; the
    control acts only where the region indicator is one.
    """

    region: ControlRegion
    field: Callable[[float, np.ndarray], np.ndarray]
    M: float
    center_index: Optional[int] = None  # particle the region was centred on

    def apply(self, t: float, points: np.ndarray) -> np.ndarray:
        values = np.asarray(self.field(t, points), dtype=float)
        out = np.zeros_like(points)
        mask = self.region.contains(points)
        if mask.any():
            out[mask] = values[mask]
        return out


# ---------------------------------------------------------------------------
# Functionals on ensembles
# ---------------------------------------------------------------------------


def _pair_matrix(e: ParticleEnsemble):
    diff = e.positions[:, None, :] - e.positions[None, :, :]
    dist = np.linalg.norm(diff, axis=2)
    wprod = e.weights[:, None] * e.weights[None, :]
    return dist, wprod


def kinetic_variance(e: ParticleEnsemble) -> float:
    """Double sum of weighted squared distances (zero iff a single atom)."""
    dist, wprod = _pair_matrix(e)
    return float(np.sum(wprod * dist**2))


def kinetic_entropy(e: ParticleEnsemble, g: EntropyGenerator) -> float:
    """Product-measure entropy including self-pairs: -inf for any ensemble
    with an atom of positive weight (every particle is one)."""
    if np.any(e.weights > 0):
        return NEG_INF
    return 0.0


def kinetic_entropy_offdiag(e: ParticleEnsemble, g: EntropyGenerator) -> float:
    """Entropy over distinct particle pairs; -inf if two coincide."""
    if e.size < 2:
        return 0.0
    dist, wprod = _pair_matrix(e)
    off = ~np.eye(e.size, dtype=bool)
    if np.any(dist[off] == 0.0):
        return NEG_INF
    d2 = np.where(off, dist, 1.0) ** 2
    vals = g.evaluate(d2)
    return float(np.sum(wprod[off] * vals[off]))


def concentration_mass(e: ParticleEnsemble, r: float, include_diagonal: bool = True) -> float:
    """Mass of particle pairs within distance r under the product measure."""
    if not r > 0:
        raise ConfigError("r must be > 0")
    dist, wprod = _pair_matrix(e)
    mask = dist <= r
    if not include_diagonal:
        mask &= ~np.eye(e.size, dtype=bool)
    return float(np.sum(wprod[mask]))


def support_radius(e: ParticleEnsemble) -> float:
    """Radius of the smallest barycenter-centred ball containing the support."""
    return float(np.linalg.norm(e.positions - e.barycenter(), axis=1).max())


def min_particle_distance(e: ParticleEnsemble) -> float:
    if e.size < 2:
        return math.inf
    dist, _ = _pair_matrix(e)
    off = ~np.eye(e.size, dtype=bool)
    return float(dist[off].min())


# ---------------------------------------------------------------------------
# Dynamics
# ---------------------------------------------------------------------------


def kinetic_rhs(
    e: ParticleEnsemble,
    kernel: InteractionKernel,
    control: Optional[KineticControl] = None,
    t: float = 0.0,
) -> np.ndarray:
    """Particle velocities: weighted attraction plus the region-masked field."""
    v = _velocities(e.positions, e.weights, kernel)
    if control is not None:
        v = v + control.apply(t, e.positions)
    return v


@dataclass
class KineticTrajectory:
    times: np.ndarray
    ensembles: list[ParticleEnsemble]
    variance: np.ndarray
    entropy: np.ndarray  # off-diagonal entropy series
    support_radius: np.ndarray
    min_dist: np.ndarray
    active_index: np.ndarray  # region centre particle per record, -1 when none
    events: list = field(default_factory=list)

    @property
    def merge_events(self) -> list[MergeEvent]:
        return [e for e in self.events if isinstance(e, MergeEvent)]

    @property
    def clustering_time(self) -> Optional[float]:
        merges = self.merge_events
        return merges[0].time if merges else None


ControlArg = Union[None, KineticControl, Callable[[ParticleEnsemble], KineticControl]]


def _merge_pass_kinetic(e: ParticleEnsemble, merge_tol: float, t: float, events: list):
    while e.size > 1:
        dmin = min_particle_distance(e)
        if dmin > merge_tol:
            return e, dmin
        dist, _ = _pair_matrix(e)
        np.fill_diagonal(dist, math.inf)
        i, j = np.unravel_index(int(np.argmin(dist)), dist.shape)
        i, j = int(min(i, j)), int(max(i, j))
        events.append(MergeEvent(time=t, indices=(i, j)))
        e = e.merge(i, j)
    return e, math.inf


def simulate_kinetic(
    e0: ParticleEnsemble,
    kernel: InteractionKernel,
    control: ControlArg,
    settings: IntegratorSettings,
    entropy_generator: Optional[EntropyGenerator] = None,
) -> KineticTrajectory:
    """RK4 particle transport with per-step control evaluation.

    ``control`` may be None, a fixed :class:`KineticControl`, or a feedback
    callable ``ensemble -> KineticControl`` recomputed every base step.
    Sub-stepping and particle merging mirror the microscopic integrator.
    """
    if entropy_generator is None:
        from .core import inverse_generator

        entropy_generator = inverse_generator()

    def current_control(e: ParticleEnsemble) -> Optional[KineticControl]:
        if control is None or isinstance(control, KineticControl):
            return control
        return control(e)

    dt = settings.dt
    events: list = []
    times, snaps, v_series, w_series, x_series, dmin_series, act_series = (
        [], [], [], [], [], [], [],
    )

    def record(t: float, e: ParticleEnsemble, k: Optional[KineticControl]):
        times.append(t)
        snaps.append(e)
        v_series.append(kinetic_variance(e))
        w_series.append(kinetic_entropy_offdiag(e, entropy_generator))
        x_series.append(support_radius(e))
        dmin_series.append(min_particle_distance(e))
        idx = k.center_index if (k is not None and k.center_index is not None) else None
        act_series.append(-1 if idx is None else int(idx))

    state, dmin = _merge_pass_kinetic(e0, settings.merge_tol, 0.0, events)
    step_index = 0
    t = 0.0
    h_floor = dt / (2.0**settings.max_halvings)

    while t < settings.t_final - 1e-12 * settings.t_final and state.size > 1:
        h_base = min(dt, settings.t_final - t)
        k = current_control(state)
        if step_index % settings.record_every == 0:
            record(t, state, k)

        remaining = h_base
        halved_here = False
        while remaining > 1e-15 * dt:
            t_now = t + (h_base - remaining)
            n_events = len(events)
            state, dmin = _merge_pass_kinetic(state, settings.merge_tol, t_now, events)
            if state.size == 1:
                break
            if len(events) != n_events:
                k = current_control(state)

            def f(pos):
                v = _velocities(pos, state.weights, kernel)
                if k is not None:
                    v = v + k.apply(t_now, pos)
                return v

            k1 = f(state.positions)
            vmax = float(np.linalg.norm(k1, axis=1).max())
            h = remaining
            if vmax > settings.rhs_cap or dmin <= _NEAR_MERGE_FACTOR * settings.merge_tol:
                rate = _compression_rate(state.positions, k1)
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
            k2 = f(state.positions + 0.5 * h * k1)
            k3 = f(state.positions + 0.5 * h * k2)
            k4 = f(state.positions + h * k3)
            new = state.positions + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            state = state.with_positions(new)
            remaining -= h

        step_index += 1
        t = step_index * dt if step_index * dt <= settings.t_final else settings.t_final

    state, dmin = _merge_pass_kinetic(state, settings.merge_tol, t, events)
    record(t, state, current_control(state) if state.size > 1 else None)

    return KineticTrajectory(
        times=np.array(times),
        ensembles=snaps,
        variance=np.array(v_series),
        entropy=np.array(w_series),
        support_radius=np.array(x_series),
        min_dist=np.array(dmin_series),
        active_index=np.array(act_series, dtype=int),
        events=events,
    )


# ---------------------------------------------------------------------------
# Controls
# ---------------------------------------------------------------------------


def confinement_control(
    centers,
    r: float,
    M: float,
    c: float,
    kernel: Optional[InteractionKernel] = None,
    mode: str = "safety",
) -> KineticControl:
    """Inward-pointing field of strength M on balls around the given centers.

    Checks the geometric budget (total ball volume within c, balls
    disjoint).  When a kernel is supplied, also checks the separation
    inequality of the requested ``mode``: for ``safety`` the attraction
    must stay below M at distances >= R - 2r; for ``collapse`` it must
    stay below M at all distances <= R (R the minimum, resp. twice the
    maximum, center separation).
    """
    centers = [np.asarray(x, dtype=float) for x in centers]
    if not centers:
        raise GeometryError("at least one center required")
    d = centers[0].shape[0]
    if len(centers) * ball_volume(d, r) > c * (1.0 + 1e-12):
        raise GeometryError("ball volumes exceed the control volume budget")
    region = ControlRegion([(x, r) for x in centers], volume_budget=c)

    if kernel is not None and len(centers) > 1:
        seps = [
            np.linalg.norm(a - b)
            for i, a in enumerate(centers)
            for b in centers[i + 1 :]
        ]
        if mode == "safety":
            R = min(seps)
            if R <= 2 * r:
                raise GeometryError("centers must be separated by more than 2r")
            probe = np.geomspace(R - 2 * r, max(seps) * 1e3, 256)
            if float(np.max(kernel.sa(probe))) >= M:
                raise GeometryError(
                    "attraction does not drop below M beyond R - 2r; "
                    "the confinement guarantee fails"
                )
        elif mode == "collapse":
            if min(seps) < 2 * r:
                raise GeometryError("centers must be separated by at least 2r")
            R = 2 * max(seps)
            probe = np.geomspace(1e-12, R, 256)
            if float(np.max(kernel.sa(probe))) >= M:
                raise GeometryError(
                    "attraction does not stay below M up to R; "
                    "the confinement guarantee fails"
                )
        else:
            raise GeometryError(f"unknown mode {mode!r}")

    center_arr = np.stack(centers)

    def field(t: float, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        dists = np.linalg.norm(pts[:, None, :] - center_arr[None, :, :], axis=2)
        nearest = np.argmin(dists, axis=1)
        offset = pts - center_arr[nearest]
        norms = np.linalg.norm(offset, axis=1)
        out = np.zeros_like(pts)
        inside = norms > 0
        out[inside] = -M * offset[inside] / norms[inside, None]
        return out

    return KineticControl(region=region, field=field, M=M)


def kinetic_control_uV(e: ParticleEnsemble, M: float, c: float) -> KineticControl:
    """Outward push from the barycenter on the highest-scoring ball."""
    R = e.positions - e.barycenter()
    r = ball_radius_for_volume(e.d, c)
    weighted = e.weights * np.linalg.norm(R, axis=1)
    dist, _ = _pair_matrix(e)
    captured = (dist <= r) @ weighted
    best = int(np.argmax(captured))
    region = ControlRegion([(e.positions[best], r)], volume_budget=c)
    xbar = e.barycenter()

    def field(t: float, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        offset = pts - xbar
        norms = np.linalg.norm(offset, axis=1)
        out = np.zeros_like(pts)
        ok = norms > 0
        out[ok] = M * offset[ok] / norms[ok, None]
        return out

    return KineticControl(region=region, field=field, M=M, center_index=best)


def kinetic_control_uW(
    e: ParticleEnsemble, g: EntropyGenerator, M: float, c: float
) -> KineticControl:
    """Entropy-gradient push on the highest-scoring ball."""
    r = ball_radius_for_volume(e.d, c)
    scores = _entropy_score_field(e, g, e.positions)
    weighted = e.weights * np.linalg.norm(scores, axis=1)
    dist, _ = _pair_matrix(e)
    captured = (dist <= r) @ weighted
    best = int(np.argmax(captured))
    region = ControlRegion([(e.positions[best], r)], volume_budget=c)

    def field(t: float, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        s = _entropy_score_field(e, g, pts)
        norms = np.linalg.norm(s, axis=1)
        out = np.zeros_like(pts)
        ok = norms > 0
        out[ok] = M * s[ok] / norms[ok, None]
        return out

    return KineticControl(region=region, field=field, M=M, center_index=best)


def _entropy_score_field(
    e: ParticleEnsemble, g: EntropyGenerator, points: np.ndarray
) -> np.ndarray:
    """S(x) = sum_q w_q g'(||x - x_q||^2)(x - x_q), skipping zero-distance terms."""
    pts = np.asarray(points, dtype=float)
    diff = pts[:, None, :] - e.positions[None, :, :]
    d2 = np.sum(diff**2, axis=2)
    nonzero = d2 > 0.0
    d2_safe = np.where(nonzero, d2, 1.0)
    coeff = g.derivative(d2_safe) * e.weights[None, :]
    coeff[~nonzero] = 0.0
    return np.einsum("ij,ijd->id", coeff, diff)

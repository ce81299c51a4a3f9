"""Sufficient-condition thresholds for the regime landscape.

The near-zero limit of s*a(s) decides between an inescapable black hole
around consensus and the possibility of collapse prevention; the
far-field limit decides between a safety region and a basin of attraction.
The thresholds below are sufficient regions, never sharp boundaries:
states in neither region are reported as horizon (unknown), since the
structure of that set is open.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .core import (
    Configuration,
    EntropyGenerator,
    InteractionKernel,
    NEG_INF,
    RegimeReport,
    ThresholdError,
    shifted_inverse_generator,
)
from .functionals import entropy_lower_bound, generalized_entropy, partial_entropy, variance


def classify_kernel(kernel: InteractionKernel) -> tuple[str, str]:
    """(near-zero regime, far-field regime) from the s*a(s) limits.

    Finite limits map to budget-conditional labels; the thresholds below
    resolve them against a concrete M.
    """
    near = {
        "infinite": "black_hole",
        "zero": "collapse_prevention",
        "finite": "black_hole_if_M_below_C",
    }[kernel.alpha0.kind]
    far = {
        "zero": "safety",
        "infinite": "basin",
        "finite": "safety_if_M_above_CN_basin_if_M_below_C",
    }[kernel.alpha_inf.kind]
    return near, far


def black_hole_threshold(
    kernel: InteractionKernel, M: float, n: int
) -> Optional[float]:
    """Variance level V* such that V(0) < V* forces consensus in finite time.

    V* = eps^2 / (2 N^2) with eps the largest radius on which the
    attraction s*a(s) stays at or above the budget M (above C when the
    near-zero limit is the finite constant C, requiring M < C).  None when
    the near-zero limit vanishes (no black hole).
    """
    if kernel.alpha0.kind == "zero":
        return None
    if kernel.alpha0.kind == "finite":
        C = kernel.alpha0.value
        if M >= C:
            return None
        level = C
    else:
        level = M
    if kernel.epsilon_of is None:
        raise ThresholdError(
            f"kernel {kernel.label()} lacks an analytic epsilon_of callback"
        )
    eps = kernel.epsilon_of(level)
    return eps * eps / (2.0 * n * n)


def safety_threshold(
    kernel: InteractionKernel, g: EntropyGenerator, M: float, n: int
) -> Optional[tuple[float, float]]:
    """(mu, entropy threshold): W_g(0) above the threshold guarantees the
    entropy control keeps the system declustered forever.

    mu is the distance beyond which per-neighbor attraction stays below
    the budget share M/N (below C in the finite-limit case, which needs
    M > C N); the threshold is the entropy floor that forces all initial
    pairwise distances past mu.
    """
    if kernel.alpha_inf.kind == "infinite":
        return None
    if kernel.alpha_inf.kind == "finite":
        C = kernel.alpha_inf.value
        if M <= C * n:
            return None
        level = C
    else:
        level = M / n
    if kernel.mu_of is None:
        raise ThresholdError(f"kernel {kernel.label()} lacks an analytic mu_of callback")
    mu = kernel.mu_of(level)
    pairs = n * (n - 1) // 2
    if mu == 0.0:
        threshold = NEG_INF
    else:
        threshold = (g.evaluate(mu * mu) + g.m * (pairs - 1)) / (2.0 * n * n)
    return mu, threshold


def basin_radius(kernel: InteractionKernel, M: float) -> Optional[float]:
    """Radius mu of the attracting set {min pairwise distance <= mu} that
    every trajectory enters in finite time, regardless of the control."""
    if kernel.alpha_inf.kind == "zero":
        return None
    if kernel.alpha_inf.kind == "finite":
        C = kernel.alpha_inf.value
        if M >= C:
            return None
        level = C
    else:
        level = M
    if kernel.basin_mu_of is None:
        raise ThresholdError(
            f"kernel {kernel.label()} lacks an analytic basin_mu_of callback"
        )
    return kernel.basin_mu_of(level)


@dataclass(frozen=True)
class CollapsePreventionParams:
    """Inputs of the clustering-prevention control and its guarantee.

    ``kappa_of(W0)`` maps the initial partial entropy to the pairwise
    distance floor the control maintains forever.
    """

    epsilon: float
    delta: float
    g_delta: EntropyGenerator
    n: int

    def kappa_of(self, w0_partial: float) -> float:
        if w0_partial == NEG_INF:
            return 0.0
        return entropy_lower_bound(w0_partial, self.g_delta, self.n)


def collapse_prevention_params(
    kernel: InteractionKernel, M: float, n: int
) -> Optional[CollapsePreventionParams]:
    """Danger radius delta and generator for the clustering-prevention
    control; None unless the attraction vanishes at zero.

    Uses eps = M/(2N) (any value strictly below M/N works; the midpoint is
    a fixed convention).
    """
    if kernel.alpha0.kind != "zero":
        return None
    eps = M / (2.0 * n)
    if kernel.delta_of is None:
        raise ThresholdError(f"kernel {kernel.label()} lacks an analytic delta_of callback")
    delta = kernel.delta_of(eps)
    if not (0 < delta < math.inf):
        raise ThresholdError(f"no usable danger radius for kernel {kernel.label()}")
    return CollapsePreventionParams(
        epsilon=eps, delta=delta, g_delta=shifted_inverse_generator(delta), n=n
    )


def extinction_time_bound(v0: float, M: float, n: int) -> float:
    """Upper bound sqrt(2 V0) N / M on the consensus time inside the black hole."""
    if v0 < 0:
        raise ValueError("v0 must be nonnegative")
    return math.sqrt(2.0 * v0) * n / M


def basin_entry_time_bound(v0: float, M: float, A: float, n: int) -> float:
    """Time bound for entering the basin, from dV/dt <= sqrt(2)(M - A) sqrt(V)/N
    outside {min distance <= basin_mu_of(A)}, for any chosen A > M.

    Conservative: bounds the time for V to reach zero, which cannot happen
    before the basin is entered.
    """
    if not A > M:
        raise ValueError("requires A > M")
    return math.sqrt(2.0 * v0) * n / (A - M)


def classify_state(
    c0: Configuration,
    kernel: InteractionKernel,
    g: EntropyGenerator,
    M: float,
) -> RegimeReport:
    """Evaluate every applicable threshold on the initial state.

    States in neither sufficient region are labeled ``horizon`` and never
    guessed either way.
    """
    n = c0.n_original
    cell = classify_kernel(kernel)
    v0 = variance(c0)
    w0 = generalized_entropy(c0, g)

    bh_thr = black_hole_threshold(kernel, M, n)
    bh = bh_thr is not None and v0 < bh_thr

    safety = safety_threshold(kernel, g, M, n)
    if safety is None:
        safety_mu, safety_thr, safe = None, None, False
    else:
        safety_mu, safety_thr = safety
        safe = w0 > safety_thr
    safety_eps = None if safety is None else (
        kernel.alpha_inf.value if kernel.alpha_inf.kind == "finite" else M / n
    )

    basin = basin_radius(kernel, M)

    collapse = collapse_prevention_params(kernel, M, n)
    if collapse is None:
        c_eps = c_delta = c_kappa = None
        applicable = False
    else:
        applicable = True
        c_eps, c_delta = collapse.epsilon, collapse.delta
        w0_partial, _ = partial_entropy(c0, collapse.g_delta, collapse.delta)
        c_kappa = collapse.kappa_of(w0_partial)

    if bh:
        label = "black_hole"
    elif safe:
        label = "safety"
    elif bh_thr is not None or safety is not None:
        label = "horizon"
    else:
        label = "basin" if basin is not None else "unclassified"

    return RegimeReport(
        kernel_cell=cell,
        black_hole_sufficient=bh,
        black_hole_threshold=bh_thr,
        safety_sufficient=safe,
        safety_epsilon=safety_eps,
        safety_mu=safety_mu,
        safety_entropy_threshold=safety_thr,
        basin_radius=basin,
        collapse_prevention_applicable=applicable,
        collapse_epsilon=c_eps,
        collapse_delta=c_delta,
        collapse_kappa=c_kappa,
        extinction_time_bound=extinction_time_bound(v0, M, n) if bh else None,
        label=label,
    )

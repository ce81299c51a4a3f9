"""Shared domain types for the declustering-control toolkit.

Everything here is a plain value object: agent configurations, interaction
kernels with their small/large-distance limit classification, entropy
generators, control vectors under the l1-l2 budget, and the regime report
filled in by :mod:`decluster.regimes`. No dynamics live in this module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np


# ---------------------------------------------------------------------------
# Errors
# ---------------------------------------------------------------------------


class ConfigError(ValueError):
    """Invalid configuration, scenario, or parameter set."""


class DomainError(ValueError):
    """Argument outside the mathematical domain of an operation."""


class ClusterError(ValueError):
    """Operation undefined because two agents coincide exactly."""


class StiffnessError(RuntimeError):
    """Step-size control exhausted without satisfying the velocity cap."""


class ThresholdError(RuntimeError):
    """A regime threshold could not be inverted for this kernel."""


class GeometryError(ValueError):
    """Control-region geometry violates its preconditions."""


class SchemaError(ValueError):
    """Structured input (scenario file, CSV) does not match its schema."""


#: Sentinel for entropy values on clustered configurations.  It is an
#: ordinary IEEE -inf, never NaN, so it compares smaller than every real.
NEG_INF = float("-inf")


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Configuration:
    """Microscopic state: current agent positions plus merge multiplicities.

    ``multiplicities[i]`` counts how many original agents were merged into
    current agent ``i`` (all ones before any merge).  ``n_original`` is the
    agent count the pairwise functionals normalize by; it never changes
    across merges.
    """

    positions: np.ndarray  # (n_effective, d)
    multiplicities: np.ndarray  # (n_effective,) positive ints

    def __init__(self, positions, multiplicities=None):
        pos = np.asarray(positions, dtype=float)
        if pos.ndim == 1:
            pos = pos[:, None]
        if pos.ndim != 2 or pos.shape[0] < 1 or pos.shape[1] < 1:
            raise ConfigError(f"positions must be (N, d) with N, d >= 1, got shape {pos.shape}")
        if not np.all(np.isfinite(pos)):
            raise ConfigError("positions must be finite")
        if multiplicities is None:
            mult = np.ones(pos.shape[0], dtype=np.int64)
        else:
            mult = np.asarray(multiplicities, dtype=np.int64)
        if mult.shape != (pos.shape[0],) or np.any(mult < 1):
            raise ConfigError("multiplicities must be positive ints, one per agent")
        object.__setattr__(self, "positions", _readonly(pos))
        object.__setattr__(self, "multiplicities", _readonly(mult))

    @property
    def n_effective(self) -> int:
        return self.positions.shape[0]

    @property
    def n_original(self) -> int:
        return int(self.multiplicities.sum())

    @property
    def d(self) -> int:
        return self.positions.shape[1]

    def with_positions(self, positions: np.ndarray) -> "Configuration":
        return Configuration(positions, self.multiplicities)

    def merge(self, i: int, j: int) -> "Configuration":
        """Merge agents ``i`` and ``j`` at their multiplicity-weighted mean."""
        if i == j:
            raise ConfigError("cannot merge an agent with itself")
        i, j = min(i, j), max(i, j)
        pos = np.array(self.positions)
        mult = np.array(self.multiplicities)
        mi, mj = mult[i], mult[j]
        pos[i] = (mi * pos[i] + mj * pos[j]) / (mi + mj)
        mult[i] = mi + mj
        keep = [k for k in range(self.n_effective) if k != j]
        return Configuration(pos[keep], mult[keep])


# ---------------------------------------------------------------------------
# Interaction kernels
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Limit:
    """Classification of lim s*a(s) at one end of the half-line."""

    kind: str  # "zero" | "finite" | "infinite"
    value: Optional[float] = None  # the limit C when kind == "finite"

    @staticmethod
    def zero() -> "Limit":
        return Limit("zero")

    @staticmethod
    def finite(value: float) -> "Limit":
        if not value > 0:
            raise ConfigError("finite limit classification requires C > 0")
        return Limit("finite", float(value))

    @staticmethod
    def infinite() -> "Limit":
        return Limit("infinite")


@dataclass(frozen=True)
class InteractionKernel:
    """Distance-dependent attraction strength a(s), with a(0) = 0.

    ``alpha0`` and ``alpha_inf`` classify lim s*a(s) at 0+ and +infinity;
    they drive the regime taxonomy.  The four optional callbacks give the
    analytic inversions of s*a(s) used by the regime thresholds:

    - ``epsilon_of(A)``: largest eps with s*a(s) >= A for all s <= eps
    - ``mu_of(eps)``: smallest mu with s*a(s) <= eps for all s >= mu
    - ``delta_of(eps)``: largest delta with s*a(s) <= eps for all s <= delta
    - ``basin_mu_of(A)``: smallest mu with s*a(s) >= A for all s >= mu

    s*a(s) need not be globally monotone, so these inversions stay
    family-specific; :func:`invert_sa_on_bracket` helps build them for
    custom kernels on a bracket where s*a(s) is monotone.
    """

    family: str
    params: tuple
    _evaluate: Callable[[np.ndarray], np.ndarray]
    alpha0: Limit
    alpha_inf: Limit
    epsilon_of: Optional[Callable[[float], float]] = None
    mu_of: Optional[Callable[[float], float]] = None
    delta_of: Optional[Callable[[float], float]] = None
    basin_mu_of: Optional[Callable[[float], float]] = None

    def evaluate(self, s):
        """a(s) for s >= 0, elementwise; a(0) = 0 by convention."""
        arr = np.atleast_1d(np.asarray(s, dtype=float))
        out = np.zeros_like(arr)
        pos = arr > 0
        if np.any(pos):
            out[pos] = self._evaluate(arr[pos])
        return float(out[0]) if np.ndim(s) == 0 else out

    def sa(self, s):
        """s * a(s), the quantity whose limits classify the kernel."""
        return np.asarray(s, dtype=float) * self.evaluate(s)

    def label(self) -> str:
        inner = ",".join(repr(p) for p in self.params)
        return f"{self.family}({inner})" if inner else self.family


def power_kernel(p: float) -> InteractionKernel:
    """a(s) = s**p.  Covers 1/s^2 (p=-2) and 1/sqrt(s) (p=-0.5)."""
    p = float(p)
    q = p + 1.0  # exponent of s*a(s)
    if q < 0:
        alpha0, alpha_inf = Limit.infinite(), Limit.zero()
        eps_of = lambda A: A ** (1.0 / q) if A > 0 else math.inf
        mu_of = lambda eps: eps ** (1.0 / q)
        delta_of = basin_of = None
    elif q > 0:
        alpha0, alpha_inf = Limit.zero(), Limit.infinite()
        eps_of = mu_of = None
        delta_of = lambda eps: eps ** (1.0 / q)
        basin_of = lambda A: A ** (1.0 / q) if A > 0 else 0.0
    else:
        alpha0 = alpha_inf = Limit.finite(1.0)
        eps_of = lambda A: math.inf if A <= 1.0 else 0.0
        mu_of = lambda eps: math.inf if eps < 1.0 else 0.0
        delta_of = lambda eps: math.inf if eps >= 1.0 else 0.0
        basin_of = lambda A: 0.0 if A <= 1.0 else math.inf
    return InteractionKernel(
        family="power",
        params=(p,),
        _evaluate=lambda s: s**p,
        alpha0=alpha0,
        alpha_inf=alpha_inf,
        epsilon_of=eps_of,
        mu_of=mu_of,
        delta_of=delta_of,
        basin_mu_of=basin_of,
    )


def constant_kernel(c: float) -> InteractionKernel:
    """a(s) = c for s > 0 (still a(0) = 0)."""
    if not c > 0:
        raise ConfigError("constant kernel requires c > 0")
    c = float(c)
    return InteractionKernel(
        family="constant",
        params=(c,),
        _evaluate=lambda s: np.full_like(s, c),
        alpha0=Limit.zero(),
        alpha_inf=Limit.infinite(),
        delta_of=lambda eps: eps / c,
        basin_mu_of=lambda A: A / c,
    )


def shifted_kernel() -> InteractionKernel:
    """a(s) = 1 + 1/s^2, singular at zero and bounded below by 1.

    s*a(s) = s + 1/s has minimum 2 at s = 1, so both limits are infinite
    and the lower-bound inversions have two-sided closed forms.
    """

    def eps_of(A: float) -> float:
        if A <= 2.0:
            return math.inf
        return (A - math.sqrt(A * A - 4.0)) / 2.0

    def basin_of(A: float) -> float:
        if A <= 2.0:
            return 0.0
        return (A + math.sqrt(A * A - 4.0)) / 2.0

    return InteractionKernel(
        family="shifted",
        params=(),
        _evaluate=lambda s: 1.0 + s**-2,
        alpha0=Limit.infinite(),
        alpha_inf=Limit.infinite(),
        epsilon_of=eps_of,
        basin_mu_of=basin_of,
    )


def step_kernel(r: float) -> InteractionKernel:
    """Bounded-confidence kernel: a(s) = 1 for s <= r, 0 beyond."""
    if not r > 0:
        raise ConfigError("step kernel requires r > 0")
    r = float(r)
    return InteractionKernel(
        family="step",
        params=(r,),
        _evaluate=lambda s: (s <= r).astype(float),
        alpha0=Limit.zero(),
        alpha_inf=Limit.zero(),
        mu_of=lambda eps: 0.0 if eps >= r else r,
        delta_of=lambda eps: math.inf if eps >= r else eps,
    )


def invert_sa_on_bracket(
    kernel: InteractionKernel,
    target: float,
    lo: float,
    hi: float,
    rtol: float = 1e-13,
) -> float:
    """Solve s*a(s) = target by bisection on [lo, hi].

    The caller must supply a bracket on which s*a(s) is monotone and
    crosses the target; raises :class:`ThresholdError` otherwise.
    """
    if not (0 < lo < hi):
        raise ThresholdError("bracket must satisfy 0 < lo < hi")
    f_lo = float(kernel.sa(lo)) - target
    f_hi = float(kernel.sa(hi)) - target
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if f_lo * f_hi > 0:
        raise ThresholdError(f"s*a(s) - {target} does not change sign on [{lo}, {hi}]")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        f_mid = float(kernel.sa(mid)) - target
        if f_mid == 0.0 or (hi - lo) <= rtol * mid:
            return mid
        if f_lo * f_mid < 0:
            hi = mid
        else:
            lo, f_lo = mid, f_mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# Entropy generators
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EntropyGenerator:
    """Strictly increasing g on (0, inf) with g(0+) = -inf and finite sup m.

    ``inverse`` is defined on (-inf, m).  Pairwise sums of g over squared
    distances define the declustering entropy.
    """

    name: str
    evaluate: Callable[[np.ndarray], np.ndarray]
    derivative: Callable[[np.ndarray], np.ndarray]
    inverse: Callable[[float], float]
    m: float  # supremum of g


def inverse_generator() -> EntropyGenerator:
    """g(s) = -1/s, the workhorse generator (m = 0)."""
    return EntropyGenerator(
        name="inverse",
        evaluate=lambda s: -1.0 / s,
        derivative=lambda s: s**-2,
        inverse=lambda y: -1.0 / y,
        m=0.0,
    )


def shifted_inverse_generator(delta: float) -> EntropyGenerator:
    """g(s) = 1/delta^2 - 1/s: positive sup m = 1/delta^2 and g(delta^2) = 0.

    This is the simplest generator meeting the extra requirements of the
    clustering-prevention control (m > 0 and a zero exactly at the danger
    radius squared).
    """
    if not delta > 0:
        raise ConfigError("shifted inverse generator requires delta > 0")
    delta = float(delta)
    m = delta**-2
    return EntropyGenerator(
        name=f"shifted_inverse({delta!r})",
        evaluate=lambda s: m - 1.0 / s,
        derivative=lambda s: s**-2,
        inverse=lambda y: 1.0 / (m - y),
        m=m,
    )


# ---------------------------------------------------------------------------
# Controls
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ControlBudget:
    """l1-l2 budget: admissible controls satisfy sum_i ||u_i|| <= M."""

    M: float

    def __post_init__(self):
        if not self.M > 0:
            raise ConfigError("control budget M must be > 0")


@dataclass(frozen=True)
class ControlVector:
    """Per-agent control vectors; ``active_index`` marks the single actuated
    agent for sparse policies (None when the control is identically zero)."""

    vectors: np.ndarray  # (n_effective, d)
    active_index: Optional[int] = None

    def __init__(self, vectors, active_index=None):
        v = np.asarray(vectors, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        object.__setattr__(self, "vectors", _readonly(v))
        object.__setattr__(
            self, "active_index", None if active_index is None else int(active_index)
        )

    @property
    def norm_sum(self) -> float:
        return float(np.linalg.norm(self.vectors, axis=1).sum())

    @staticmethod
    def zero(n: int, d: int) -> "ControlVector":
        return ControlVector(np.zeros((n, d)))


def validate_control(u: ControlVector, budget: float | ControlBudget) -> bool:
    """True iff the control satisfies its l1-l2 budget (1e-12 relative slack)."""
    M = budget.M if isinstance(budget, ControlBudget) else float(budget)
    return bool(u.norm_sum <= M * (1.0 + 1e-12))


# ---------------------------------------------------------------------------
# Regime report
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RegimeReport:
    """Where an (initial state, kernel, budget) triple sits in the regime
    landscape: sufficient-region membership plus the thresholds used."""

    kernel_cell: tuple[str, str]  # (near-zero regime, far-field regime)
    black_hole_sufficient: bool
    black_hole_threshold: Optional[float]
    safety_sufficient: bool
    safety_epsilon: Optional[float]
    safety_mu: Optional[float]
    safety_entropy_threshold: Optional[float]
    basin_radius: Optional[float]
    collapse_prevention_applicable: bool
    collapse_epsilon: Optional[float]
    collapse_delta: Optional[float]
    collapse_kappa: Optional[float]
    extinction_time_bound: Optional[float]
    label: str  # "black_hole" | "safety" | "horizon" | ...

    def to_dict(self) -> dict:
        def num(x):
            return None if x is None else float(x)

        return {
            "kernel_cell": list(self.kernel_cell),
            "black_hole_sufficient": self.black_hole_sufficient,
            "black_hole_threshold": num(self.black_hole_threshold),
            "safety_sufficient": self.safety_sufficient,
            "safety_epsilon": num(self.safety_epsilon),
            "safety_mu": num(self.safety_mu),
            "safety_entropy_threshold": num(self.safety_entropy_threshold),
            "basin_radius": num(self.basin_radius),
            "collapse_prevention_applicable": self.collapse_prevention_applicable,
            "collapse_epsilon": num(self.collapse_epsilon),
            "collapse_delta": num(self.collapse_delta),
            "collapse_kappa": num(self.collapse_kappa),
            "extinction_time_bound": num(self.extinction_time_bound),
            "label": self.label,
        }

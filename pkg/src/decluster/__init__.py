"""Declustering control of Hegselmann-Krause consensus dynamics.

Microscopic and kinetic simulators, entropy-type dispersion functionals,
sparse feedback controls, regime thresholds (black hole, safety region,
basin of attraction, collapse prevention), and a reproducible scenario
harness with a CLI.
"""

from .core import (
    ClusterError,
    Configuration,
    ConfigError,
    ControlBudget,
    ControlVector,
    DomainError,
    EntropyGenerator,
    GeometryError,
    InteractionKernel,
    Limit,
    NEG_INF,
    RegimeReport,
    SchemaError,
    StiffnessError,
    ThresholdError,
    constant_kernel,
    inverse_generator,
    invert_sa_on_bracket,
    power_kernel,
    shifted_inverse_generator,
    shifted_kernel,
    step_kernel,
    validate_control,
)
from .functionals import (
    entropy_lower_bound,
    generalized_entropy,
    log_entropy,
    min_pairwise_distance,
    partial_entropy,
    variance,
)
from .dynamics import (
    BudgetSaturationEvent,
    HalvingEvent,
    IntegratorSettings,
    MergeEvent,
    Trajectory,
    barycenter,
    hk_rhs,
    simulate,
    step,
)
from .controls import (
    ControlPolicy,
    control_udelta,
    control_uV,
    control_uW,
    entropy_derivative,
    random_feasible_control,
    variance_derivative,
    zero_policy,
)
from .regimes import (
    CollapsePreventionParams,
    basin_entry_time_bound,
    basin_radius,
    black_hole_threshold,
    classify_kernel,
    classify_state,
    collapse_prevention_params,
    extinction_time_bound,
    safety_threshold,
)
from .kinetic import (
    ControlRegion,
    KineticControl,
    KineticTrajectory,
    ParticleEnsemble,
    ball_radius_for_volume,
    ball_volume,
    concentration_mass,
    confinement_control,
    kinetic_control_uV,
    kinetic_control_uW,
    kinetic_entropy,
    kinetic_entropy_offdiag,
    kinetic_rhs,
    kinetic_variance,
    min_particle_distance,
    simulate_kinetic,
    support_radius,
)
from .bench import Scenario, preset_scenario, run, sweep

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"

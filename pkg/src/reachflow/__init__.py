"""Particle schemes for nonlocal-interaction dynamics on positive-reach sets."""

from .energy import (
    ParticleState,
    gradient_norm,
    interaction_energy,
    interaction_force,
    mean_squared_distance,
    penalized_energy,
    penalized_force,
)
from .dynamics import (
    CONVERGED,
    FIXED_TIME_REACHED,
    MAX_STEPS,
    EnergyRate,
    EpsilonFlow,
    FixedTime,
    GradNorm,
    PerturbedGrid,
    Projected,
    ProjectedPerturbedGrid,
    SchemeConfig,
    Trace,
    UniformBox,
    backtracking_linesearch,
    combined_error_bound,
    enclosure_radius,
    epsilon_step,
    local_error_bound,
    max_stable_tau,
    projected_step,
    run,
    sample_initial,
    stability_rate,
)
from .geometry import (
    BEAN_REACH,
    ClosedDisc,
    Domain,
    IntervalUnion,
    Polyline,
    RegionBoundedByPolyline,
    domain_from_spec,
    sample_bean_boundary,
    sample_circle_boundary,
)
from .potentials import InverseQuadratic, Potential, Quadratic, potential_from_spec
from .wasserstein import w2_1d, w2_assignment, w2_bruteforce

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"

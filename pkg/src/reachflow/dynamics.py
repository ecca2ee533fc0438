"""Forward-Euler particle schemes on positive-reach domains.

Two schemes are provided. The confinement flow integrates the penalized
energy in free space,

    x_i <- x_i - tau * (F_int,i + (2/eps) * (x_i - proj(x_i))),

and the propagate-then-project splitting takes a free interaction step and
projects every particle back onto the domain,

    y_i = x_i - tau * F_int,i;   x_i <- proj(y_i).

For finite-reach domains the splitting step size is restricted to
reach / (8 * sup|grad W|) over an enclosure ball, which keeps the free step
inside the uniqueness tube. The initial step size may be chosen by a
backtracking linesearch and is then held constant for the whole run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .energy import (
    ParticleState,
    interaction_energy_and_force,
    interaction_force,
    penalized_force,
)
from .errors import EmptySample, LinesearchFailed, NonFiniteState, OutsideReachTube
from .geometry import ON_DOMAIN_TOL

# Trace termination tags.
CONVERGED = "converged"
MAX_STEPS = "max_steps"
FIXED_TIME_REACHED = "fixed_time_reached"

_TIME_SLACK = 1e-12
_ARMIJO_C = 1e-4
_MAX_HALVINGS = 60


@dataclass(frozen=True)
class EpsilonFlow:
    """Confinement scheme with penalty strength 1/eps."""

    eps: float

    def __post_init__(self):
        if not (self.eps > 0):
            raise ValueError("eps must be positive")


@dataclass(frozen=True)
class Projected:
    """Propagate-then-project scheme.

    ``eps`` is optional and only changes the energy monitored by the
    energy-rate stopping rule to the penalized one (the penalty vanishes on
    the domain, so on-domain trajectories report the same values).
    """

    eps: Optional[float] = None

    def __post_init__(self):
        if self.eps is not None and not (self.eps > 0):
            raise ValueError("eps must be positive when given")


Scheme = Union[EpsilonFlow, Projected]


@dataclass(frozen=True)
class GradNorm:
    pass


@dataclass(frozen=True)
class EnergyRate:
    pass


@dataclass(frozen=True)
class FixedTime:
    T: float

    def __post_init__(self):
        if not (self.T > 0):
            raise ValueError("final time must be positive")


Stopping = Union[GradNorm, EnergyRate, FixedTime]


@dataclass(frozen=True)
class SchemeConfig:
    """Everything the runner needs besides the domain, kernel and particles.

    ``tau=None`` requests the backtracking linesearch; an explicit splitting
    step on a finite-reach domain must respect the reach/(8*M_v) restriction.
    """

    scheme: Scheme
    tau: Optional[float]
    tol: float
    stopping: Stopping
    max_steps: int = 100_000
    snapshot_every: int = 1000
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if self.tau is not None and not (self.tau > 0):
            raise ValueError("tau must be positive or None (auto)")
        if not (self.tol > 0):
            raise ValueError("tol must be positive")
        if self.max_steps < 1 or self.snapshot_every < 1:
            raise ValueError("max_steps and snapshot_every must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass
class Trace:
    """Per-step records (step, time, energy, grad_norm, mean_sq_dist)."""

    records: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)
    termination: str = ""
    tau: float = float("nan")

    @property
    def final_energy(self) -> float:
        return self.records[-1][2]

    @property
    def final_mean_sq_dist(self) -> float:
        return self.records[-1][4]


def enclosure_radius(domain, r=None) -> float:
    """Radius R with (tube - tube) inside B_R, tube width capped at the reach.

    For infinite-reach (convex) domains the cap falls back to half the
    diameter, which encloses every configuration the schemes produce there.
    """
    cap = domain.reach if r is None else min(domain.reach, r)
    if math.isinf(cap):
        cap = domain.diameter / 2.0
    return 2.0 * (domain.diameter / 2.0 + cap)


def max_stable_tau(domain, potential, r=None) -> float:
    """Step-size restriction reach / (8 * sup|grad W|) for the splitting scheme.

    Infinite for convex domains, where the projection is globally unique and
    the linesearch alone bounds the step.
    """
    if math.isinf(domain.reach):
        return math.inf
    m_v = potential.grad_bound(enclosure_radius(domain, r))
    return domain.reach / (8.0 * m_v)


def local_error_bound(domain, potential, t, r=None) -> float:
    """One-interval splitting error bound 2*H*M_v*t^2*exp(6*M_v*t/reach)."""
    radius = enclosure_radius(domain, r)
    m_v = potential.grad_bound(radius)
    hess = potential.hessian_bound(radius)
    growth = 0.0 if math.isinf(domain.reach) else 6.0 * m_v * t / domain.reach
    return 2.0 * hess * m_v * t * t * math.exp(growth)


def stability_rate(domain, potential, r=None) -> float:
    """Exponential rate -lambda_W + M_v / reach of the flow stability bound."""
    radius = enclosure_radius(domain, r)
    lam = potential.semiconvexity(radius)
    m_v = potential.grad_bound(radius)
    drift = 0.0 if math.isinf(domain.reach) else m_v / domain.reach
    return -lam + drift


def combined_error_bound(domain, potential, tau, T, r=None) -> float:
    """Global splitting-error bound at time T for step size tau.

    Accumulates the local bound through the stability estimate:
    tau * exp(6*M_v*tau/reach) * 2*H*M_v * (exp(kappa*T) - 1) / kappa.
    """
    radius = enclosure_radius(domain, r)
    m_v = potential.grad_bound(radius)
    hess = potential.hessian_bound(radius)
    kappa = stability_rate(domain, potential, r)
    if kappa > 0:
        alpha = 2.0 * hess * m_v * (math.exp(kappa * T) - 1.0) / kappa
    else:
        alpha = 2.0 * hess * m_v * T
    growth = 0.0 if math.isinf(domain.reach) else 6.0 * m_v * tau / domain.reach
    return tau * math.exp(growth) * alpha


def _check_finite(positions):
    if not np.isfinite(positions).all():
        raise NonFiniteState("non-finite particle coordinate (step size too large?)")


def epsilon_step(state, potential, domain, tau, eps, workers=1, force=None):
    """One forward-Euler step of the confinement flow."""
    if not (tau > 0):
        raise ValueError("tau must be positive")
    if force is None:
        force = penalized_force(state, potential, domain, eps, workers)
    new_pos = state.positions - tau * force
    _check_finite(new_pos)
    return ParticleState(new_pos, time=state.time + tau, step_index=state.step_index + 1)


def projected_step(state, potential, domain, tau, workers=1, force=None):
    """One free interaction step followed by closest-point projection."""
    if not (tau > 0):
        raise ValueError("tau must be positive")
    if force is None:
        force = interaction_force(state, potential, workers)
    free = state.positions - tau * force
    _check_finite(free)
    new_pos = domain.project(free)
    return ParticleState(new_pos, time=state.time + tau, step_index=state.step_index + 1)


class _SchemeOps:
    """Energy / force / step plumbing for one configured scheme.

    ``evaluate`` returns (energy, force, mean_sq_dist) from a single pairwise
    pass and a single geometry pass per state, which is what the run loop and
    the linesearch consume.
    """

    def __init__(self, scheme, domain, potential, workers):
        self.scheme = scheme
        self.domain = domain
        self.potential = potential
        self.workers = workers

    def evaluate(self, state):
        e_int, f_int = interaction_energy_and_force(state, self.potential, self.workers)
        eps = self.scheme.eps
        if isinstance(self.scheme, EpsilonFlow):
            proj = self.domain.project(state.positions)
            delta = state.positions - proj
            d2 = np.einsum("ij,ij->i", delta, delta)
            energy = e_int + float(d2.sum()) / (state.n * eps)
            force = f_int + (2.0 / eps) * delta
            return energy, force, float(d2.mean())
        d = self.domain.distance(state.positions)
        d2 = d * d
        energy = e_int if eps is None else e_int + float(d2.sum()) / (state.n * eps)
        return energy, f_int, float(d2.mean())

    def step(self, state, tau, force=None) -> ParticleState:
        if isinstance(self.scheme, EpsilonFlow):
            return epsilon_step(state, self.potential, self.domain, tau,
                                self.scheme.eps, self.workers, force=force)
        return projected_step(state, self.potential, self.domain, tau,
                              self.workers, force=force)


def backtracking_linesearch(state, potential, domain, config) -> float:
    """Pick the initial step size by halving until one trial step decreases
    the configured energy by at least 1e-4 * tau * N * |grad E|^2.

    Returns min(1, max_stable_tau) immediately when the gradient is already
    below the configured tolerance (nothing to decrease).
    """
    ops = _SchemeOps(config.scheme, domain, potential, config.workers)
    tau0 = min(1.0, max_stable_tau(domain, potential))
    e0, force, _ = ops.evaluate(state)
    gnorm = float(np.linalg.norm(force) / state.n)
    if gnorm < config.tol or gnorm == 0.0:
        return tau0
    required_slope = _ARMIJO_C * gnorm * gnorm * state.n
    tau = tau0
    for _ in range(_MAX_HALVINGS + 1):
        try:
            trial = ops.step(state, tau, force=force)
            e1, _, _ = ops.evaluate(trial)
            if e0 - e1 >= required_slope * tau:
                return tau
        except (OutsideReachTube, NonFiniteState):
            pass  # treat as rejection and keep halving
        tau /= 2.0
    raise LinesearchFailed(f"no energy decrease after {_MAX_HALVINGS} halvings")


def resolve_tau(config, domain, potential, initial) -> float:
    """Resolve Auto via linesearch and enforce the splitting-step restriction."""
    if config.tau is not None:
        tau = config.tau
    else:
        tau = backtracking_linesearch(initial, potential, domain, config)
    if isinstance(config.scheme, Projected) and not math.isinf(domain.reach):
        cap = max_stable_tau(domain, potential)
        if tau > cap * (1.0 + 1e-12):
            raise ValueError(
                f"tau={tau:.6g} exceeds the splitting restriction {cap:.6g} "
                "for this finite-reach domain"
            )
    return tau


def run(config: SchemeConfig, domain, potential, initial: ParticleState) -> Trace:
    """Iterate the configured scheme until its stopping rule fires.

    Step-level failures (non-finite states, ambiguous projections) terminate
    the run and are recorded in the trace's termination tag. A record row is
    appended for the initial state and after every step; snapshots are stored
    at step 0, every ``snapshot_every`` steps, and at the final state.
    """
    if initial.dim != domain.dim:
        raise ValueError(f"initial state dim {initial.dim} != domain dim {domain.dim}")
    ops = _SchemeOps(config.scheme, domain, potential, config.workers)
    tau = resolve_tau(config, domain, potential, initial)
    trace = Trace(tau=tau)

    state = initial
    energy, force, msd = ops.evaluate(state)

    def record(st, en, fo, ms):
        g = float(np.linalg.norm(fo) / st.n)
        trace.records.append((st.step_index, st.time, en, g, ms))
        return g

    gnorm = record(state, energy, force, msd)
    trace.snapshots.append((state.time, state.positions.copy()))

    def fired(gn, e_new, e_prev, t):
        if isinstance(config.stopping, GradNorm):
            return CONVERGED if gn < config.tol else None
        if isinstance(config.stopping, EnergyRate):
            if e_prev is None:
                return None
            return CONVERGED if abs(e_new - e_prev) / tau < config.tol else None
        return FIXED_TIME_REACHED if t >= config.stopping.T - _TIME_SLACK else None

    termination = fired(gnorm, energy, None, state.time)
    if termination is None:
        termination = MAX_STEPS
        for _ in range(config.max_steps):
            try:
                state = ops.step(state, tau, force=force)
                prev_energy = energy
                energy, force, msd = ops.evaluate(state)
            except (NonFiniteState, OutsideReachTube) as err:
                termination = f"failed: {type(err).__name__}"
                break
            gnorm = record(state, energy, force, msd)
            if state.step_index % config.snapshot_every == 0:
                trace.snapshots.append((state.time, state.positions.copy()))
            outcome = fired(gnorm, energy, prev_energy, state.time)
            if outcome is not None:
                termination = outcome
                break

    if not trace.snapshots or trace.snapshots[-1][0] != state.time:
        trace.snapshots.append((state.time, state.positions.copy()))
    trace.termination = termination
    return trace


@dataclass(frozen=True)
class UniformBox:
    """n independent uniform samples from an axis-aligned box."""

    bounds: tuple
    n: int


@dataclass(frozen=True)
class PerturbedGrid:
    """Uniform rectangular grid plus iid uniform jitter, then an
    inside-the-domain filter (points off the set are dropped)."""

    shape: tuple
    bounds: tuple
    jitter: float


@dataclass(frozen=True)
class ProjectedPerturbedGrid:
    """Perturbed grid whose points are all projected onto the domain."""

    shape: tuple
    bounds: tuple
    jitter: float


def _grid_points(shape, bounds):
    axes = [np.linspace(lo, hi, k) for k, (lo, hi) in zip(shape, bounds)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.column_stack([m.ravel() for m in mesh])


def sample_initial(sampler, domain, seed) -> ParticleState:
    """Draw a reproducible initial particle configuration."""
    rng = np.random.default_rng(seed)
    if isinstance(sampler, UniformBox):
        bounds = np.asarray(sampler.bounds, dtype=float)
        pos = rng.uniform(bounds[:, 0], bounds[:, 1], size=(sampler.n, len(bounds)))
        return ParticleState(pos)
    if isinstance(sampler, (PerturbedGrid, ProjectedPerturbedGrid)):
        pts = _grid_points(sampler.shape, sampler.bounds)
        if sampler.jitter > 0:
            pts = pts + rng.uniform(-sampler.jitter, sampler.jitter, size=pts.shape)
        if isinstance(sampler, ProjectedPerturbedGrid):
            return ParticleState(domain.closest_point(pts))
        keep = domain.distance(pts) <= ON_DOMAIN_TOL
        if not np.any(keep):
            raise EmptySample("inside-domain filter removed every grid point")
        return ParticleState(pts[keep])
    raise TypeError(f"unknown sampler {type(sampler).__name__}")

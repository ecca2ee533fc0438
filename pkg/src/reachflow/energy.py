"""Discrete energies on particle configurations and their gradients.

A configuration of N equal-mass particles carries the empirical measure with
weight 1/N per particle. The interaction energy is the full double sum

    E_N = (1 / 2N^2) * sum_i sum_j W(x_i - x_j),

including the i = j self term (a constant offset W(0)/(2N)); the penalized
energy adds (1 / (N*eps)) * sum_i dist(x_i)^2. Forces are the particle
velocities of the schemes, F_i = N * grad_i E; the self term is skipped there
because it vanishes analytically. Summation runs over j within each row, then
over rows, and is bitwise reproducible for any worker count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class ParticleState:
    """Positions of shape (N, d) plus the simulation clock."""

    positions: np.ndarray
    time: float = 0.0
    step_index: int = 0

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float)
        if pos.ndim != 2 or pos.shape[0] < 1 or pos.shape[1] not in (1, 2):
            raise ValueError(f"positions must have shape (N, 1|2), got {pos.shape}")
        object.__setattr__(self, "positions", pos)

    @property
    def n(self) -> int:
        return self.positions.shape[0]

    @property
    def dim(self) -> int:
        return self.positions.shape[1]

    def is_finite(self) -> bool:
        return bool(np.isfinite(self.positions).all())


def interaction_energy(state: ParticleState, potential) -> float:
    x = state.positions
    n = state.n
    diffs = x[:, None, :] - x[None, :, :]
    vals = potential.value(diffs)
    return float(vals.sum(axis=1).sum() / (2.0 * n * n))


def penalized_energy(state: ParticleState, potential, domain, eps: float) -> float:
    if not (eps > 0):
        raise ValueError("eps must be positive")
    d = domain.distance(state.positions)
    return interaction_energy(state, potential) + float(np.sum(d * d)) / (state.n * eps)


def _force_rows(x, potential, i0, i1):
    diffs = x[i0:i1, None, :] - x[None, :, :]
    g = potential.gradient(diffs)
    rows = np.arange(i0, i1)
    g[rows - i0, rows, :] = 0.0  # self interaction: analytically zero
    return g.sum(axis=1) / len(x)


def _pair_rows(x, potential, i0, i1):
    diffs = x[i0:i1, None, :] - x[None, :, :]
    vals, g = potential.value_and_gradient(diffs)
    rows = np.arange(i0, i1)
    g[rows - i0, rows, :] = 0.0
    return vals.sum(axis=1), g.sum(axis=1) / len(x)


def interaction_energy_and_force(state: ParticleState, potential, workers: int = 1):
    """(E_N, forces) sharing one pairwise pass; same chunking rules as
    interaction_force, so results do not depend on the worker count."""
    x = state.positions
    n = state.n
    if workers <= 1 or n < 2 * workers:
        row_sums, force = _pair_rows(x, potential, 0, n)
    else:
        bounds = np.linspace(0, n, workers + 1).astype(int)
        row_sums = np.empty(n)
        force = np.empty_like(x)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [
                (i0, i1, pool.submit(_pair_rows, x, potential, int(i0), int(i1)))
                for i0, i1 in zip(bounds[:-1], bounds[1:])
            ]
            for i0, i1, fut in futures:
                row_sums[i0:i1], force[i0:i1] = fut.result()
    return float(row_sums.sum() / (2.0 * n * n)), force


def interaction_force(state: ParticleState, potential, workers: int = 1) -> np.ndarray:
    """F_i = (1/N) * sum_{j != i} grad W(x_i - x_j), shape (N, d).

    Rows may be computed by several threads; each row's inner sum is taken in
    the same fixed order regardless, so results are bitwise identical for any
    worker count.
    """
    x = state.positions
    n = state.n
    if workers <= 1 or n < 2 * workers:
        return _force_rows(x, potential, 0, n)
    bounds = np.linspace(0, n, workers + 1).astype(int)
    out = np.empty_like(x)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [
            (i0, i1, pool.submit(_force_rows, x, potential, int(i0), int(i1)))
            for i0, i1 in zip(bounds[:-1], bounds[1:])
        ]
        for i0, i1, fut in futures:
            out[i0:i1] = fut.result()
    return out


def penalized_force(state: ParticleState, potential, domain, eps: float,
                    workers: int = 1) -> np.ndarray:
    """Interaction force plus the confinement push (2/eps) * (x - proj(x))."""
    if not (eps > 0):
        raise ValueError("eps must be positive")
    proj = domain.project(state.positions)
    return interaction_force(state, potential, workers) + (2.0 / eps) * (
        state.positions - proj
    )


def gradient_norm(state: ParticleState, potential, domain=None, eps=None,
                  workers: int = 1) -> float:
    """Euclidean norm of the stacked gradient (grad_1 E, ..., grad_N E).

    With eps given this is the penalized energy's gradient, otherwise the
    bare interaction energy's. Forces equal N * grad_i E, hence the 1/N.
    """
    if eps is None:
        f = interaction_force(state, potential, workers)
    else:
        f = penalized_force(state, potential, domain, eps, workers)
    return float(np.linalg.norm(f) / state.n)


def mean_squared_distance(state: ParticleState, domain) -> float:
    """(1/N) * sum_i dist(x_i)^2 -- the penalty moment of the configuration."""
    d = domain.distance(state.positions)
    return float(np.mean(d * d))

"""Parameter sweeps with order-of-accuracy reports, and canned experiments.

The confinement sweep measures how fast the terminal penalty moment
(1/N) * sum dist(x_i)^2 shrinks with the penalty parameter; the step-size
sweep measures the Wasserstein error of the splitting scheme against a
reference trajectory with a much finer step, reporting observed convergence
orders between consecutive step sizes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .dynamics import (
    CONVERGED,
    FIXED_TIME_REACHED,
    EpsilonFlow,
    FixedTime,
    GradNorm,
    Projected,
    run,
    sample_initial,
)
from .energy import interaction_energy, ParticleState
from .errors import InvalidSweep, ReachflowError, UnknownFigure
from .scenarios import builtin_scenario, sampler_from_spec
from .wasserstein import w2_assignment

_INDETERMINATE_ERROR = 1e-14


@dataclass
class SweepRow:
    control: float
    metric: Optional[float]
    w2_error: Optional[float]
    status: str


@dataclass
class SweepReport:
    kind: str
    rows: list
    slope: Optional[float] = None
    residual: Optional[float] = None
    orders: Optional[list] = None


def _require_decreasing(values, what):
    if len(values) < 3:
        raise InvalidSweep(f"need at least 3 {what} values for a slope fit")
    if any(b >= a for a, b in zip(values, values[1:])):
        raise InvalidSweep(f"{what} values must be strictly decreasing")


def _loglog_fit(xs, ys):
    coeffs, residuals, *_ = np.polyfit(np.log(xs), np.log(ys), 1, full=True)
    residual = float(residuals[0]) if len(residuals) else 0.0
    return float(coeffs[0]), residual


def sweep_eps(scenario, eps_values) -> SweepReport:
    """Run the confinement flow to gradient-norm convergence for each eps and
    fit the log-log slope of the terminal penalty moment."""
    eps_values = [float(e) for e in eps_values]
    _require_decreasing(eps_values, "eps")
    domain, potential, config, initial = scenario.build()
    if not isinstance(config.scheme, EpsilonFlow):
        raise InvalidSweep("eps sweep requires the epsilon_flow scheme")
    rows = []
    for eps in eps_values:
        cfg = replace(config, scheme=EpsilonFlow(eps=eps), stopping=GradNorm())
        try:
            trace = run(cfg, domain, potential, initial)
        except ReachflowError as err:
            rows.append(SweepRow(eps, None, None, f"failed: {type(err).__name__}"))
            continue
        metric = trace.final_mean_sq_dist
        status = trace.termination
        if status != CONVERGED:
            rows.append(SweepRow(eps, metric, None, status))
        elif metric <= 0.0:
            rows.append(SweepRow(eps, metric, None, "zero_metric"))
        else:
            rows.append(SweepRow(eps, metric, None, CONVERGED))
    good = [(r.control, r.metric) for r in rows if r.status == CONVERGED]
    slope = residual = None
    if len(good) >= 3:
        slope, residual = _loglog_fit([g[0] for g in good], [g[1] for g in good])
    return SweepReport(kind="eps", rows=rows, slope=slope, residual=residual)


def sweep_tau(scenario, tau_values, ref_tau) -> SweepReport:
    """Run the splitting scheme at several step sizes against a common
    reference and report Wasserstein errors and observed orders."""
    tau_values = [float(t) for t in tau_values]
    ref_tau = float(ref_tau)
    _require_decreasing(tau_values, "tau")
    if any(abs(t - ref_tau) <= 1e-15 for t in tau_values):
        raise InvalidSweep("reference tau must not appear in the tau list")
    if ref_tau > min(tau_values) / 8.0 + 1e-15:
        raise InvalidSweep("reference tau must be at most min(taus)/8")
    domain, potential, config, initial = scenario.build()
    if not isinstance(config.scheme, Projected):
        raise InvalidSweep("tau sweep requires the projected scheme")
    if not isinstance(config.stopping, FixedTime):
        raise InvalidSweep("tau sweep requires fixed_time stopping")
    horizon = config.stopping.T
    for t in tau_values + [ref_tau]:
        steps = horizon / t
        if abs(steps - round(steps)) > 1e-9 * max(1.0, steps):
            raise InvalidSweep(f"tau={t} does not divide the final time {horizon}")

    def final_positions(tau):
        trace = run(replace(config, tau=tau), domain, potential, initial)
        if trace.termination != FIXED_TIME_REACHED:
            raise InvalidSweep(f"run at tau={tau} ended with {trace.termination!r}")
        return trace.snapshots[-1][1]

    ref_final = final_positions(ref_tau)
    rows = []
    for tau in tau_values:
        try:
            final = final_positions(tau)
        except ReachflowError as err:
            rows.append(SweepRow(tau, None, None, f"failed: {type(err).__name__}"))
            continue
        err_w2 = w2_assignment(final, ref_final)
        energy = interaction_energy(ParticleState(final, time=horizon), potential)
        rows.append(SweepRow(tau, energy, err_w2, FIXED_TIME_REACHED))
    orders = []
    for a, b in zip(rows, rows[1:]):
        if (
            a.w2_error is None or b.w2_error is None
            or a.w2_error < _INDETERMINATE_ERROR or b.w2_error < _INDETERMINATE_ERROR
        ):
            orders.append(None)
        else:
            orders.append(
                float(np.log(a.w2_error / b.w2_error) / np.log(a.control / b.control))
            )
    good = [(r.control, r.w2_error) for r in rows
            if r.w2_error is not None and r.w2_error >= _INDETERMINATE_ERROR]
    slope = residual = None
    if len(good) >= 3:
        slope, residual = _loglog_fit([g[0] for g in good], [g[1] for g in good])
    return SweepReport(kind="tau", rows=rows, slope=slope, residual=residual,
                       orders=orders)


def cluster_count(points, gap=0.1) -> int:
    """Number of single-linkage clusters at the given distance threshold."""
    pts = np.asarray(points, dtype=float)
    n = len(pts)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    d2 = np.sum((pts[:, None, :] - pts[None, :, :]) ** 2, axis=-1)
    close = d2 <= gap * gap
    for i in range(n):
        for j in range(i + 1, n):
            if close[i, j]:
                parent[find(i)] = find(j)
    return len({find(i) for i in range(n)})


def _clusters_1d(xs, gap=0.1):
    """Sorted 1D cluster summaries [(center, count), ...]."""
    xs = np.sort(np.asarray(xs, dtype=float).ravel())
    groups = [[xs[0]]]
    for v in xs[1:]:
        if v - groups[-1][-1] > gap:
            groups.append([])
        groups[-1].append(v)
    return [(float(np.mean(g)), len(g)) for g in groups]


def reproduce(figure_id, seeds=None):
    """Run a canned experiment and summarize it.

    Returns (summary dict, traces dict name -> Trace). fig4 runs two seeds to
    exhibit distinct local minimizers; the others run one.
    """
    known = {"fig2", "fig3", "fig4", "fig5"}
    if figure_id not in known:
        raise UnknownFigure(f"unknown figure {figure_id!r} (choose from {sorted(known)})")

    if figure_id == "fig2":
        scenario = builtin_scenario("fig2", seed=None if seeds is None else seeds[0])
        domain, potential, config, initial = scenario.build()
        trace = run(config, domain, potential, initial)
        final = trace.snapshots[-1][1]
        summary = {
            "figure": "fig2",
            "seed": config.seed,
            "termination": trace.termination,
            "steps": trace.records[-1][0],
            "tau": trace.tau,
            "final_energy": trace.final_energy,
            "penalty_moment": trace.final_mean_sq_dist,
            "clusters": _clusters_1d(final[:, 0]),
        }
        return summary, {"fig2": trace}

    if figure_id == "fig3":
        scenario = builtin_scenario("fig3", seed=None if seeds is None else seeds[0])
        domain, potential, config, initial = scenario.build()
        trace = run(config, domain, potential, initial)
        final = trace.snapshots[-1][1]
        radii = np.linalg.norm(final - np.asarray(domain.center), axis=1)
        on_boundary = radii >= domain.radius - 1e-6
        angles = np.sort(np.arctan2(final[on_boundary, 1], final[on_boundary, 0]))
        k = len(angles)
        if k >= 2:
            gaps = np.diff(np.append(angles, angles[0] + 2 * np.pi))
            mean_gap = 2 * np.pi / k
            discrepancy = float(np.abs(gaps - mean_gap).max() / mean_gap)
        else:
            discrepancy = float("nan")
        summary = {
            "figure": "fig3",
            "seed": config.seed,
            "termination": trace.termination,
            "tau": trace.tau,
            "final_energy": trace.final_energy,
            "boundary_count": int(k),
            "interior_count": int(len(final) - k),
            "gap_discrepancy": discrepancy,
        }
        return summary, {"fig3": trace}

    if figure_id == "fig4":
        seeds = tuple(seeds) if seeds is not None else (11, 13)
        if len(seeds) < 2:
            raise UnknownFigure("fig4 needs at least two seeds")
        runs = {}
        traces = {}
        for seed in seeds:
            scenario = builtin_scenario("fig4", seed=seed)
            domain, potential, config, initial = scenario.build()
            trace = run(config, domain, potential, initial)
            n = initial.n
            with_self = trace.final_energy
            without_self = with_self - float(potential.value(np.zeros(2))) / (2 * n)
            runs[seed] = {
                "termination": trace.termination,
                "steps": trace.records[-1][0],
                "tau": trace.tau,
                "energy_with_self_term": with_self,
                "energy_without_self_term": without_self,
            }
            traces[f"fig4_seed{seed}"] = trace
        energies = [r["energy_with_self_term"] for r in runs.values()]
        summary = {
            "figure": "fig4",
            "seeds": list(seeds),
            "runs": runs,
            "max_energy_spread": float(max(energies) - min(energies)),
        }
        return summary, traces

    scenario = builtin_scenario("fig5", seed=None if seeds is None else seeds[0])
    domain, potential, config, initial = scenario.build()
    trace = run(config, domain, potential, initial)
    counts = [(t, cluster_count(pos, gap=0.1)) for t, pos in trace.snapshots]
    summary = {
        "figure": "fig5",
        "seed": config.seed,
        "termination": trace.termination,
        "tau": trace.tau,
        "final_energy": trace.final_energy,
        "cluster_counts": counts,
        "final_cluster_count": counts[-1][1],
    }
    return summary, {"fig5": trace}

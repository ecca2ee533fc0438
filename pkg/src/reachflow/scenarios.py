"""Scenario documents: strict schema, builders, and the shipped catalog.

A scenario is a versioned JSON-compatible object naming a domain, a kernel,
a scheme configuration, an initial sampler and output paths. Validation is
strict: unknown keys and missing required keys are rejected with the object
path in the message, so configuration typos fail loudly instead of running
the wrong experiment.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

from .dynamics import (
    EnergyRate,
    EpsilonFlow,
    FixedTime,
    GradNorm,
    PerturbedGrid,
    Projected,
    ProjectedPerturbedGrid,
    SchemeConfig,
    UniformBox,
    sample_initial,
)
from .errors import SchemaError

SCHEMA_VERSION = 1


def check_keys(obj, allowed, ctx, optional=frozenset()):
    """Reject unknown keys and require all non-optional ones."""
    if not isinstance(obj, dict):
        raise SchemaError(f"{ctx}: expected an object, got {type(obj).__name__}")
    unknown = set(obj) - set(allowed)
    if unknown:
        raise SchemaError(f"{ctx}: unknown keys {sorted(unknown)}")
    missing = set(allowed) - set(optional) - set(obj)
    if missing:
        raise SchemaError(f"{ctx}: missing keys {sorted(missing)}")


def _positive(value, ctx):
    if not isinstance(value, (int, float)) or not value > 0:
        raise SchemaError(f"{ctx}: expected a positive number, got {value!r}")
    return value


@dataclass
class Scenario:
    """Parsed scenario document; ``build`` instantiates the run inputs."""

    name: str
    domain_spec: dict
    potential_spec: dict
    scheme_spec: dict
    initial_spec: dict
    outputs: dict

    def build(self):
        from .geometry import domain_from_spec
        from .potentials import potential_from_spec

        domain = domain_from_spec(self.domain_spec)
        potential = potential_from_spec(self.potential_spec)
        config = scheme_config_from_spec(self.scheme_spec)
        initial = sample_initial(
            sampler_from_spec(self.initial_spec), domain, config.seed
        )
        return domain, potential, config, initial


def scheme_config_from_spec(spec, workers=1) -> SchemeConfig:
    check_keys(
        spec,
        {"kind", "eps", "tau", "tol", "stopping", "max_steps", "snapshot_every", "seed"},
        "scheme",
        optional={"eps", "max_steps", "snapshot_every"},
    )
    kind = spec["kind"]
    if kind == "epsilon_flow":
        if "eps" not in spec:
            raise SchemaError("scheme: epsilon_flow requires 'eps'")
        scheme = EpsilonFlow(eps=_positive(spec["eps"], "scheme.eps"))
    elif kind == "projected":
        eps = spec.get("eps")
        scheme = Projected(eps=None if eps is None else _positive(eps, "scheme.eps"))
    else:
        raise SchemaError(f"scheme: unknown kind {spec.get('kind')!r}")

    tau = spec["tau"]
    if tau == "auto":
        tau = None
    elif tau is not None:
        tau = _positive(tau, "scheme.tau")

    stop_spec = spec["stopping"]
    check_keys(stop_spec, {"kind", "T"}, "scheme.stopping", optional={"T"})
    stop_kind = stop_spec["kind"]
    if stop_kind == "grad_norm":
        stopping = GradNorm()
    elif stop_kind == "energy_rate":
        stopping = EnergyRate()
    elif stop_kind == "fixed_time":
        if "T" not in stop_spec:
            raise SchemaError("scheme.stopping: fixed_time requires 'T'")
        stopping = FixedTime(T=_positive(stop_spec["T"], "scheme.stopping.T"))
    else:
        raise SchemaError(f"scheme.stopping: unknown kind {stop_kind!r}")

    if not isinstance(spec["seed"], int):
        raise SchemaError("scheme.seed: an explicit integer seed is required")
    return SchemeConfig(
        scheme=scheme,
        tau=tau,
        tol=_positive(spec["tol"], "scheme.tol"),
        stopping=stopping,
        max_steps=int(spec.get("max_steps", 100_000)),
        snapshot_every=int(spec.get("snapshot_every", 1000)),
        seed=spec["seed"],
        workers=workers,
    )


def sampler_from_spec(spec):
    if not isinstance(spec, dict) or "kind" not in spec:
        raise SchemaError("initial: expected an object with a 'kind' tag")
    kind = spec["kind"]
    if kind == "uniform_box":
        check_keys(spec, {"kind", "bounds", "n"}, "initial")
        return UniformBox(bounds=tuple(map(tuple, spec["bounds"])), n=int(spec["n"]))
    if kind in ("perturbed_grid", "projected_perturbed_grid"):
        check_keys(spec, {"kind", "shape", "bounds", "jitter"}, "initial")
        cls = PerturbedGrid if kind == "perturbed_grid" else ProjectedPerturbedGrid
        return cls(
            shape=tuple(int(k) for k in spec["shape"]),
            bounds=tuple(map(tuple, spec["bounds"])),
            jitter=float(spec["jitter"]),
        )
    raise SchemaError(f"initial: unknown kind {kind!r}")


def parse_scenario(doc) -> Scenario:
    check_keys(
        doc,
        {"version", "name", "domain", "potential", "scheme", "initial", "outputs"},
        "scenario",
        optional={"outputs"},
    )
    if doc["version"] != SCHEMA_VERSION:
        raise SchemaError(
            f"scenario: unsupported version {doc['version']!r} (expected {SCHEMA_VERSION})"
        )
    if not isinstance(doc["name"], str) or not doc["name"]:
        raise SchemaError("scenario: name must be a nonempty string")
    outputs = doc.get("outputs", {})
    if outputs:
        check_keys(outputs, {"trace", "snapshots"}, "scenario.outputs")
    scenario = Scenario(
        name=doc["name"],
        domain_spec=doc["domain"],
        potential_spec=doc["potential"],
        scheme_spec=doc["scheme"],
        initial_spec=doc["initial"],
        outputs=outputs,
    )
    scenario.build()  # validate everything eagerly
    return scenario


def load_scenario(path) -> Scenario:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_scenario(json.load(fh))


def _bean_grid():
    return {
        "kind": "projected_perturbed_grid",
        "shape": [14, 14],
        "bounds": [[-0.9, 0.9], [-0.35, 0.35]],
        "jitter": 0.05,
    }


def builtin_scenario(name: str, seed: Optional[int] = None) -> Scenario:
    """Canned experiment scenarios (the shipped catalog)."""
    docs = {
        # 1D disconnected domain, attractive well, confinement flow.
        "fig2": {
            "version": 1,
            "name": "fig2",
            "domain": {"kind": "interval_union", "intervals": [[-1.0, 1.0], [1.5, 1.5]]},
            "potential": {"kind": "quadratic"},
            "scheme": {
                "kind": "epsilon_flow", "eps": 0.1, "tau": "auto", "tol": 1e-9,
                "stopping": {"kind": "grad_norm"}, "max_steps": 200_000,
                "snapshot_every": 500, "seed": 7,
            },
            "initial": {"kind": "uniform_box", "bounds": [[-1.75, 1.75]], "n": 100},
        },
        # Repulsion on the unit disc, splitting scheme, long horizon.
        "fig3": {
            "version": 1,
            "name": "fig3",
            "domain": {"kind": "disc", "center": [0.0, 0.0], "radius": 1.0},
            "potential": {"kind": "inverse_quadratic", "sign": 1, "scale": 1.0},
            "scheme": {
                "kind": "projected", "tau": "auto", "tol": 1e-9,
                "stopping": {"kind": "fixed_time", "T": 200.0}, "max_steps": 400_000,
                "snapshot_every": 200, "seed": 7,
            },
            "initial": {
                "kind": "perturbed_grid", "shape": [14, 14],
                "bounds": [[-0.65, 0.65], [-0.65, 0.65]], "jitter": 0.04,
            },
        },
        # Repulsion inside the bean region; runs land in local minimizers.
        "fig4": {
            "version": 1,
            "name": "fig4",
            "domain": {"kind": "bean_interior", "n": 1024, "reach": 0.04},
            "potential": {"kind": "inverse_quadratic", "sign": 1, "scale": 1.0},
            "scheme": {
                "kind": "projected", "tau": "auto", "tol": 2e-10,
                "stopping": {"kind": "energy_rate"}, "max_steps": 400_000,
                "snapshot_every": 2000, "seed": 11,
            },
            "initial": _bean_grid(),
        },
        # Attraction on the bean boundary curve; metastable clusters.
        "fig5": {
            "version": 1,
            "name": "fig5",
            "domain": {"kind": "bean_boundary", "n": 1024, "reach": 0.04},
            "potential": {"kind": "inverse_quadratic", "sign": -1, "scale": 1.0},
            "scheme": {
                "kind": "projected", "tau": "auto", "tol": 1e-9,
                "stopping": {"kind": "fixed_time", "T": 28.0}, "max_steps": 100_000,
                "snapshot_every": 100, "seed": 13,
            },
            "initial": _bean_grid(),
        },
        # Base scenario for the confinement-strength sweep: attraction on the
        # unit-circle curve, particles starting on a narrow arc.
        "eps_rate": {
            "version": 1,
            "name": "eps_rate",
            "domain": {"kind": "circle_boundary", "n": 2048},
            "potential": {"kind": "quadratic"},
            "scheme": {
                # tol stops the run while the shrinking cluster still spans
                # many boundary segments; tighter values land on a single flat
                # segment where the curvature-driven penalty moment degenerates.
                "kind": "epsilon_flow", "eps": 0.1, "tau": "auto", "tol": 0.02,
                "stopping": {"kind": "grad_norm"}, "max_steps": 200_000,
                "snapshot_every": 1000, "seed": 5,
            },
            "initial": {
                "kind": "projected_perturbed_grid", "shape": [10, 5],
                "bounds": [[0.4, 1.3], [-0.45, 0.45]], "jitter": 0.05,
            },
        },
        # Base scenario for the step-size refinement study on the disc.
        "tau_order": {
            "version": 1,
            "name": "tau_order",
            "domain": {"kind": "disc", "center": [0.0, 0.0], "radius": 1.0},
            "potential": {"kind": "inverse_quadratic", "sign": 1, "scale": 1.0},
            "scheme": {
                "kind": "projected", "tau": 0.015625, "tol": 1e-9,
                "stopping": {"kind": "fixed_time", "T": 1.0}, "max_steps": 100_000,
                "snapshot_every": 1000, "seed": 1234,
            },
            "initial": {
                "kind": "uniform_box", "bounds": [[-0.7, 0.7], [-0.7, 0.7]], "n": 50,
            },
        },
    }
    if name not in docs:
        raise SchemaError(f"unknown builtin scenario {name!r}")
    doc = docs[name]
    if seed is not None:
        doc["scheme"]["seed"] = int(seed)
        doc["name"] = f"{name}_seed{seed}"
    return parse_scenario(doc)


CATALOG = ("fig2", "fig3", "fig4", "fig5", "eps_rate", "tau_order")

"""Interaction kernels and the norm/convexity constants used by the schemes.

Two C^2 symmetric kernels are supported: the quadratic well W(x) = |x|^2 and
the rational bump W(x) = s / (1 + a|x|^2) with sign s and scale a > 0 (s = +1
is repulsive, s = -1 attractive). Values and gradients are evaluated on
arbitrary batches of difference vectors; ``grad_bound`` and ``hessian_bound``
return sup-norms over a centered ball, which feed the step-size restriction
and the error/stability estimates of the dynamics module.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SchemaError


class Potential:
    def value(self, x):
        """W evaluated at difference vectors; batched over leading axes."""
        raise NotImplementedError

    def gradient(self, x):
        """grad W at difference vectors; same shape as the input."""
        raise NotImplementedError

    def value_and_gradient(self, x):
        """(W, grad W) in one pass; kinds override to share intermediates."""
        return self.value(x), self.gradient(x)

    def grad_bound(self, radius):
        """sup of |grad W| over the closed ball of the given radius."""
        raise NotImplementedError

    def hessian_bound(self, radius):
        """Upper bound on the spectral norm of D^2 W over the ball."""
        raise NotImplementedError

    def semiconvexity(self, radius):
        """A nonpositive lower bound on the Hessian spectrum over the ball."""
        raise NotImplementedError


@dataclass(frozen=True)
class Quadratic(Potential):
    """W(x) = |x|^2: globally attractive, constant Hessian 2*Id."""

    def value(self, x):
        x = np.asarray(x, dtype=float)
        return np.sum(x * x, axis=-1)

    def gradient(self, x):
        return 2.0 * np.asarray(x, dtype=float)

    def grad_bound(self, radius):
        return 2.0 * float(radius)

    def hessian_bound(self, radius):
        return 2.0

    def semiconvexity(self, radius):
        return 0.0


@dataclass(frozen=True)
class InverseQuadratic(Potential):
    """W(x) = sign / (1 + scale*|x|^2)."""

    sign: int
    scale: float

    def __post_init__(self):
        if self.sign not in (-1, 1):
            raise ValueError("sign must be +1 or -1")
        if not (self.scale > 0):
            raise ValueError("scale must be positive")

    def value(self, x):
        x = np.asarray(x, dtype=float)
        return self.sign / (1.0 + self.scale * np.sum(x * x, axis=-1))

    def gradient(self, x):
        x = np.asarray(x, dtype=float)
        q = 1.0 + self.scale * np.sum(x * x, axis=-1)
        return (-2.0 * self.sign * self.scale / (q * q))[..., None] * x

    def value_and_gradient(self, x):
        x = np.asarray(x, dtype=float)
        q = 1.0 + self.scale * np.sum(x * x, axis=-1)
        inv = 1.0 / q
        val = self.sign * inv
        grad = (-2.0 * self.scale * val * inv)[..., None] * x
        return val, grad

    def grad_bound(self, radius):
        # |grad W|(r) = 2ar/(1+ar^2)^2 peaks at r* = 1/sqrt(3a).
        a = self.scale
        r_star = 1.0 / np.sqrt(3.0 * a)
        r = min(float(radius), r_star)
        return 2.0 * a * r / (1.0 + a * r * r) ** 2

    def hessian_bound(self, radius):
        # Radial/tangential eigenvalues scanned on a dense grid, with a small
        # safety factor; the maximum 2a sits at the origin for this family.
        a = self.scale
        r = np.linspace(0.0, float(radius), 2001)
        u = r * r
        q = 1.0 + a * u
        fp = -a / (q * q)
        fpp = 2.0 * a * a / (q ** 3)
        radial = np.abs(2.0 * fp + 4.0 * fpp * u)
        tangential = np.abs(2.0 * fp)
        return 1.01 * float(np.maximum(radial, tangential).max())

    def semiconvexity(self, radius):
        return -self.hessian_bound(radius)


def potential_from_spec(spec) -> Potential:
    """Build a kernel from its schema object."""
    from .scenarios import check_keys

    if not isinstance(spec, dict) or "kind" not in spec:
        raise SchemaError("potential spec must be an object with a 'kind' tag")
    kind = spec["kind"]
    if kind == "quadratic":
        check_keys(spec, {"kind"}, "potential")
        return Quadratic()
    if kind == "inverse_quadratic":
        check_keys(spec, {"kind", "sign", "scale"}, "potential")
        return InverseQuadratic(sign=int(spec["sign"]), scale=float(spec["scale"]))
    raise SchemaError(f"unknown potential kind {kind!r}")

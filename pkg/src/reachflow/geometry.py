"""Compact positive-reach domains in R^1 and R^2.

Every domain exposes the same small query surface: ``distance`` (Euclidean
distance to the set), ``project`` (unique closest point, with ambiguity
detection), ``closest_point`` (closest point without the ambiguity check,
for initialization far outside the tube), ``reach``, ``diameter`` and
``proximal_normals``. Analytic kinds (interval unions, closed discs) answer
exactly; curve and region kinds are backed by a sampled boundary polyline,
with distances computed segment-accurately (not vertex-only).

All queries accept a single point of shape ``(d,)`` or a batch ``(n, d)``
and are pure functions of immutable inputs.
"""

from __future__ import annotations

import numpy as np
from scipy.spatial import ConvexHull

from .errors import DimensionMismatch, InvalidResolution, NotOnDomain, OutsideReachTube

# Absolute tolerance for "lies on the domain" checks; well below any step
# size used by the dynamics.
ON_DOMAIN_TOL = 1e-9

# Two candidate projections closer than this are treated as a genuine tie.
_TIE_TOL = 1e-12


def _as_batch(x, dim):
    """Return (points, was_single) with points of shape (n, dim)."""
    pts = np.asarray(x, dtype=float)
    if pts.ndim == 1:
        if pts.shape[0] != dim:
            raise DimensionMismatch(f"expected dim {dim}, got {pts.shape[0]}")
        return pts[None, :], True
    if pts.ndim != 2 or pts.shape[1] != dim:
        raise DimensionMismatch(f"expected points of shape (n, {dim}), got {pts.shape}")
    return pts, False


class Domain:
    """Common query interface; concrete kinds override the _batch hooks."""

    dim: int

    @property
    def reach(self) -> float:
        raise NotImplementedError

    @property
    def diameter(self) -> float:
        raise NotImplementedError

    def distance(self, x):
        pts, single = _as_batch(x, self.dim)
        d = self._distance_batch(pts)
        return float(d[0]) if single else d

    def project(self, x):
        """Closest point on the set; raises OutsideReachTube on detected ties."""
        pts, single = _as_batch(x, self.dim)
        p = self._project_batch(pts, check_unique=True)
        return p[0] if single else p

    def closest_point(self, x):
        """Closest point without the uniqueness check (ties broken deterministically)."""
        pts, single = _as_batch(x, self.dim)
        p = self._project_batch(pts, check_unique=False)
        return p[0] if single else p

    def proximal_normals(self, p):
        """Sampled unit vectors of the proximal normal cone at a point on the set.

        Empty for interior points of full-dimensional kinds. For curve kinds
        both sides of the local normal line are returned; at polyline vertices
        the adjacent-segment bisector is used, which is exact on the convex
        side of the turn and accurate to O(segment length) on the concave side.
        """
        q = np.asarray(p, dtype=float)
        if q.ndim != 1 or q.shape[0] != self.dim:
            raise DimensionMismatch(f"expected a point of dim {self.dim}")
        if self.distance(q) > ON_DOMAIN_TOL:
            raise NotOnDomain(f"point at distance {self.distance(q):.3e} from the set")
        return self._normals(q)

    def _distance_batch(self, pts):
        raise NotImplementedError

    def _project_batch(self, pts, check_unique):
        raise NotImplementedError

    def _normals(self, q):
        raise NotImplementedError


class IntervalUnion(Domain):
    """Finite union of disjoint closed intervals on the line.

    Degenerate intervals (a == b) are isolated points. The reach is half the
    minimal gap between components (+inf for a single component); inside the
    gaps the midpoint has two closest points, which ``project`` reports as
    OutsideReachTube.
    """

    dim = 1

    def __init__(self, intervals):
        iv = np.asarray(intervals, dtype=float)
        if iv.ndim != 2 or iv.shape[1] != 2 or iv.shape[0] == 0:
            raise ValueError("intervals must be a nonempty list of [a, b] pairs")
        if not np.isfinite(iv).all():
            raise ValueError("interval endpoints must be finite")
        if np.any(iv[:, 0] > iv[:, 1]):
            raise ValueError("each interval needs a <= b")
        order = np.argsort(iv[:, 0])
        iv = iv[order]
        gaps = iv[1:, 0] - iv[:-1, 1]
        if np.any(gaps <= 0):
            raise ValueError("intervals must be pairwise disjoint")
        self.intervals = iv
        self._reach = float(gaps.min() / 2.0) if len(iv) > 1 else np.inf

    @property
    def reach(self):
        return self._reach

    @property
    def diameter(self):
        return float(self.intervals[-1, 1] - self.intervals[0, 0])

    def _interval_distances(self, pts):
        x = pts[:, 0][:, None]
        a = self.intervals[:, 0][None, :]
        b = self.intervals[:, 1][None, :]
        return np.maximum(np.maximum(a - x, x - b), 0.0)

    def _distance_batch(self, pts):
        return self._interval_distances(pts).min(axis=1)

    def _project_batch(self, pts, check_unique):
        d = self._interval_distances(pts)
        idx = np.argmin(d, axis=1)
        if check_unique and d.shape[1] > 1:
            best = d[np.arange(len(pts)), idx]
            masked = d.copy()
            masked[np.arange(len(pts)), idx] = np.inf
            runner = masked.min(axis=1)
            ties = runner - best <= _TIE_TOL
            if np.any(ties):
                bad = pts[ties][0, 0]
                raise OutsideReachTube(
                    f"x={bad!r} is equidistant from two components (d={best[ties][0]:.6g})"
                )
        a = self.intervals[idx, 0]
        b = self.intervals[idx, 1]
        return np.clip(pts[:, 0], a, b)[:, None]

    def _normals(self, q):
        x = q[0]
        for a, b in self.intervals:
            if not (a - ON_DOMAIN_TOL <= x <= b + ON_DOMAIN_TOL):
                continue
            if a == b:
                return [np.array([-1.0]), np.array([1.0])]
            out = []
            if abs(x - a) <= ON_DOMAIN_TOL:
                out.append(np.array([-1.0]))
            if abs(x - b) <= ON_DOMAIN_TOL:
                out.append(np.array([1.0]))
            return out
        return []


class ClosedDisc(Domain):
    """Closed disc in the plane; convex, so the reach is infinite."""

    dim = 2

    def __init__(self, center, radius):
        self.center = np.asarray(center, dtype=float)
        if self.center.shape != (2,) or not np.isfinite(self.center).all():
            raise ValueError("center must be a finite 2-vector")
        if not (radius > 0 and np.isfinite(radius)):
            raise ValueError("radius must be positive and finite")
        self.radius = float(radius)

    @property
    def reach(self):
        return np.inf

    @property
    def diameter(self):
        return 2.0 * self.radius

    def _distance_batch(self, pts):
        r = np.linalg.norm(pts - self.center, axis=1)
        return np.maximum(r - self.radius, 0.0)

    def _project_batch(self, pts, check_unique):
        rel = pts - self.center
        r = np.linalg.norm(rel, axis=1)
        # Sticky boundary keeps projection exactly idempotent under rounding.
        inside = r <= self.radius * (1.0 + 4.0 * np.finfo(float).eps)
        out = pts.copy()
        far = ~inside
        if np.any(far):
            out[far] = self.center + rel[far] * (self.radius / r[far])[:, None]
        return out

    def _normals(self, q):
        rel = q - self.center
        r = np.linalg.norm(rel)
        if r < self.radius - ON_DOMAIN_TOL:
            return []
        return [rel / r]


class Polyline(Domain):
    """Piecewise-linear curve in the plane with a user-declared reach.

    Projection scans all segments for the exact closest point; ties between
    equidistant segments are broken by the lowest segment index. Closed
    polylines list each vertex once, the closing segment being implicit.
    """

    dim = 2

    def __init__(self, vertices, closed, reach):
        v = np.asarray(vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or v.shape[0] < 2:
            raise ValueError("need at least 2 vertices of dim 2")
        if not np.isfinite(v).all():
            raise ValueError("vertices must be finite")
        if not (reach > 0):
            raise ValueError("declared reach must be positive")
        seg_starts = v
        seg_ends = np.roll(v, -1, axis=0) if closed else v[1:]
        if not closed:
            seg_starts = v[:-1]
        if np.any(np.linalg.norm(seg_ends - seg_starts, axis=1) == 0.0):
            raise ValueError("repeated consecutive vertices")
        self.vertices = v
        self.closed = bool(closed)
        self._reach = float(reach)
        self._a = seg_starts
        self._d = seg_ends - seg_starts
        self._len2 = np.einsum("ij,ij->i", self._d, self._d)
        self._a2 = np.einsum("ij,ij->i", self._a, self._a)
        self._ad = np.einsum("ij,ij->i", self._a, self._d)

    @property
    def reach(self):
        return self._reach

    @property
    def diameter(self):
        return _point_set_diameter(self.vertices)

    def _closest_batch(self, pts):
        """Per point: squared distance, segment index, parameter t in [0,1].

        Candidate distances are computed in expanded (GEMM-friendly) form to
        rank segments, then the winner's distance is recomputed by direct
        subtraction so on-curve points report ~0 instead of cancellation noise.
        """
        xa = pts @ self._a.T  # (n, s)
        u = pts @ self._d.T
        u -= self._ad[None, :]  # (x - a) . d
        t = u / self._len2[None, :]
        np.clip(t, 0.0, 1.0, out=t)
        # |x - a - t d|^2 = |x|^2 + |a|^2 - 2 x.a + t*(t|d|^2 - 2 (x-a).d)
        d2 = t * self._len2[None, :]
        d2 -= u
        d2 -= u
        d2 *= t
        xa *= -2.0
        d2 += xa
        d2 += self._a2[None, :]
        d2 += np.einsum("nj,nj->n", pts, pts)[:, None]
        idx = np.argmin(d2, axis=1)  # lowest index wins ties
        n = np.arange(len(pts))
        tbest = t[n, idx]
        diff = pts - (self._a[idx] + tbest[:, None] * self._d[idx])
        return np.einsum("nj,nj->n", diff, diff), idx, tbest

    def _distance_batch(self, pts):
        d2, _, _ = self._closest_batch(pts)
        return np.sqrt(d2)

    def _project_batch(self, pts, check_unique):
        _, idx, t = self._closest_batch(pts)
        return self._a[idx] + t[:, None] * self._d[idx]

    def _segment_normal(self, k):
        d = self._d[k]
        n = np.array([-d[1], d[0]])
        return n / np.linalg.norm(n)

    def _normals(self, q):
        d2, idx, t = self._closest_batch(q[None, :])
        k, tk = int(idx[0]), float(t[0])
        nseg = len(self._a)
        seg_len = np.sqrt(self._len2[k])
        vertex_tol = ON_DOMAIN_TOL / seg_len
        at_start = tk <= vertex_tol
        at_end = tk >= 1.0 - vertex_tol
        if at_start or at_end:
            other = None
            if at_end:
                if k + 1 < nseg or self.closed:
                    other = (k + 1) % nseg
            else:
                if k > 0 or self.closed:
                    other = (k - 1) % nseg
            if other is not None:
                n = self._segment_normal(k) + self._segment_normal(other)
                norm = np.linalg.norm(n)
                if norm > 1e-12:
                    n = n / norm
                else:  # 180-degree turn; fall back to the local segment
                    n = self._segment_normal(k)
                return [n, -n]
        n = self._segment_normal(k)
        return [n, -n]


class RegionBoundedByPolyline(Domain):
    """Full-dimensional region enclosed by a closed polyline.

    Membership uses the even-odd rule; inside points have distance zero and
    project to themselves, outside points delegate to the boundary curve.
    """

    dim = 2

    def __init__(self, boundary: Polyline, reach):
        if not boundary.closed:
            raise ValueError("region boundary must be a closed polyline")
        if not (reach > 0):
            raise ValueError("declared reach must be positive")
        self.boundary = boundary
        self._reach = float(reach)
        v = boundary.vertices
        self._x0 = v[:, 0].copy()
        self._y0 = v[:, 1].copy()
        self._dx = np.roll(v[:, 0], -1) - self._x0
        self._dy = np.roll(v[:, 1], -1) - self._y0
        self._edge_down = self._dy < 0.0

    @property
    def reach(self):
        return self._reach

    @property
    def diameter(self):
        return self.boundary.diameter

    def contains(self, x):
        pts, single = _as_batch(x, self.dim)
        inside = self._inside(pts)
        return bool(inside[0]) if single else inside

    def _inside(self, pts):
        """Even-odd ray casting (horizontal rightward ray), division-free."""
        x = pts[:, 0][:, None]
        y = pts[:, 1][:, None]
        yr = y - self._y0
        straddle = (yr >= 0.0) != (yr >= self._dy)
        # x < x0 + (y - y0) dx/dy, cleared of the division (sign via dy < 0).
        lhs = x - self._x0
        lhs *= self._dy
        rhs = yr
        rhs *= self._dx
        crossing = straddle
        crossing &= (lhs < rhs) != self._edge_down
        return crossing.sum(axis=1) % 2 == 1

    def _distance_batch(self, pts):
        d = np.zeros(len(pts))
        outside = ~self._inside(pts)
        if np.any(outside):
            d[outside] = self.boundary._distance_batch(pts[outside])
        return d

    def _project_batch(self, pts, check_unique):
        outside = ~self._inside(pts)
        if not np.any(outside):
            return pts.copy()
        out = pts.copy()
        out[outside] = self.boundary._project_batch(pts[outside], check_unique)
        return out

    def _normals(self, q):
        if self.boundary.distance(q) > ON_DOMAIN_TOL:
            return []  # interior point
        probe = self._reach / 2.0
        normals = []
        for n in self.boundary._normals(q):
            if not self._inside((q + probe * n)[None, :])[0]:
                normals.append(n)
        return normals


def _point_set_diameter(pts):
    """Exact diameter of a finite point set (via hull for large inputs)."""
    if len(pts) > 64:
        try:
            pts = pts[ConvexHull(pts).vertices]
        except Exception:  # degenerate (collinear) input; brute-force below
            pass
    d2 = np.sum((pts[:, None, :] - pts[None, :, :]) ** 2, axis=-1)
    return float(np.sqrt(d2.max()))


# Default declared reach of the bean boundary. The curve's neck at x = 0 has
# branch half-gap p(0) = 0.04, which is the medial-axis bottleneck; interior
# curvature (radius >= 0.17) and the lobe tips (radius ~ 0.7) are slacker.
BEAN_REACH = 0.04


def bean_profile(x):
    """Upper-branch height of the bean curve at abscissa x in [-1, 1]."""
    x = np.asarray(x, dtype=float)
    return 0.4 * np.sqrt(np.clip(1.0 - x * x, 0.0, None)) * (1.1 - np.cos(3.0 * x))


def sample_bean_boundary(n, reach=BEAN_REACH):
    """Closed polyline sampling of the bean curve with n vertices (even, >= 8).

    The upper branch is traversed left to right, the lower branch right to
    left; the endpoints (+-1, 0) appear exactly once each.
    """
    if n < 8 or n % 2 != 0:
        raise InvalidResolution(f"need an even vertex count >= 8, got {n}")
    m = n // 2 + 1
    xs = np.linspace(-1.0, 1.0, m)
    ys = bean_profile(xs)
    upper = np.column_stack([xs, ys])
    lower = np.column_stack([xs[-2:0:-1], -ys[-2:0:-1]])
    return Polyline(np.vstack([upper, lower]), closed=True, reach=reach)


def sample_circle_boundary(n, radius=1.0, center=(0.0, 0.0), reach=None):
    """Closed polyline inscribed in a circle.

    The default declared reach is radius*cos(pi/n), the true reach of the
    inscribed polygon curve (limited by the central medial-axis point).
    """
    if n < 3:
        raise InvalidResolution(f"need at least 3 vertices, got {n}")
    if reach is None:
        reach = radius * np.cos(np.pi / n)
    angles = 2.0 * np.pi * np.arange(n) / n
    c = np.asarray(center, dtype=float)
    verts = c + radius * np.column_stack([np.cos(angles), np.sin(angles)])
    return Polyline(verts, closed=True, reach=reach)


def domain_from_spec(spec) -> Domain:
    """Build a domain from its tagged schema object (see scenario files)."""
    from .scenarios import check_keys  # local import to avoid a cycle

    if not isinstance(spec, dict) or "kind" not in spec:
        raise _schema_error("domain spec must be an object with a 'kind' tag")
    kind = spec["kind"]
    if kind == "interval_union":
        check_keys(spec, {"kind", "intervals"}, "domain")
        return IntervalUnion(spec["intervals"])
    if kind == "disc":
        check_keys(spec, {"kind", "center", "radius"}, "domain")
        return ClosedDisc(spec["center"], spec["radius"])
    if kind == "bean_boundary":
        check_keys(spec, {"kind", "n", "reach"}, "domain", optional={"reach"})
        return sample_bean_boundary(spec["n"], reach=spec.get("reach", BEAN_REACH))
    if kind == "bean_interior":
        check_keys(spec, {"kind", "n", "reach"}, "domain", optional={"reach"})
        reach = spec.get("reach", BEAN_REACH)
        return RegionBoundedByPolyline(sample_bean_boundary(spec["n"], reach=reach), reach=reach)
    if kind == "circle_boundary":
        check_keys(spec, {"kind", "n", "radius", "center", "reach"}, "domain",
                   optional={"radius", "center", "reach"})
        return sample_circle_boundary(
            spec["n"],
            radius=spec.get("radius", 1.0),
            center=spec.get("center", (0.0, 0.0)),
            reach=spec.get("reach"),
        )
    raise _schema_error(f"unknown domain kind {kind!r}")


def _schema_error(msg):
    from .errors import SchemaError

    return SchemaError(msg)

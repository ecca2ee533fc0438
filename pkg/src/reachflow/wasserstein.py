"""Exact quadratic Wasserstein distance between equal-size empirical measures.

For two uniform discrete measures with the same number of atoms an optimal
transport plan can be taken to be a permutation, so the distance reduces to a
balanced linear assignment with squared-Euclidean costs. Three routes are
provided: the sorting shortcut in 1D, an exact assignment solver for any
dimension, and a permutation-enumeration oracle for cross-checking tiny
instances.
"""

from __future__ import annotations

from itertools import permutations

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import DimensionMismatch, SizeMismatch, SizeTooLarge


def _as_points(a):
    pts = np.asarray(a, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.ndim != 2 or pts.shape[0] < 1:
        raise ValueError(f"expected a point set of shape (N, d), got {pts.shape}")
    return pts


def _validate_pair(a, b):
    pa, pb = _as_points(a), _as_points(b)
    if pa.shape[0] != pb.shape[0]:
        raise SizeMismatch(f"point counts differ: {pa.shape[0]} vs {pb.shape[0]}")
    if pa.shape[1] != pb.shape[1]:
        raise DimensionMismatch(f"dimensions differ: {pa.shape[1]} vs {pb.shape[1]}")
    return pa, pb


def w2_1d(a, b) -> float:
    """1D shortcut: the monotone (sorted) coupling is optimal."""
    pa, pb = _validate_pair(a, b)
    if pa.shape[1] != 1:
        raise DimensionMismatch("w2_1d requires dimension 1")
    sa = np.sort(pa[:, 0])
    sb = np.sort(pb[:, 0])
    return float(np.sqrt(np.mean((sa - sb) ** 2)))


def _cost_matrix(pa, pb):
    diff = pa[:, None, :] - pb[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def w2_assignment(a, b) -> float:
    """Exact d_2 via balanced linear assignment (O(N^3) solver)."""
    pa, pb = _validate_pair(a, b)
    cost = _cost_matrix(pa, pb)
    rows, cols = linear_sum_assignment(cost)
    return float(np.sqrt(cost[rows, cols].sum() / pa.shape[0]))


def w2_bruteforce(a, b) -> float:
    """Permutation-enumeration oracle; restricted to N <= 8."""
    pa, pb = _validate_pair(a, b)
    n = pa.shape[0]
    if n > 8:
        raise SizeTooLarge(f"brute force limited to N <= 8, got {n}")
    cost = _cost_matrix(pa, pb)
    best = min(sum(cost[i, p[i]] for i in range(n)) for p in permutations(range(n)))
    return float(np.sqrt(best / n))

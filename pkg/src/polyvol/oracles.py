"""Exact and brute-force volume references.

These ship with the library (not only the tests) so the command line can
print reference columns next to estimates where a closed form or a
tractable expansion exists.
"""

from __future__ import annotations

import math
from itertools import combinations

import numpy as np

from .bodies import Zonotope

SUBSET_LIMIT = 10**6


def exact_cube(d: int) -> float:
    """log vol([-1,1]^d) = d log 2."""
    return d * math.log(2.0)


def exact_cross(d: int) -> float:
    """log vol(conv({+-e_i})) = log(2^d / d!)."""
    return d * math.log(2.0) - math.lgamma(d + 1)


def exact_simplex(d: int) -> float:
    """log vol(conv({0, e_i})) = -log d!."""
    return -math.lgamma(d + 1)


def exact_zonotope(z: Zonotope) -> float:
    """log volume by the subset-determinant expansion
    vol = 2^d sum over d-subsets S of |det G_S|; only for C(k,d) small."""
    g = z.generators
    d, k = g.shape
    subsets = math.comb(k, d)
    if subsets > SUBSET_LIMIT:
        raise ValueError(
            f"subset expansion needs {subsets} determinants, over the "
            f"{SUBSET_LIMIT} limit"
        )
    total = 0.0
    for cols in combinations(range(k), d):
        total += abs(np.linalg.det(g[:, cols]))
    if total <= 0.0:
        return -math.inf
    return d * math.log(2.0) + math.log(total)


def mc_rejection(body, lo, hi, n: int, rng) -> tuple[float, float]:
    """Rejection estimate of vol(body) from a bounding box [lo, hi]:
    (estimate, binomial standard error).  The body only needs
    contains_many."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    if np.any(hi <= lo):
        raise ValueError("bounding box is empty")
    pts = rng.uniform(lo, hi, size=(n, lo.size))
    frac = float(np.mean(body.contains_many(pts)))
    box = float(np.prod(hi - lo))
    se = box * math.sqrt(max(frac * (1.0 - frac), 0.0) / n)
    return box * frac, se

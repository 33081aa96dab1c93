"""Shared test helpers: deterministic RNG construction and a 2-D hull oracle."""

import numpy as np
import pytest

from polyvol.sampling import rng_stream


@pytest.fixture
def rng():
    """Fresh deterministic generator for tests that just need randomness."""
    return rng_stream(12345)


@pytest.fixture
def shoelace():
    """Exact polygon area from unordered 2-D hull vertices."""

    def area(vertices: np.ndarray) -> float:
        center = vertices.mean(axis=0)
        diffs = vertices - center
        order = np.argsort(np.arctan2(diffs[:, 1], diffs[:, 0]))
        v = vertices[order]
        x, y = v[:, 0], v[:, 1]
        return 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))

    return area


def hull_contains_2d(points: np.ndarray, x: np.ndarray, tol: float = 1e-9) -> bool:
    """Point-in-convex-hull test in the plane, independent of any LP code.

    Walks the hull edges (monotone chain) and checks that x is on the inner
    side of every edge.  Used as an oracle for V-polytope and zonotope
    membership in d=2.
    """
    pts = np.unique(np.round(np.asarray(points, dtype=float), 12), axis=0)
    if len(pts) < 3:
        raise ValueError("need at least 3 distinct points for a 2-D hull")
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    pts = pts[order]

    def cross2(u, v):
        return u[0] * v[1] - u[1] * v[0]

    def half(chain_pts):
        chain = []
        for p in chain_pts:
            while len(chain) >= 2 and cross2(chain[-1] - chain[-2], p - chain[-2]) <= 0:
                chain.pop()
            chain.append(p)
        return chain

    lower = half(pts)
    upper = half(pts[::-1])
    hull = np.array(lower[:-1] + upper[:-1])
    x = np.asarray(x, dtype=float)
    for i in range(len(hull)):
        a, b = hull[i], hull[(i + 1) % len(hull)]
        if cross2(b - a, x - a) < -tol * max(1.0, np.linalg.norm(b - a)):
            return False
    return True


def zonotope_vertices_2d(generators: np.ndarray) -> np.ndarray:
    """All points {G s : s in {-1,1}^k} for a 2xk generator matrix.

    The zonotope is the convex hull of these sign combinations, so they feed
    straight into hull_contains_2d.
    """
    g = np.asarray(generators, dtype=float)
    k = g.shape[1]
    signs = np.array(np.meshgrid(*[[-1.0, 1.0]] * k)).reshape(k, -1).T
    return signs @ g.T

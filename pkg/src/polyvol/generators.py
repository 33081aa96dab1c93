"""Seeded construction of the benchmark polytope families."""

from __future__ import annotations

from itertools import product

import numpy as np

from .bodies import HPolytope, VPolytope, Zonotope, chebyshev_center
from .errors import NumericError
from .sampling import sample_unit_sphere

RH_MAX_ATTEMPTS = 100


def cube(d: int) -> HPolytope:
    """[-1, 1]^d as 2d halfspaces."""
    eye = np.eye(d)
    return HPolytope(np.vstack([eye, -eye]), np.ones(2 * d))


def cube_v(d: int) -> VPolytope:
    """[-1, 1]^d as its 2^d corner vertices."""
    return VPolytope(np.array(list(product((-1.0, 1.0), repeat=d))))


def cross(d: int) -> VPolytope:
    """Cross polytope conv({+-e_i}), volume 2^d/d!."""
    eye = np.eye(d)
    return VPolytope(np.vstack([eye, -eye]))


def simplex(d: int) -> VPolytope:
    """Corner simplex conv({0, e_1, ..., e_d}), volume 1/d!."""
    return VPolytope(np.vstack([np.zeros(d), np.eye(d)]))


def simplex_h(d: int) -> HPolytope:
    """The corner simplex as d+1 halfspaces: x >= 0, sum x <= 1."""
    a = np.vstack([-np.eye(d), np.ones(d)])
    b = np.concatenate([np.zeros(d), [1.0]])
    return HPolytope(a, b)


def rh(d: int, m_facets: int, rng) -> HPolytope:
    """Random H-polytope from hyperplanes tangent to the unit sphere:
    rows uniform on the sphere, offsets 1.  Regenerates until bounded."""
    for _ in range(RH_MAX_ATTEMPTS):
        a = np.vstack([sample_unit_sphere(rng, d) for _ in range(m_facets)])
        p = HPolytope(a, np.ones(m_facets))
        try:
            chebyshev_center(p)
        except NumericError:
            continue  # unbounded draw, try again
        return p
    raise NumericError(
        f"no bounded polytope with {m_facets} random tangent facets in "
        f"dimension {d} after {RH_MAX_ATTEMPTS} attempts"
    )


def rv(d: int, n_vertices: int, rng) -> VPolytope:
    """Random V-polytope with vertices uniform on the unit sphere."""
    return VPolytope(np.vstack([sample_unit_sphere(rng, d) for _ in range(n_vertices)]))


def zono(d: int, k: int, rng) -> Zonotope:
    """Random zonotope: k segment generators with uniform directions and
    lengths uniform on [0, sqrt(d)]."""
    dirs = np.vstack([sample_unit_sphere(rng, d) for _ in range(k)])
    lengths = rng.uniform(0.0, np.sqrt(d), size=k)
    return Zonotope((dirs * lengths[:, None]).T)

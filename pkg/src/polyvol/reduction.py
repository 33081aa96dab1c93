"""PCA zonotope order reduction and its fitness score.

A zonotope with many generators is replaced by the parallelotope spanned
by the principal axes of its generator cloud: stack X = [G | -G]^T, take
the left singular vectors U of X^T X, and box the rotated generators with
their interval hull.  The parallelotope contains the input, and the
quality of the over-approximation is summarized by the dimension-free
ratio R = (vol(reduced)/vol(z))^(1/d), where vol(z) comes from the volume
estimator since no exact value is available at interesting sizes.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .bodies import Zonotope
from .errors import NumericError
from .estimate import VolumeConfig, VolumeReport, volume
from .linalg import lu_determinant, numeric_rank, svd

CONTAINS_TOL = 1e-9


def interval_hull(h: np.ndarray) -> np.ndarray:
    """Diagonal generator matrix of the tightest axis-aligned box holding
    the zonotope with generators h: entry ii is the support sum_j |h_ij|."""
    h = np.atleast_2d(np.asarray(h, dtype=float))
    return np.diag(np.abs(h).sum(axis=1))


@dataclass(frozen=True)
class ReducedZonotope:
    """Parallelotope {G_red u : |u|_inf <= 1} over-approximating a zonotope."""

    g_red: np.ndarray

    @property
    def dim(self) -> int:
        return self.g_red.shape[0]

    def contains(self, x: np.ndarray, tol: float = CONTAINS_TOL) -> bool:
        u = np.linalg.solve(self.g_red, np.asarray(x, dtype=float))
        return bool(np.max(np.abs(u)) <= 1.0 + tol)

    def contains_many(self, xs: np.ndarray, tol: float = CONTAINS_TOL) -> np.ndarray:
        u = np.linalg.solve(self.g_red, np.atleast_2d(xs).T)
        return np.max(np.abs(u), axis=0) <= 1.0 + tol


def pca_reduce(z: Zonotope) -> ReducedZonotope:
    """Reduce to order 1: G_red = U . interval_hull(U^T G)."""
    g = z.generators
    d = g.shape[0]
    s = svd(g).singular_values
    if numeric_rank(s) < d:
        raise NumericError("zonotope generators do not span the space")
    x = np.hstack([g, -g]).T
    u = svd(x.T @ x).u
    return ReducedZonotope(u @ interval_hull(u.T @ g))


def parallelotope_volume_log(g_red: np.ndarray) -> float:
    """log volume of the parallelotope spanned by a square generator
    matrix: log(2^d |det|).  Singular input warns and returns -inf."""
    g_red = np.asarray(g_red, dtype=float)
    d = g_red.shape[0]
    if g_red.shape != (d, d):
        raise ValueError("parallelotope generators must form a square matrix")
    det = abs(lu_determinant(g_red))
    if det == 0.0:
        warnings.warn("degenerate parallelotope has zero volume", stacklevel=2)
        return -math.inf
    return d * math.log(2.0) + math.log(det)


@dataclass(frozen=True)
class FitnessResult:
    r: float
    vol_p_log: float
    vol_red_log: float
    report: VolumeReport


def fitness(z: Zonotope, cfg: VolumeConfig | None = None) -> FitnessResult:
    """How much volume the PCA parallelotope adds, as a per-dimension
    stretch factor R = (vol(reduced)/vol(z))^(1/d)."""
    red = pca_reduce(z)
    vol_red_log = parallelotope_volume_log(red.g_red)
    rep = volume(z, cfg or VolumeConfig())
    r = math.exp((vol_red_log - rep.log_volume) / z.dim)
    return FitnessResult(r=r, vol_p_log=rep.log_volume,
                         vol_red_log=vol_red_log, report=rep)

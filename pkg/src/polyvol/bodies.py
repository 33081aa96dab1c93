"""Convex body representations and their geometric oracles.

Every body answers two questions: does it contain a point, and where does a
line through an interior point leave it.  H-polytopes and balls answer in
closed form; V-polytopes and zonotopes answer through small dense LPs.
The chord LPs come in min/max pairs and the max side is warm-started from
the basis found on the min side.

Also provides the derived constructions the volume pipeline needs:
Chebyshev centers, approximate minimum-volume enclosing ellipsoids
(Khachiyan's barycentric ascent), sandwiching rounding for V-polytopes,
and the centrally symmetric H-polytope template carved out of a zonotope.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import lp
from .errors import NumericError
from .linalg import null_space_complement, numeric_rank, svd

# Absolute slack tolerated when testing membership.
CONTAINS_TOL = 1e-9
# A V-membership query is "inside" when the separating LP cannot push past this.
SEPARATION_TOL = 1e-9
# Khachiyan ellipsoid defaults.
ELLIPSOID_TOL = 0.01
ELLIPSOID_MAX_ITER = 100_000


# ---------------------------------------------------------------------------
# bodies
# ---------------------------------------------------------------------------


class HPolytope:
    """{x : a x <= b} with a of shape (facets, d)."""

    def __init__(self, a: np.ndarray, b: np.ndarray):
        self.a = np.atleast_2d(np.asarray(a, dtype=float))
        self.b = np.asarray(b, dtype=float)
        if self.a.shape[0] != self.b.shape[0]:
            raise ValueError("one offset per facet required")
        self.dim = self.a.shape[1]

    @property
    def n_facets(self) -> int:
        return self.a.shape[0]

    def contains(self, x: np.ndarray, tol: float = CONTAINS_TOL) -> bool:
        return bool(np.all(self.a @ x <= self.b + tol))

    def contains_many(self, xs: np.ndarray, tol: float = CONTAINS_TOL) -> np.ndarray:
        return np.all(xs @ self.a.T <= self.b + tol, axis=1)

    def line_intersection(self, p: np.ndarray, v: np.ndarray) -> tuple[float, float]:
        if not self.contains(p):
            raise ValueError("line_intersection needs an interior start point")
        return _halfspace_chord(self.a @ v, self.b - self.a @ p)


class Ball:
    def __init__(self, center: np.ndarray, radius: float):
        self.center = np.asarray(center, dtype=float)
        self.radius = float(radius)
        self.dim = self.center.shape[0]

    def at(self, scale: float) -> "Ball":
        """The same template blown up by `scale` (radius scale * radius)."""
        return Ball(self.center, scale * self.radius)

    def scale_needed(self, xs: np.ndarray) -> np.ndarray:
        """Per point, the smallest s with x in self.at(s)."""
        xs = np.atleast_2d(xs)
        return np.linalg.norm(xs - self.center, axis=1) / self.radius

    def contains(self, x: np.ndarray, tol: float = CONTAINS_TOL) -> bool:
        return bool(np.linalg.norm(x - self.center) <= self.radius + tol)

    def contains_many(self, xs: np.ndarray, tol: float = CONTAINS_TOL) -> np.ndarray:
        return np.linalg.norm(xs - self.center, axis=1) <= self.radius + tol

    def line_intersection(self, p: np.ndarray, v: np.ndarray) -> tuple[float, float]:
        u = p - self.center
        vv = float(v @ v)
        uv = float(u @ v)
        disc = uv * uv - vv * (float(u @ u) - self.radius**2)
        if disc < 0 or vv == 0.0:
            raise ValueError("line_intersection needs an interior start point")
        root = np.sqrt(disc)
        return ((-uv - root) / vv, (-uv + root) / vv)


class VPolytope:
    """Convex hull of `vertices` (rows)."""

    def __init__(self, vertices: np.ndarray):
        self.vertices = np.atleast_2d(np.asarray(vertices, dtype=float))
        self.dim = self.vertices.shape[1]
        self._sep_base = None
        self._chord_base = None

    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[0]

    def _separation_lp(self, x: np.ndarray) -> lp.LpProblem:
        # variables: z (d, free), z0 (free), slacks (nv+1, >= 0); maximize z.x - z0
        nv, d = self.vertices.shape
        if self._sep_base is None:
            a = np.zeros((nv + 1, d + 1 + nv + 1))
            a[:nv, :d] = self.vertices
            a[:, d] = -1.0
            a[:, d + 1 :] = np.eye(nv + 1)
            self._sep_base = a
        a = self._sep_base.copy()
        a[nv, :d] = x
        b = np.zeros(nv + 1)
        b[nv] = 1.0
        c = np.zeros(d + 1 + nv + 1)
        c[:d] = -x
        c[d] = 1.0
        lo = np.concatenate([np.full(d + 1, -np.inf), np.zeros(nv + 1)])
        hi = np.full(d + 1 + nv + 1, np.inf)
        return lp.LpProblem(c, a, b, lo, hi)

    def _slack_basis(self) -> lp.Basis:
        nv, d = self.vertices.shape
        return lp.Basis(tuple(range(d + 1, d + 1 + nv + 1)), frozenset())

    def contains(self, x: np.ndarray, tol: float = SEPARATION_TOL) -> bool:
        # x is inside iff no hyperplane separates it from the vertices; the
        # separating LP then tops out at 0 instead of its cap 1
        sol = lp.solve(self._separation_lp(x), initial_basis=self._slack_basis())
        if sol.status is not lp.LpStatus.OPTIMAL:
            raise NumericError(f"separation LP ended {sol.status.value}")
        return -sol.objective_value <= tol

    def contains_many(self, xs: np.ndarray, tol: float = SEPARATION_TOL) -> np.ndarray:
        return np.fromiter((self.contains(x, tol) for x in np.atleast_2d(xs)), dtype=bool)

    def line_intersection(self, p: np.ndarray, v: np.ndarray) -> tuple[float, float]:
        # min/max alpha s.t. p + alpha v = sum(l_i v_i), 0 <= l <= 1, sum l = 1
        nv, d = self.vertices.shape
        if self._chord_base is None:
            a = np.zeros((d + 1, nv + 1))
            a[:d, :nv] = self.vertices.T
            a[d, :nv] = 1.0
            self._chord_base = a
        a = self._chord_base.copy()
        a[:d, nv] = -v
        b = np.concatenate([p, [1.0]])
        c = np.zeros(nv + 1)
        c[nv] = 1.0
        lo = np.concatenate([np.zeros(nv), [-np.inf]])
        hi = np.concatenate([np.ones(nv), [np.inf]])
        return _chord_lp_pair(lp.LpProblem(c, a, b, lo, hi))


class Zonotope:
    """Minkowski sum of segments [-g_i, g_i]; generators are the columns
    of a (d, k) matrix."""

    def __init__(self, generators: np.ndarray):
        self.generators = np.atleast_2d(np.asarray(generators, dtype=float))
        self.dim, self.k = self.generators.shape

    @property
    def order(self) -> float:
        return self.k / self.dim

    def support(self, direction: np.ndarray) -> float:
        return float(np.abs(direction @ self.generators).sum())

    def contains(self, x: np.ndarray, tol: float = CONTAINS_TOL) -> bool:
        d, k = self.generators.shape
        prob = lp.LpProblem(
            np.zeros(k), self.generators, x, -np.ones(k), np.ones(k)
        )
        sol = lp.solve(prob)
        if sol.status is lp.LpStatus.UNBOUNDED:
            raise NumericError("membership LP reported unbounded")
        return sol.status is lp.LpStatus.OPTIMAL

    def contains_many(self, xs: np.ndarray, tol: float = CONTAINS_TOL) -> np.ndarray:
        return np.fromiter((self.contains(x, tol) for x in np.atleast_2d(xs)), dtype=bool)

    def line_intersection(self, p: np.ndarray, v: np.ndarray) -> tuple[float, float]:
        # min/max alpha s.t. p + alpha v = G l, -1 <= l <= 1
        d, k = self.generators.shape
        a = np.hstack([self.generators, -v[:, None]])
        c = np.zeros(k + 1)
        c[k] = 1.0
        lo = np.concatenate([-np.ones(k), [-np.inf]])
        hi = np.concatenate([np.ones(k), [np.inf]])
        return _chord_lp_pair(lp.LpProblem(c, a, p, lo, hi))


@dataclass(frozen=True)
class ShiftedHBody:
    """A family {x : normals x <= b_lo + t (b_hi - b_lo)} interpolating
    between an inscribed and an enclosing offset vector; rows of `normals`
    come in +/- pairs so every member is centrally symmetric."""

    normals: np.ndarray
    b_lo: np.ndarray
    b_hi: np.ndarray
    t: float = 0.0

    @property
    def dim(self) -> int:
        return self.normals.shape[1]

    @property
    def offsets(self) -> np.ndarray:
        return self.b_lo + self.t * (self.b_hi - self.b_lo)

    def at(self, t: float) -> "ShiftedHBody":
        return replace(self, t=float(t))

    def as_hpolytope(self) -> HPolytope:
        return HPolytope(self.normals, self.offsets)

    def scale_needed(self, xs: np.ndarray) -> np.ndarray:
        """Per point, the smallest t with x in self.at(t)."""
        xs = np.atleast_2d(xs)
        gap = self.b_hi - self.b_lo
        safe = np.where(gap > 0, gap, 1.0)
        need = (xs @ self.normals.T - self.b_lo) / safe
        need = np.where(gap > 0, need, np.where(xs @ self.normals.T > self.b_lo, np.inf, -np.inf))
        return need.max(axis=1)

    def contains(self, x: np.ndarray, tol: float = CONTAINS_TOL) -> bool:
        return bool(np.all(self.normals @ x <= self.offsets + tol))

    def contains_many(self, xs: np.ndarray, tol: float = CONTAINS_TOL) -> np.ndarray:
        return np.all(xs @ self.normals.T <= self.offsets + tol, axis=1)

    def line_intersection(self, p: np.ndarray, v: np.ndarray) -> tuple[float, float]:
        if not self.contains(p):
            raise ValueError("line_intersection needs an interior start point")
        return _halfspace_chord(self.normals @ v, self.offsets - self.normals @ p)


class IntersectionBody:
    """Intersection of two bodies; oracles combine the parts."""

    def __init__(self, *parts):
        if not parts:
            raise ValueError("need at least one body")
        self.parts = parts
        self.dim = parts[0].dim

    def contains(self, x: np.ndarray, tol: float = CONTAINS_TOL) -> bool:
        return all(part.contains(x, tol) for part in self.parts)

    def contains_many(self, xs: np.ndarray, tol: float = CONTAINS_TOL) -> np.ndarray:
        flags = self.parts[0].contains_many(xs, tol)
        for part in self.parts[1:]:
            flags = flags & part.contains_many(xs, tol)
        return flags

    def line_intersection(self, p: np.ndarray, v: np.ndarray) -> tuple[float, float]:
        t_lo, t_hi = -np.inf, np.inf
        for part in self.parts:
            lo, hi = part.line_intersection(p, v)
            t_lo = max(t_lo, lo)
            t_hi = min(t_hi, hi)
        if not t_lo < t_hi:
            raise NumericError("empty chord on an intersection body")
        return t_lo, t_hi


# ---------------------------------------------------------------------------
# shared LP plumbing
# ---------------------------------------------------------------------------


def _halfspace_chord(av: np.ndarray, slack: np.ndarray) -> tuple[float, float]:
    """Chord of {t : t * av <= slack} around t = 0 (slack >= 0 within tol)."""
    with np.errstate(divide="ignore", invalid="ignore"):
        bounds = slack / av
    t_hi = np.min(bounds[av > 0], initial=np.inf)
    t_lo = np.max(bounds[av < 0], initial=-np.inf)
    if not np.isfinite(t_hi) or not np.isfinite(t_lo):
        raise NumericError("unbounded chord")
    return float(t_lo), float(t_hi)


def _chord_lp_pair(pmin: lp.LpProblem) -> tuple[float, float]:
    smin = lp.solve(pmin)
    if smin.status is not lp.LpStatus.OPTIMAL:
        if smin.status is lp.LpStatus.INFEASIBLE:
            raise ValueError("line_intersection needs an interior start point")
        raise NumericError("chord LP reported unbounded")
    pmax = lp.negated(pmin)
    if smin.basis is not None:
        smax = lp.resolve_negated(pmax, smin.basis)
    else:
        smax = lp.solve(pmax)
    if smax.status is not lp.LpStatus.OPTIMAL:
        raise NumericError(f"chord LP ended {smax.status.value}")
    return float(smin.objective_value), float(-smax.objective_value)


# ---------------------------------------------------------------------------
# derived constructions
# ---------------------------------------------------------------------------


def chebyshev_center(p: HPolytope) -> tuple[np.ndarray, float]:
    """Center and radius of a largest inscribed ball, by LP."""
    q, d = p.a.shape
    norms = np.linalg.norm(p.a, axis=1)
    # variables: x (d, free), rho (>= 0), slacks (q, >= 0)
    a = np.zeros((q, d + 1 + q))
    a[:, :d] = p.a
    a[:, d] = norms
    a[:, d + 1 :] = np.eye(q)
    c = np.zeros(d + 1 + q)
    c[d] = -1.0
    lo = np.concatenate([np.full(d, -np.inf), np.zeros(1 + q)])
    hi = np.full(d + 1 + q, np.inf)
    sol = lp.solve(lp.LpProblem(c, a, p.b, lo, hi))
    if sol.status is lp.LpStatus.INFEASIBLE:
        raise NumericError("empty polytope")
    if sol.status is lp.LpStatus.UNBOUNDED:
        raise NumericError("unbounded")
    return sol.point[:d].copy(), float(sol.point[d])


def enclosing_ellipsoid(
    p: VPolytope, tol: float = ELLIPSOID_TOL
) -> tuple[np.ndarray, np.ndarray]:
    """(1+tol)-approximate minimum-volume enclosing ellipsoid of the
    vertices: returns (E, c) with (v-c).E.(v-c) <= 1+tol for every vertex.

    Khachiyan's ascent on the lifted points q_i = (v_i, 1): repeatedly move
    weight onto the point with the largest leverage q.V^-1.q until the
    largest leverage is within tolerance of its optimum d+1.
    """
    pts = p.vertices
    nv, d = pts.shape
    centered = pts - pts.mean(axis=0)
    if numeric_rank(svd(centered).singular_values) < d:
        raise NumericError("vertices do not span the space; ellipsoid is degenerate")
    q = np.hstack([pts, np.ones((nv, 1))])
    u = np.full(nv, 1.0 / nv)
    # stop when max leverage <= (d+1)(1+slack); slack chosen so the final
    # d-dimensional ellipsoid satisfies the (1+tol) vertex bound
    slack = tol * d / (d + 1.0)
    for _ in range(ELLIPSOID_MAX_ITER):
        v = q.T @ (u[:, None] * q)
        try:
            lev = np.einsum("ij,ij->i", q @ np.linalg.inv(v), q)
        except np.linalg.LinAlgError as exc:
            raise NumericError("ellipsoid system became singular") from exc
        jmax = int(np.argmax(lev))
        max_lev = float(lev[jmax])
        if max_lev <= (d + 1.0) * (1.0 + slack):
            break
        step = (max_lev - d - 1.0) / ((d + 1.0) * (max_lev - 1.0))
        u *= 1.0 - step
        u[jmax] += step
    else:
        raise NumericError(
            f"ellipsoid iteration did not converge in {ELLIPSOID_MAX_ITER} steps"
        )
    center = pts.T @ u
    cov = pts.T @ (u[:, None] * pts) - np.outer(center, center)
    try:
        shape = np.linalg.inv(cov) / d
    except np.linalg.LinAlgError as exc:
        raise NumericError("ellipsoid shape matrix is singular") from exc
    shape = 0.5 * (shape + shape.T)
    return shape, center


@dataclass(frozen=True)
class RoundedVPolytope:
    body: VPolytope
    log_det_map: float
    center: np.ndarray


def round_vpolytope(p: VPolytope, tol: float = ELLIPSOID_TOL) -> RoundedVPolytope:
    """Apply the linear map sending the enclosing ellipsoid to the unit
    ball.  vol(p) = vol(rounded) / exp(log_det_map)."""
    shape, center = enclosing_ellipsoid(p, tol)
    try:
        chol = np.linalg.cholesky(shape)
    except np.linalg.LinAlgError as exc:
        raise NumericError("ellipsoid shape matrix is not positive definite") from exc
    rounded = VPolytope((p.vertices - center) @ chol)
    sign, logdet = np.linalg.slogdet(chol)
    if sign <= 0:
        raise NumericError("rounding map lost orientation")
    return RoundedVPolytope(rounded, float(logdet), center)


def zonotope_to_hbody(z: Zonotope) -> ShiftedHBody:
    """Centrally symmetric H-polytope template inscribed in a zonotope.

    For generators G (d x k), drop the kernel Q of G'G and take an
    orthonormal basis W (d x k) of its complement.  The body
    {x : +/- W'(G W')^-1 x <= 1} is the image under G of the central slice
    of the coefficient cube orthogonal to the kernel, hence lies inside z.
    The enclosing offsets are the zonotope support values of those same
    facet normals, so at t=1 the family contains z.
    """
    g = z.generators
    d, k = g.shape
    if k < d:
        raise NumericError(f"zonotope needs at least {d} generators, got {k}")
    try:
        _, s, vt = np.linalg.svd(g, full_matrices=True)
    except np.linalg.LinAlgError as exc:
        raise NumericError("svd of the generator matrix did not converge") from exc
    rank = numeric_rank(s)
    if rank < d:
        raise NumericError(f"generators are rank deficient: numeric rank {rank} < {d}")
    kernel = vt[rank:].T  # zero-eigenvalue eigenvectors of G'G, as columns
    w_perp = np.eye(k) if kernel.shape[1] == 0 else null_space_complement(kernel)
    gw = g @ w_perp.T
    try:
        m_half = np.linalg.solve(gw.T, w_perp).T  # W'(G W')^-1, shape k x d
    except np.linalg.LinAlgError as exc:
        raise NumericError("generator projection is singular") from exc
    normals = np.vstack([m_half, -m_half])
    b_lo = np.ones(2 * k)
    # A support offset can dip below 1 where the unit-offset facet is slack
    # (other constraints bind first); clamping keeps the family nested in t
    # without changing either endpoint's geometry.
    b_hi = np.maximum(b_max_offsets(normals, z), b_lo)
    return ShiftedHBody(normals, b_lo, b_hi, 0.0)


def b_max_offsets(normals: np.ndarray, z: Zonotope) -> np.ndarray:
    """Per facet normal, the zonotope support value sum_j |normal . g_j|;
    the polytope {normals x <= these offsets} contains z and every facet
    touches it."""
    return np.abs(normals @ z.generators).sum(axis=1)

"""Dense two-phase simplex with native variable bounds.

Solves  min c.x  subject to  a_eq x = b_eq,  lo <= x <= hi,  where bound
entries may be infinite.  The solver keeps an explicit basis, which lets a
caller re-solve the same feasible region under a negated objective starting
from the previous optimal basis (the min/max chord queries of the geometry
layer come in such pairs).

Pivoting uses Dantzig's rule and switches to Bland's rule after
5 * (rows + cols) iterations so ties cannot cycle.  Feasibility is judged
at 1e-8, pivot eligibility at 1e-10.  The tableau is refreshed from a
fresh factorization every 256 pivots to keep roundoff from accumulating.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

import numpy as np

from .errors import LpFailure

FEAS_TOL = 1e-8
PIVOT_TOL = 1e-10

# nonbasic-at-lower, nonbasic-at-upper, basic, free-nonbasic-at-zero
_AT_LO, _AT_UP, _BASIC, _FREE = 0, 1, 2, 3


class LpStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LpProblem:
    """min c.x  s.t.  a_eq x = b_eq,  lo <= x <= hi."""

    c: np.ndarray
    a_eq: np.ndarray
    b_eq: np.ndarray
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "c", np.asarray(self.c, dtype=float))
        object.__setattr__(self, "a_eq", np.asarray(self.a_eq, dtype=float))
        object.__setattr__(self, "b_eq", np.asarray(self.b_eq, dtype=float))
        object.__setattr__(self, "lo", np.asarray(self.lo, dtype=float))
        object.__setattr__(self, "hi", np.asarray(self.hi, dtype=float))
        m, n = self.a_eq.shape
        if m == 0:
            raise ValueError("at least one equality row is required")
        if self.c.shape != (n,) or self.b_eq.shape != (m,):
            raise ValueError("inconsistent problem dimensions")
        if self.lo.shape != (n,) or self.hi.shape != (n,):
            raise ValueError("bounds must have one entry per variable")
        if not np.all(np.isfinite(self.b_eq)):
            raise ValueError("right-hand side must be finite")
        if np.any(self.lo > self.hi):
            raise ValueError("lower bound exceeds upper bound")


@dataclass(frozen=True)
class Basis:
    """Basic variable indices (row order) plus which nonbasic vars rest at
    their upper bound; together with the problem bounds this pins down a
    basic solution exactly."""

    indices: tuple
    at_upper: frozenset


@dataclass(frozen=True)
class LpSolution:
    status: LpStatus
    objective_value: float
    point: np.ndarray | None
    basis: Basis | None
    fell_back: bool = False


class _WarmStartFailed(Exception):
    pass


class _Simplex:
    def __init__(self, a: np.ndarray, b: np.ndarray, lo: np.ndarray, hi: np.ndarray):
        self.a = np.ascontiguousarray(a, dtype=float)
        self.b = np.asarray(b, dtype=float)
        self.lo = np.array(lo, dtype=float)
        self.hi = np.array(hi, dtype=float)
        self.m, self.n = self.a.shape
        self.basis = np.empty(self.m, dtype=np.intp)
        self.state = np.empty(self.n, dtype=np.int8)
        self.tab = np.empty_like(self.a)
        self.xb = np.empty(self.m)
        self.pivots = 0

    # -- state helpers ---------------------------------------------------

    def default_states(self) -> np.ndarray:
        """Rest every variable at a finite bound if it has one, else at 0."""
        st = np.full(self.n, _FREE, dtype=np.int8)
        st[np.isfinite(self.hi)] = _AT_UP
        st[np.isfinite(self.lo)] = _AT_LO
        return st

    def nonbasic_values(self) -> np.ndarray:
        x = np.where(
            self.state == _AT_UP,
            self.hi,
            np.where(self.state == _AT_LO, self.lo, 0.0),
        )
        x[self.basis] = 0.0
        return x

    def values(self) -> np.ndarray:
        x = self.nonbasic_values()
        x[self.basis] = self.xb
        return x

    def load_basis(self, indices: np.ndarray, states: np.ndarray) -> None:
        """Factor the given basis and derive the basic values; raises
        _WarmStartFailed if the basis matrix is singular or the implied
        point violates the bounds."""
        self.basis = np.array(indices, dtype=np.intp)
        self.state = np.array(states, dtype=np.int8)
        self.state[self.basis] = _BASIC
        bmat = self.a[:, self.basis]
        try:
            self.tab = np.linalg.solve(bmat, self.a)
            self.xb = np.linalg.solve(bmat, self.b - self.a @ self.nonbasic_values())
        except np.linalg.LinAlgError as exc:
            raise _WarmStartFailed("singular basis") from exc
        lob = self.lo[self.basis]
        hib = self.hi[self.basis]
        if np.any(self.xb < lob - FEAS_TOL) or np.any(self.xb > hib + FEAS_TOL):
            raise _WarmStartFailed("basis not feasible for these bounds")

    def refresh(self) -> None:
        bmat = self.a[:, self.basis]
        try:
            self.tab = np.linalg.solve(bmat, self.a)
            self.xb = np.linalg.solve(bmat, self.b - self.a @ self.nonbasic_values())
        except np.linalg.LinAlgError as exc:
            raise LpFailure("basis matrix became singular during refresh") from exc

    # -- pivot loop ------------------------------------------------------

    def optimize(self, c: np.ndarray) -> str:
        m, n = self.m, self.n
        dantzig_limit = 5 * (m + n)
        cap = 100 * (m + n) + 1000
        movable = (self.hi - self.lo) > 0
        # the reduced-cost row is pivoted alongside the tableau instead of
        # being re-priced from scratch each iteration
        z = c - c[self.basis] @ self.tab
        z[self.basis] = 0.0
        lob = self.lo[self.basis]
        hib = self.hi[self.basis]
        for it in range(1, cap + 1):
            nb_lo = (self.state == _AT_LO) | (self.state == _FREE)
            nb_up = (self.state == _AT_UP) | (self.state == _FREE)
            imp_inc = movable & nb_lo & (z < -PIVOT_TOL)
            imp_dec = movable & nb_up & (z > PIVOT_TOL)
            improving = imp_inc | imp_dec
            if it <= dantzig_limit:
                score = np.abs(z) * improving
                j = int(np.argmax(score))
                if score[j] <= 0.0:
                    return "optimal"
            else:
                j = int(np.argmax(improving))
                if not improving[j]:
                    return "optimal"
            s = 1.0 if z[j] < 0 else -1.0

            delta = s * self.tab[:, j]
            ratios = np.full(m, np.inf)
            pos = delta > PIVOT_TOL
            neg = delta < -PIVOT_TOL
            ratios[pos] = (self.xb[pos] - lob[pos]) / delta[pos]
            ratios[neg] = (self.xb[neg] - hib[neg]) / delta[neg]
            np.maximum(ratios, 0.0, out=ratios)
            t_bound = float(np.min(ratios)) if m else np.inf
            t_self = np.inf if self.state[j] == _FREE else self.hi[j] - self.lo[j]
            step = min(t_bound, t_self)
            if not np.isfinite(step):
                return "unbounded"

            if t_self <= t_bound:
                # the entering variable hits its own opposite bound first
                self.xb -= t_self * delta
                self.state[j] = _AT_UP if self.state[j] == _AT_LO else _AT_LO
                continue

            # among tied leaving rows prefer the smallest variable index,
            # which together with Bland's entering rule prevents cycling
            cand = np.flatnonzero(ratios <= t_bound + 1e-12)
            row = int(cand[np.argmin(self.basis[cand])])
            if self.state[j] == _FREE:
                enter_val = s * step
            elif self.state[j] == _AT_LO:
                enter_val = self.lo[j] + s * step
            else:
                enter_val = self.hi[j] + s * step
            leave = self.basis[row]
            self.xb -= step * delta
            self.state[leave] = _AT_LO if delta[row] > 0 else _AT_UP
            piv = self.tab[row, j]
            row_scaled = self.tab[row] / piv
            col = self.tab[:, j].copy()
            self.tab -= np.outer(col, row_scaled)
            self.tab[row] = row_scaled
            z -= z[j] * row_scaled
            z[j] = 0.0
            self.xb[row] = enter_val
            self.basis[row] = j
            self.state[j] = _BASIC
            lob[row] = self.lo[j]
            hib[row] = self.hi[j]
            self.pivots += 1
            if self.pivots % 256 == 0:
                self.refresh()
                z = c - c[self.basis] @ self.tab
                z[self.basis] = 0.0
        raise LpFailure(f"simplex exceeded {cap} iterations")


def _extract(sx: _Simplex, c: np.ndarray, n_real: int, fell_back: bool) -> LpSolution:
    x = sx.values()[:n_real]
    obj = float(c @ x)
    if np.any(sx.basis >= n_real):
        basis = None  # an artificial stayed basic; not reusable for warm starts
    else:
        ups = frozenset(int(j) for j in np.flatnonzero(sx.state[:n_real] == _AT_UP))
        basis = Basis(tuple(int(i) for i in sx.basis), ups)
    return LpSolution(LpStatus.OPTIMAL, obj, x, basis, fell_back)


def _solve_cold(p: LpProblem, fell_back: bool = False) -> LpSolution:
    m, n = p.a_eq.shape
    # phase 1: append one artificial per row, signed so it starts at |resid|
    sx = _Simplex(
        np.hstack([p.a_eq, np.zeros((m, m))]),
        p.b_eq,
        np.concatenate([p.lo, np.zeros(m)]),
        np.concatenate([p.hi, np.full(m, np.inf)]),
    )
    states = sx.default_states()
    states[n:] = _AT_LO
    sx.state = states
    sx.basis = np.arange(n, n + m, dtype=np.intp)
    sx.state[sx.basis] = _BASIC
    resid = p.b_eq - p.a_eq @ sx.nonbasic_values()[:n]
    signs = np.where(resid < 0, -1.0, 1.0)
    sx.a[:, n:] = np.diag(signs)
    sx.tab = signs[:, None] * sx.a
    sx.xb = np.abs(resid)

    c1 = np.concatenate([np.zeros(n), np.ones(m)])
    if sx.optimize(c1) != "optimal":
        raise LpFailure("phase 1 reported an unbounded objective")
    if float(c1 @ sx.values()) > FEAS_TOL:
        return LpSolution(LpStatus.INFEASIBLE, float("nan"), None, None, fell_back)

    # drive leftover artificials out of the basis where possible
    for row in np.flatnonzero(sx.basis >= n):
        cols = np.flatnonzero(
            (np.abs(sx.tab[row, :n]) > PIVOT_TOL)
            & (sx.state[:n] != _BASIC)
            & ((sx.hi[:n] - sx.lo[:n]) > 0)
        )
        if cols.size == 0:
            continue  # redundant row; its artificial stays pinned at zero
        j = int(cols[0])
        enter_val = 0.0 if sx.state[j] == _FREE else (
            sx.lo[j] if sx.state[j] == _AT_LO else sx.hi[j]
        )
        leave = sx.basis[row]
        sx.state[leave] = _AT_LO
        piv = sx.tab[row, j]
        row_scaled = sx.tab[row] / piv
        col = sx.tab[:, j].copy()
        sx.tab -= np.outer(col, row_scaled)
        sx.tab[row] = row_scaled
        sx.xb[row] = enter_val
        sx.basis[row] = j
        sx.state[j] = _BASIC

    # phase 2: real objective; artificials pinned so they can never move
    sx.lo[n:] = 0.0
    sx.hi[n:] = 0.0
    c2 = np.concatenate([p.c, np.zeros(m)])
    status = sx.optimize(c2)
    if status == "unbounded":
        return LpSolution(LpStatus.UNBOUNDED, float("-inf"), None, None, fell_back)
    return _extract(sx, p.c, n, fell_back)


def _solve_warm(p: LpProblem, warm: Basis) -> LpSolution:
    m, n = p.a_eq.shape
    idx = np.asarray(warm.indices, dtype=np.intp)
    if idx.shape != (m,) or len(set(warm.indices)) != m or idx.min() < 0 or idx.max() >= n:
        raise _WarmStartFailed("basis does not index this problem")
    states = np.full(n, _FREE, dtype=np.int8)
    states[np.isfinite(p.lo)] = _AT_LO
    for j in warm.at_upper:
        if not np.isfinite(p.hi[j]):
            raise _WarmStartFailed("at_upper variable has no finite upper bound")
        states[j] = _AT_UP
    sx = _Simplex(p.a_eq, p.b_eq, p.lo, p.hi)
    sx.load_basis(idx, states)
    status = sx.optimize(p.c.copy())
    if status == "unbounded":
        return LpSolution(LpStatus.UNBOUNDED, float("-inf"), None, None, False)
    return _extract(sx, p.c, n, False)


def solve(p: LpProblem, initial_basis: Basis | None = None) -> LpSolution:
    """Solve the LP; an optional starting basis skips phase 1 when it is
    still feasible, falling back to a cold solve (flagged) otherwise."""
    if initial_basis is not None:
        try:
            return _solve_warm(p, initial_basis)
        except _WarmStartFailed:
            return _solve_cold(p, fell_back=True)
    return _solve_cold(p)


def resolve_negated(p: LpProblem, warm: Basis) -> LpSolution:
    """Re-solve over the same feasible set from a basis that was optimal
    for the negated objective; equivalent to solve(p) up to tie-breaking."""
    return solve(p, initial_basis=warm)


def negated(p: LpProblem) -> LpProblem:
    return replace(p, c=-p.c)

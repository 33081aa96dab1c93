"""Ratio estimation over a body schedule and the full volume pipeline.

Each telescoping ratio vol(inner)/vol(outer) is estimated by streaming
points from the outer body one at a time and tracking the running hit
fraction r = hits/points.  The last k values of r live in a sliding
window; once the window is full and the half-width criterion

    2 * z * s / (r - z * s) <= eps_i / 2

holds (s the window's population std, z a normal quantile shared across
the run's m+1 ratios so the whole product stays within its target with
probability 3/4), the ratio is declared converged.  Ratios seeded from the
annealing probes start their running count at the probe's hit proportion
instead of zero.

`volume` glues everything together: pick an interior point and a walk,
build the schedule, split the error budget over the ratios, estimate each
one, and assemble the telescoping product in log domain.  A zonotope may
use the carved H-polytope template, in which case the terminal body has no
closed-form volume and is priced by a recursive ball-template run on its
own error share.
"""

from __future__ import annotations

import math
import time
from collections import deque
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import special

from . import annealing
from .annealing import CoolingParams, anneal, anneal_hbody, initial_q_bounds
from .bodies import (
    Ball,
    HPolytope,
    IntersectionBody,
    ShiftedHBody,
    VPolytope,
    Zonotope,
    chebyshev_center,
    enclosing_ellipsoid,
    round_vpolytope,
    zonotope_to_hbody,
)
from .errors import NumericError
from .sampling import HnRChain, StepCounter, WalkConfig, rng_stream, sample_ball

STEP_CAP = 10**8
# Zonotope order at or below which the H-polytope template wins ties.
HBODY_ORDER_CUTOFF = 4.0


class SlidingWindow:
    """Fixed-capacity queue with O(1) running mean and population std.

    Accumulators drift by eviction round-off, so they are recomputed from
    the queue once per `capacity` evictions; that keeps the stats within
    1e-9 of a direct recomputation at amortized constant cost.
    """

    def __init__(self, capacity: int):
        if capacity < 2:
            raise ValueError("window capacity must be at least 2")
        self.capacity = capacity
        self._queue: deque = deque()
        self._sum = 0.0
        self._sumsq = 0.0
        self._evictions = 0

    def __len__(self) -> int:
        return len(self._queue)

    @property
    def full(self) -> bool:
        return len(self._queue) == self.capacity

    def push(self, value: float) -> None:
        self._queue.append(value)
        self._sum += value
        self._sumsq += value * value
        if len(self._queue) > self.capacity:
            old = self._queue.popleft()
            self._sum -= old
            self._sumsq -= old * old
            self._evictions += 1
            if self._evictions % self.capacity == 0:
                self._refresh()

    def _refresh(self) -> None:
        self._sum = math.fsum(self._queue)
        self._sumsq = math.fsum(v * v for v in self._queue)

    @property
    def mean(self) -> float:
        return self._sum / len(self._queue)

    @property
    def std(self) -> float:
        n = len(self._queue)
        var = self._sumsq / n - (self._sum / n) ** 2
        return math.sqrt(max(var, 0.0))


@dataclass(frozen=True)
class ErrorBudget:
    """Per-ratio error shares; squares sum to at most the total's square."""

    per_ratio: tuple          # budgets for ratios r_0 .. r_m
    recursive: float | None   # budget of the recursive terminal volume, if any
    total: float

    def squared_sum(self) -> float:
        extra = self.recursive**2 if self.recursive is not None else 0.0
        return sum(e * e for e in self.per_ratio) + extra


def split_error(epsilon: float, m: int, terminal_is_hbody: bool) -> ErrorBudget:
    """Divide a total relative error over the m+1 ratios of a schedule.

    With a ball terminal the last ratio gets eps/(2*sqrt(m+1)) and the rest
    share the remaining mass equally, which makes the squares sum exactly.
    With an H-polytope terminal the recursive volume takes that share
    instead and all m+1 ratios split eps*sqrt(2m+1)/sqrt(2m+2) evenly; the
    squares then undershoot, which only makes the result conservative.
    """
    if not 0.0 < epsilon <= 1.0:
        raise ValueError("epsilon must be in (0, 1]")
    if m < 0:
        raise ValueError("phase count must be nonnegative")
    if terminal_is_hbody:
        recursive = epsilon / (2.0 * math.sqrt(m + 1))
        shared = epsilon * math.sqrt(2 * m + 1) / math.sqrt(2 * m + 2)
        per = shared / math.sqrt(m + 1)
        return ErrorBudget((per,) * (m + 1), recursive, epsilon)
    if m == 0:
        # single-factor product: no splitting needed
        return ErrorBudget((epsilon,), None, epsilon)
    last = epsilon / (2.0 * math.sqrt(m + 1))
    shared = epsilon * math.sqrt(4 * (m + 1) - 1) / (2.0 * math.sqrt(m + 1))
    per = shared / math.sqrt(m)
    return ErrorBudget((per,) * m + (last,), None, epsilon)


def inverse_normal_quantile(q: float) -> float:
    """Standard normal quantile, Phi^{-1}(q)."""
    if not 0.0 < q < 1.0:
        raise ValueError("quantile argument must be in (0, 1)")
    return float(special.ndtri(q))


def ball_volume_log(d: int, radius: float) -> float:
    """log of the d-ball volume r^d * pi^(d/2) / Gamma(d/2 + 1)."""
    if d < 1:
        raise ValueError("dimension must be positive")
    if radius <= 0:
        raise ValueError("radius must be positive")
    return d * math.log(radius) + 0.5 * d * math.log(math.pi) - math.lgamma(0.5 * d + 1.0)


def estimate_ratio(
    outer,
    inner,
    eps_i: float,
    m: int,
    k: int,
    rng,
    sampler=None,
    *,
    walk: WalkConfig | None = None,
    start: np.ndarray | None = None,
    counter: StepCounter | None = None,
    seed: tuple | None = None,
    info: dict | None = None,
) -> float:
    """Estimate vol(inner)/vol(outer) for inner contained in outer.

    Outer points come from `sampler` if given, exact draws when outer is a
    ball, else a Hit-and-Run chain from `start`.  `seed` is an optional
    (hits, count) pair that pre-loads the running ratio.  The confidence
    multiplier z matches a per-ratio failure share of 1 - (3/4)^(1/(m+1)).
    When the window std swallows the mean (r - z*s <= 0) the convergence
    check is skipped and sampling continues.
    """
    if sampler is None:
        if isinstance(outer, Ball):
            sampler = lambda: sample_ball(rng, outer)
        elif start is not None:
            chain = HnRChain(outer, start, walk or WalkConfig("rdhr", 1), rng, counter)
            sampler = chain.draw
        else:
            raise ValueError("need a sampler or a start point for non-ball outer bodies")
    share = 1.0 - (3.0 / 4.0) ** (1.0 / (m + 1))
    z = inverse_normal_quantile(1.0 - share / 2.0)
    window = SlidingWindow(k)
    hits, count = 0, 0
    if seed is not None:
        hits, count = seed
        window.push(hits / count)
    fresh = 0
    ratio = hits / count if count else 0.0
    while True:
        if fresh >= STEP_CAP:
            raise NumericError(
                f"ratio estimation did not converge within {STEP_CAP} points "
                f"(budget {eps_i:.4g})"
            )
        x = sampler()
        fresh += 1
        count += 1
        if inner.contains(x):
            hits += 1
        ratio = hits / count
        window.push(ratio)
        if window.full:
            s = window.std
            denom = ratio - z * s
            if denom > 0.0 and 2.0 * z * s / denom <= 0.5 * eps_i:
                break
    if info is not None:
        info["points"] = fresh
        info["naive_ci"] = z * math.sqrt(max(ratio * (1.0 - ratio), 0.0) / count)
    return ratio


@dataclass(frozen=True)
class VolumeConfig:
    epsilon: float = 0.1
    body: str = "auto"     # ball | hpoly | auto
    walk: str = "auto"     # cdhr | rdhr | auto
    seed: int = 0
    rounding: bool = False
    window: int | None = None  # override the default 2d^2+250

    def __post_init__(self):
        if not 0.0 < self.epsilon <= 1.0:
            raise ValueError("epsilon must be in (0, 1]")
        if self.body not in ("ball", "hpoly", "auto"):
            raise ValueError(f"unknown body template {self.body!r}")
        if self.walk not in ("cdhr", "rdhr", "auto"):
            raise ValueError(f"unknown walk {self.walk!r}")


@dataclass
class VolumeReport:
    representation: str
    d: int
    size: int              # facet, vertex, or generator count
    epsilon: float
    seed: int
    body: str
    walk: str
    m: int
    ratios: list
    steps_total: int
    log_volume: float
    volume: float
    time_seconds: float
    schedule: list = field(default_factory=list)

    def as_dict(self) -> dict:
        vol = self.volume if math.isfinite(self.volume) else None
        return {
            "representation": self.representation,
            "d": self.d,
            "k_or_facets_or_vertices": self.size,
            "epsilon": self.epsilon,
            "seed": self.seed,
            "body": self.body,
            "walk": self.walk,
            "m": self.m,
            "ratios": self.ratios,
            "steps_total": self.steps_total,
            "log_volume": self.log_volume,
            "volume": vol,
            "time_seconds": self.time_seconds,
            "schedule": self.schedule,
        }


def _representation(p) -> tuple[str, int, int]:
    if isinstance(p, HPolytope):
        return "h", p.dim, p.a.shape[0]
    if isinstance(p, VPolytope):
        return "v", p.dim, p.vertices.shape[0]
    if isinstance(p, Zonotope):
        return "z", p.dim, p.generators.shape[1]
    raise TypeError(f"cannot compute the volume of {type(p).__name__}")


def _interior_point(p, rep: str) -> np.ndarray:
    if rep == "h":
        center, _ = chebyshev_center(p)
        return center
    if rep == "z":
        return np.zeros(p.dim)
    _, center = enclosing_ellipsoid(p)
    return center


def _resolve_walk(mode: str, rep: str) -> str:
    if mode != "auto":
        return mode
    return "cdhr" if rep == "h" else "rdhr"


def _pick_zonotope_template(z, params, rng, walk, counter, shared_pts):
    """Template choice by measured capture: probe both terminal bodies and
    keep the one holding more of the zonotope's own sample; within noise,
    low order favors the carved H-polytope."""
    ball = Ball(np.zeros(z.dim), 1.0)
    q_hi = float(ball.scale_needed(shared_pts).max())
    init_ball = annealing.initial_terminal_search(
        z, ball, params, 0.0, q_hi, rng, counter=counter)
    hb = zonotope_to_hbody(z)
    init_hb = annealing.initial_terminal_search(
        z, hb, params, 0.0, 1.0, rng, init_walk_steps=10 + 2 * z.dim,
        band_tol=annealing.BAND_TOL_RELATIVE, counter=counter)

    n = shared_pts.shape[0]
    f_ball = float(np.mean(ball.at(init_ball.terminal_scale).contains_many(shared_pts)))
    f_hb = float(np.mean(hb.at(init_hb.terminal_scale).contains_many(shared_pts)))
    spread = 2.0 * (
        math.sqrt(max(f_ball * (1 - f_ball), 0.0) / n)
        + math.sqrt(max(f_hb * (1 - f_hb), 0.0) / n)
    )
    if abs(f_ball - f_hb) <= spread:
        use_hbody = z.order <= HBODY_ORDER_CUTOFF
    else:
        use_hbody = f_hb > f_ball
    if use_hbody:
        return "hpoly", hb, init_hb, (0.0, 1.0)
    return "ball", ball, init_ball, (0.0, q_hi)


def volume(p, cfg: VolumeConfig | None = None) -> VolumeReport:
    """Approximate vol(p) to relative error epsilon with confidence 3/4."""
    cfg = cfg or VolumeConfig()
    t0 = time.perf_counter()
    rng = rng_stream(cfg.seed)
    counter = StepCounter()
    rep, d, size = _representation(p)

    log_offset = 0.0
    target = p
    if cfg.rounding:
        if rep != "v":
            raise ValueError("rounding applies only to vertex-represented polytopes")
        rounded = round_vpolytope(p)
        target = rounded.body
        log_offset = -rounded.log_det_map

    body_used, log_vol, m, ratios, schedule_diag = _run(target, cfg, rep, rng, counter)
    log_vol += log_offset
    with np.errstate(over="ignore"):
        linear = float(np.exp(log_vol))
    return VolumeReport(
        representation=rep,
        d=d,
        size=size,
        epsilon=cfg.epsilon,
        seed=cfg.seed,
        body=body_used,
        walk=_resolve_walk(cfg.walk, rep),
        m=m,
        ratios=ratios,
        steps_total=counter.n,
        log_volume=log_vol,
        volume=linear,
        time_seconds=time.perf_counter() - t0,
        schedule=schedule_diag,
    )


def _run(p, cfg: VolumeConfig, rep: str, rng, counter: StepCounter):
    """One schedule + estimation pass; returns
    (body string, log volume, m, ratios, diagnostics)."""
    d = p.dim
    params = CoolingParams.for_dimension(d)
    walk = WalkConfig(_resolve_walk(cfg.walk, rep), 1)
    interior = _interior_point(p, rep)

    if cfg.body == "hpoly" and rep != "z":
        raise ValueError("the hpoly template requires a zonotope")

    body_used = cfg.body
    if cfg.body == "auto" and rep != "z":
        body_used = "ball"

    if body_used == "ball":
        template = Ball(interior, 1.0)
        s_min, s_max, pts = initial_q_bounds(
            p, template, params, rng, walk=walk, interior=interior, counter=counter)
        schedule = anneal(
            p, template, params, s_min, s_max, rng, walk=walk, interior=interior,
            first_phase_points=pts, counter=counter)
    elif body_used == "hpoly":
        schedule = anneal_hbody(z=p, params=params, rng=rng, walk=walk, counter=counter)
        template = schedule.template
    else:
        chain = HnRChain(p, interior, walk, rng, counter)
        shared = chain.draw_many(params.total)
        body_used, template, init, (s_min, s_max) = _pick_zonotope_template(
            p, params, rng, walk, counter, shared)
        schedule = anneal(
            p, template, params, s_min, s_max, rng, walk=walk, interior=interior,
            first_phase_points=shared, init=init, counter=counter)

    m = schedule.phase_count
    terminal_is_hbody = isinstance(template, ShiftedHBody)
    budget = split_error(cfg.epsilon, m, terminal_is_hbody)
    k = cfg.window if cfg.window is not None else 2 * d * d + 250

    ratios = []
    estimation_diag = []
    log_vol = 0.0
    for i in range(m):
        outer = p if i == 0 else IntersectionBody(schedule.bodies[i - 1], p)
        inner = schedule.bodies[i]
        info: dict = {}
        r = estimate_ratio(
            outer, inner, budget.per_ratio[i], m, k, rng,
            walk=walk, start=interior, counter=counter,
            seed=schedule.seed_ratios[i], info=info)
        ratios.append(r)
        estimation_diag.append({"ratio_index": i, **info})
        log_vol -= math.log(r)

    # last ratio: sample the terminal body itself against p
    terminal = schedule.terminal_body
    info = {}
    if isinstance(terminal, Ball):
        r_last = estimate_ratio(
            terminal, p, budget.per_ratio[m], m, k, rng,
            counter=counter, seed=schedule.seed_ratios[m], info=info)
    else:
        r_last = estimate_ratio(
            terminal.as_hpolytope(), p, budget.per_ratio[m], m, k, rng,
            walk=walk, start=np.zeros(d), counter=counter,
            seed=schedule.seed_ratios[m], info=info)
    ratios.append(r_last)
    estimation_diag.append({"ratio_index": m, **info})
    log_vol += math.log(r_last)

    diagnostics = list(schedule.diagnostics)
    if terminal_is_hbody:
        sub_cfg = replace(cfg, epsilon=budget.recursive, body="ball",
                          rounding=False, window=cfg.window)
        _, sub_log, sub_m, sub_ratios, sub_diag = _run(
            terminal.as_hpolytope(), sub_cfg, "h", rng, counter)
        log_vol += sub_log
        diagnostics.append(
            {"phase": "terminal", "log_volume": sub_log, "m": sub_m,
             "ratios": sub_ratios, "schedule": sub_diag})
    else:
        log_vol += ball_volume_log(d, schedule.terminal_scale)

    diagnostics.append({"phase": "estimation", "ratios": estimation_diag})
    return body_used, log_vol, m, ratios, diagnostics

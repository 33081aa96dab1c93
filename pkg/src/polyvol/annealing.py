"""Simulated-annealing construction of a telescoping body schedule.

Given a convex body P and a scalable template C (a ball, or the symmetric
H-polytope carved from a zonotope), the schedule finds scales
s_1 > s_2 > ... > s_m so that with P_0 = P and P_i = C(s_i) intersected
with P, every consecutive volume ratio lies (with statistical confidence)
in a fixed window [low, low+band].  The telescoping product of those
ratios later turns an easy volume, vol(C(s_m)), into vol(P).

Each probe of a candidate scale draws nu lists of N points and runs two
one-sided t tests at significance alpha on the per-list ratios:

    certify above:  mean >= bound + t_quantile(nu-1, alpha) * sd / sqrt(nu)
    certify below:  mean <= bound - t_quantile(nu-1, alpha) * sd / sqrt(nu)

Both passing accepts the scale; exactly one passing steers a bisection;
none passing (or a pooled ratio too degenerate for the normal
approximation, N*r(1-r) <= 10) triggers a fresh resample.  The
initialization search ratio vol(sC cap P)/vol(sC) falls as s grows, so its
bisection runs mirror-image to the regular steps, whose ratio
vol(sC cap P)/vol(P_i) rises with s; when even the largest candidate body
keeps the initialization ratio above the window, the upper bound is
doubled until a bracket exists.  A step is final when the terminal body
already captures at least `low` of the current phase by the same test, and
every pooled probe ratio is kept so the later ratio estimation can start
warm instead of from scratch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .bodies import Ball, IntersectionBody
from .errors import ScheduleFailure
from .sampling import HnRChain, StepCounter, WalkConfig, sample_ball_many

# Points per probe when the template itself is sampled (initialization).
INIT_TOTAL = 1200
# Bracket width below which a one-sided outcome is treated as test noise.
BAND_TOL_RELATIVE = 1e-4
# Doublings of the search upper bound before giving up.
MAX_EXPANSIONS = 60


@dataclass(frozen=True)
class CoolingParams:
    """Statistical knobs of the schedule tests."""

    ratio_low: float = 0.1       # lower edge of the target ratio window
    band: float = 0.05           # window width; target is [low, low+band]
    significance: float = 0.10   # alpha of each one-sided t test
    lists: int = 10              # nu: number of sub-lists per probe
    points_per_list: int = 140   # N: points per sub-list for walk-sampled phases

    @property
    def total(self) -> int:
        return self.lists * self.points_per_list

    @classmethod
    def for_dimension(cls, d: int) -> "CoolingParams":
        per_list = -(-(1200 + 2 * d * d) // 10)  # ceil
        return cls(points_per_list=per_list)


@dataclass
class InitResult:
    """Outcome of the terminal-body search."""

    terminal_scale: float
    seed: tuple          # (hits, total) of the accepting probe
    upper_bound: float   # search upper bound after any expansion
    band_tol: float
    diagnostics: dict


@dataclass
class ScheduleResult:
    template: object
    scales: list            # s_1 > ... > s_m; the last one is the terminal body
    bodies: list            # template.at(s_i), same order
    seed_ratios: list       # (successes, total) for ratios r_0 ... r_m
    diagnostics: list
    upper_bound: float      # effective search upper bound after any expansion

    @property
    def phase_count(self) -> int:
        return len(self.scales)

    @property
    def terminal_scale(self) -> float:
        return self.scales[-1]

    @property
    def terminal_body(self):
        return self.bodies[-1]


def t_quantile(dof: int, alpha: float) -> float:
    """Upper-tail Student-t quantile: P(T_dof > value) = alpha."""
    if dof < 1:
        raise ValueError("degrees of freedom must be >= 1")
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must be in (0, 1)")
    return float(special.stdtrit(dof, 1.0 - alpha))


def certify_ratio_above(ratios: np.ndarray, bound: float, significance: float) -> bool:
    """One-sided t test that the mean ratio exceeds `bound`."""
    ratios = np.asarray(ratios, dtype=float)
    n = ratios.size
    mean = float(ratios.mean())
    sd = float(ratios.std(ddof=1)) if n > 1 else 0.0
    return mean >= bound + t_quantile(n - 1, significance) * sd / math.sqrt(n)


def certify_ratio_below(ratios: np.ndarray, bound: float, significance: float) -> bool:
    """One-sided t test that the mean ratio is under `bound`."""
    ratios = np.asarray(ratios, dtype=float)
    n = ratios.size
    mean = float(ratios.mean())
    sd = float(ratios.std(ddof=1)) if n > 1 else 0.0
    return mean <= bound - t_quantile(n - 1, significance) * sd / math.sqrt(n)


def ratios_from_sample(flags: np.ndarray, lists: int) -> np.ndarray:
    """Partition per-point membership flags round-robin into `lists` lists and
    return each list's hit fraction.

    The assignment is point j -> list j mod `lists`.  For independent draws
    any partition gives the same distribution, but walk samples arrive as a
    correlated trace; consecutive chunks would each see a different stretch of
    the trace and the between-list spread would swamp the t tests.  Striding
    gives every list the same coverage of the trace, which is as close to the
    exchangeable design the tests assume as a single chain allows.
    """
    flags = np.asarray(flags)
    if flags.size % lists != 0:
        raise ValueError(f"{flags.size} flags do not split into {lists} lists")
    return flags.reshape(-1, lists).T.mean(axis=1)


def probe_outcome(
    flags: np.ndarray, params: CoolingParams, points_per_list: int
) -> tuple[bool, bool, float]:
    """(certified above low, certified below low+band, pooled ratio).

    When the pooled hit count is so lopsided that the normal approximation
    behind the t test breaks down (N * r * (1-r) <= 10), the outcome is
    decided by which side of the window the pooled ratio violates; a
    degenerate probe can steer the search but never double-certify.
    """
    pooled = float(np.asarray(flags).mean())
    if points_per_list * pooled * (1.0 - pooled) <= 10.0:
        if pooled < params.ratio_low:
            return False, True, pooled
        return True, False, pooled
    ratios = ratios_from_sample(flags, params.lists)
    above = certify_ratio_above(ratios, params.ratio_low, params.significance)
    below = certify_ratio_below(
        ratios, params.ratio_low + params.band, params.significance
    )
    return above, below, pooled


def initial_q_bounds(p, template, params: CoolingParams, rng, *,
                     walk: WalkConfig, interior: np.ndarray,
                     counter: StepCounter | None = None):
    """Search interval for the template scale: (0, smallest scale whose body
    holds every one of nu*N walk samples of p).  The samples are returned so
    the first schedule phase can reuse them."""
    chain = HnRChain(p, interior, walk, rng, counter)
    pts = chain.draw_many(params.total)
    needed = template.scale_needed(pts)
    return 0.0, float(needed.max()), pts


def _template_center(template) -> np.ndarray:
    if isinstance(template, Ball):
        return template.center
    return np.zeros(template.dim)


def _sample_template(template, scale, n, rng, walk_steps, counter):
    body = template.at(scale)
    if isinstance(body, Ball):
        return sample_ball_many(rng, body, n)
    cfg = WalkConfig("cdhr", walk_steps)
    chain = HnRChain(body.as_hpolytope(), _template_center(template), cfg, rng, counter)
    return chain.draw_many(n)


class _ProbeBudget:
    def __init__(self, d: int, s_min: float, s_max: float, diagnostics):
        span = s_max / s_min if s_min > 0 else 10.0
        self.cap = 20 * math.ceil(d * math.log2(max(span, 10.0)))
        self.used = 0
        self.diagnostics = diagnostics

    def spend(self) -> None:
        self.used += 1
        if self.used > self.cap:
            raise ScheduleFailure(
                f"annealing spent {self.used} probes without terminating "
                f"(cap {self.cap}); the ratio tests keep contradicting each other",
                self.diagnostics,
            )


def initial_terminal_search(
    p,
    template,
    params: CoolingParams,
    s_min: float,
    s_max: float,
    rng,
    *,
    init_total: int = INIT_TOTAL,
    init_walk_steps: int | None = None,
    band_tol: float | None = None,
    counter: StepCounter | None = None,
    budget: _ProbeBudget | None = None,
) -> InitResult:
    """Find the terminal scale: the body whose overlap fraction with p,
    relative to its own volume, sits in the ratio window.  That fraction
    falls as the body grows, and can stay above the window even at s_max
    when p spills past every candidate, so the bound doubles until the far
    side is certified before bisection starts."""
    diag = {"phase": "init", "probes": [], "resamples": 0}
    if budget is None:
        budget = _ProbeBudget(template.dim, s_min, s_max, [diag])
    if band_tol is None:
        band_tol = BAND_TOL_RELATIVE * (s_max - s_min)
    per_list = -(-init_total // params.lists)
    count = per_list * params.lists

    def probe(scale: float, kind: str, lo: float, hi: float):
        budget.spend()
        pts = _sample_template(template, scale, count, rng, init_walk_steps, counter)
        flags = p.contains_many(pts)
        above, below, pooled = probe_outcome(flags, params, per_list)
        diag["probes"].append(
            {"kind": kind, "scale": scale, "lo": lo, "hi": hi,
             "above": above, "below": below, "pooled": pooled}
        )
        return above, below, int(flags.sum())

    lo, hi = s_min, s_max
    expansions = 0
    accepted = None
    while accepted is None:
        above, below, hits = probe(hi, "expand", lo, hi)
        if above and below:
            accepted = (hi, hits)
        elif above:
            # the whole bracket still sits above the window: push it out
            expansions += 1
            if expansions > MAX_EXPANSIONS:
                raise ScheduleFailure(
                    "cannot bracket the terminal body: the template keeps "
                    "capturing too much of p even at the largest scale probed",
                    [diag],
                )
            lo, hi = hi, (2.0 * hi if hi > 0 else 1.0)
            band_tol = max(band_tol, BAND_TOL_RELATIVE * (hi - s_min))
        elif below:
            break  # valid bracket: ratio below window at hi, above it at lo
        else:
            diag["resamples"] += 1
    while accepted is None:
        scale = 0.5 * (lo + hi)
        above, below, hits = probe(scale, "bisect", lo, hi)
        if above and below:
            accepted = (scale, hits)
        elif (hi - lo) <= band_tol or (above == below):
            diag["resamples"] += 1  # noise floor or contradiction: fresh points
        elif above:
            lo = scale  # ratio still above the window: need a larger body
        else:
            hi = scale
    terminal_scale, hits = accepted
    diag["scale"] = terminal_scale
    return InitResult(
        terminal_scale=terminal_scale,
        seed=(hits, count),
        upper_bound=max(s_max, hi),
        band_tol=band_tol,
        diagnostics=diag,
    )


def anneal(
    p,
    template,
    params: CoolingParams,
    s_min: float,
    s_max: float,
    rng,
    *,
    walk: WalkConfig,
    interior: np.ndarray,
    init_total: int = INIT_TOTAL,
    init_walk_steps: int | None = None,
    first_phase_points: np.ndarray | None = None,
    band_tol: float | None = None,
    counter: StepCounter | None = None,
    init: InitResult | None = None,
) -> ScheduleResult:
    """Build the full schedule; see the module docstring for the moving parts.

    `init_walk_steps` only matters for templates without an exact sampler
    (walk length per point when probing the template body directly).
    `first_phase_points` lets the caller reuse the sample that fixed s_max,
    and `init` a terminal-body search already performed elsewhere.
    """
    diagnostics: list = []
    budget = _ProbeBudget(template.dim, s_min, s_max, diagnostics)
    if init is None:
        init = initial_terminal_search(
            p, template, params, s_min, s_max, rng,
            init_total=init_total, init_walk_steps=init_walk_steps,
            band_tol=band_tol, counter=counter, budget=budget,
        )
    diagnostics.append(init.diagnostics)
    terminal_scale = init.terminal_scale
    upper = init.upper_bound
    band_tol = init.band_tol

    # regular steps: peel off one ratio-window body per phase
    scales: list = []
    step_seeds: list = []
    stop_seed = None
    while stop_seed is None:
        diag = {"phase": "step", "probes": [], "resamples": 0}
        diagnostics.append(diag)
        outer = p if not scales else IntersectionBody(template.at(scales[-1]), p)
        if first_phase_points is not None and not scales:
            pts = first_phase_points
        else:
            pts = HnRChain(outer, interior, walk, rng, counter).draw_many(params.total)
        needed = template.scale_needed(pts)

        budget.spend()
        stop_flags = needed <= terminal_scale
        above, below, pooled = probe_outcome(stop_flags, params, params.points_per_list)
        diag["probes"].append(
            {"kind": "stop", "scale": terminal_scale, "lo": terminal_scale,
             "hi": upper, "above": above, "below": below, "pooled": pooled}
        )
        if above:
            stop_seed = (int(stop_flags.sum()), params.total)
            diag["scale"] = terminal_scale
            break

        lo2, hi2 = terminal_scale, upper
        while True:
            scale = 0.5 * (lo2 + hi2)
            budget.spend()
            flags = needed <= scale
            above, below, pooled = probe_outcome(flags, params, params.points_per_list)
            diag["probes"].append(
                {"kind": "bisect", "scale": scale, "lo": lo2, "hi": hi2,
                 "above": above, "below": below, "pooled": pooled}
            )
            if above and below:
                scales.append(scale)
                step_seeds.append((int(flags.sum()), params.total))
                diag["scale"] = scale
                upper = scale
                break
            if (hi2 - lo2) <= band_tol or (above == below):
                # noise floor or contradiction: draw a fresh phase sample
                diag["resamples"] += 1
                pts = HnRChain(outer, interior, walk, rng, counter).draw_many(params.total)
                needed = template.scale_needed(pts)
                continue
            if above:
                hi2 = scale  # this phase ratio rises with scale
            else:
                lo2 = scale

    scales.append(terminal_scale)
    bodies = [template.at(s) for s in scales]
    return ScheduleResult(
        template=template,
        scales=scales,
        bodies=bodies,
        seed_ratios=[*step_seeds, stop_seed, init.seed],
        diagnostics=diagnostics,
        upper_bound=upper,
    )


def anneal_hbody(
    z,
    params: CoolingParams,
    rng,
    *,
    walk: WalkConfig,
    counter: StepCounter | None = None,
    template=None,
    init: InitResult | None = None,
) -> ScheduleResult:
    """Schedule for a zonotope using its inscribed H-polytope template.

    The interpolation parameter runs over [0, 1] between the inscribed body
    and the support-offset body that contains z, so no sampling is needed to
    bound the search; probing the template draws walk points with a long
    step (10 + 2d) since there is no exact sampler."""
    from .bodies import zonotope_to_hbody

    if template is None:
        template = zonotope_to_hbody(z)
    d = z.dim
    return anneal(
        z,
        template,
        params,
        0.0,
        1.0,
        rng,
        walk=walk,
        interior=np.zeros(d),
        init_walk_steps=10 + 2 * d,
        band_tol=BAND_TOL_RELATIVE,
        counter=counter,
        init=init,
    )

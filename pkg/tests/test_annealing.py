"""Annealing schedule: t tests, probe outcomes, terminal-body search, full
schedules on bodies with known geometry, and the zonotope H-body variant."""

import math

import numpy as np
import pytest
from scipy import integrate, optimize

from polyvol.annealing import (
    CoolingParams,
    anneal,
    anneal_hbody,
    certify_ratio_above,
    certify_ratio_below,
    initial_q_bounds,
    initial_terminal_search,
    probe_outcome,
    ratios_from_sample,
    t_quantile,
)
from polyvol.bodies import Ball, HPolytope, zonotope_to_hbody
from polyvol.errors import ScheduleFailure
from polyvol.generators import cube, zono
from polyvol.sampling import (
    HnRChain,
    StepCounter,
    WalkConfig,
    rng_stream,
    sample_ball_many,
)


def t_quantile_by_integration(dof: int, alpha: float) -> float:
    """Independent oracle: invert the numerically integrated t density."""
    const = math.gamma((dof + 1) / 2.0) / (math.sqrt(dof * math.pi) * math.gamma(dof / 2.0))

    def density(x):
        return const * (1.0 + x * x / dof) ** (-(dof + 1) / 2.0)

    def upper_tail(q):
        val, _ = integrate.quad(density, q, np.inf)
        return val - alpha

    return optimize.brentq(upper_tail, 0.0, 500.0, xtol=1e-10)


class TestTQuantile:
    def test_frozen_values(self):
        assert t_quantile(9, 0.10) == pytest.approx(1.383029, abs=1e-6)
        assert t_quantile(1, 0.25) == pytest.approx(1.0, abs=1e-9)
        assert t_quantile(10**6, 0.05) == pytest.approx(1.644854, abs=1e-5)

    @pytest.mark.parametrize("dof,alpha", [(1, 0.1), (4, 0.05), (9, 0.10), (30, 0.01)])
    def test_against_integration_oracle(self, dof, alpha):
        assert t_quantile(dof, alpha) == pytest.approx(
            t_quantile_by_integration(dof, alpha), abs=1e-6)

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            t_quantile(0, 0.1)
        with pytest.raises(ValueError):
            t_quantile(5, 0.0)


class TestCertifyTests:
    def test_zero_variance_above(self):
        ratios = np.full(10, 0.5)
        assert certify_ratio_above(ratios, 0.1, 0.1)

    def test_zero_variance_below_fails_when_over(self):
        ratios = np.full(10, 0.5)
        assert not certify_ratio_below(ratios, 0.15, 0.1)

    def test_zero_variance_below(self):
        ratios = np.full(10, 0.12)
        assert certify_ratio_below(ratios, 0.15, 0.1)

    def test_synthetic_window_pass_rate(self):
        # iid per-list ratios drawn around the window center: both one-sided
        # tests should almost always certify
        rng = np.random.default_rng(99)
        passed = 0
        trials = 10_000
        for _ in range(trials):
            ratios = rng.normal(0.125, 0.01, size=10)
            if certify_ratio_above(ratios, 0.1, 0.1) and certify_ratio_below(ratios, 0.15, 0.1):
                passed += 1
        assert passed / trials >= 0.95

    def test_high_variance_blocks_certification(self):
        ratios = np.array([0.0, 0.3, 0.0, 0.3, 0.0, 0.3, 0.0, 0.3, 0.0, 0.3])
        assert not certify_ratio_above(ratios, 0.1, 0.1)
        assert not certify_ratio_below(ratios, 0.15, 0.1)


class TestRatiosFromSample:
    def test_all_hits(self):
        assert np.array_equal(ratios_from_sample(np.ones(100, dtype=bool), 10), np.ones(10))

    def test_no_hits(self):
        assert np.array_equal(ratios_from_sample(np.zeros(100, dtype=bool), 10), np.zeros(10))

    def test_round_robin_assignment(self):
        # point j goes to list j mod lists: alternating flags with 2 lists
        # land all hits in list 0
        flags = np.array([1, 0, 1, 0, 1, 0], dtype=bool)
        assert np.array_equal(ratios_from_sample(flags, 2), [1.0, 0.0])

    def test_indivisible_size_rejected(self):
        with pytest.raises(ValueError):
            ratios_from_sample(np.ones(7, dtype=bool), 2)

    def test_nested_balls_ratio(self):
        rng = rng_stream(21)
        pts = sample_ball_many(rng, Ball(np.zeros(2), 1.0), 1200)
        flags = np.linalg.norm(pts, axis=1) <= 0.9
        ratios = ratios_from_sample(flags, 10)
        assert ratios.mean() == pytest.approx(0.81, abs=0.03)


class TestProbeOutcome:
    def params(self):
        return CoolingParams(points_per_list=120)

    def test_degenerate_low_side(self):
        flags = np.zeros(1200, dtype=bool)
        flags[:2] = True
        above, below, pooled = probe_outcome(flags, self.params(), 120)
        assert (above, below) == (False, True)
        assert pooled == pytest.approx(2 / 1200)

    def test_degenerate_high_side(self):
        flags = np.ones(1200, dtype=bool)
        flags[:2] = False
        above, below, pooled = probe_outcome(flags, self.params(), 120)
        assert (above, below) == (True, False)

    def test_degenerate_never_double_certifies(self):
        for hits in (0, 1, 5, 1195, 1199, 1200):
            flags = np.zeros(1200, dtype=bool)
            flags[:hits] = True
            above, below, _ = probe_outcome(flags, self.params(), 120)
            assert not (above and below)

    def test_window_center_double_certifies(self):
        # 10 interleaved lists see identical content when hits arrive in
        # whole blocks of 10, so the spread is zero and both tests pass
        block = np.zeros((120, 10), dtype=bool)
        block[:15] = True
        flags = block.reshape(-1)
        above, below, pooled = probe_outcome(flags, self.params(), 120)
        assert pooled == pytest.approx(0.125)
        assert above and below


class TestInitialQBounds:
    def test_ball_radius_two(self):
        p = Ball(np.zeros(5), 2.0)
        params = CoolingParams.for_dimension(5)
        rng = rng_stream(31)
        q_min, q_max, pts = initial_q_bounds(
            p, Ball(np.zeros(5), 1.0), params, rng,
            walk=WalkConfig("rdhr", 1), interior=np.zeros(5))
        assert q_min == 0.0
        assert 1.5 <= q_max <= 2.0
        assert pts.shape == (params.total, 5)
        assert np.all(np.linalg.norm(pts, axis=1) <= q_max + 1e-12)


class TestAnnealBallInBall:
    def test_slightly_larger_ball_stops_in_initialization(self):
        d = 5
        p = Ball(np.zeros(d), 1.05)
        template = Ball(np.zeros(d), 1.0)
        params = CoolingParams.for_dimension(d)
        rng = rng_stream(41)
        q_min, q_max, pts = initial_q_bounds(
            p, template, params, rng, walk=WalkConfig("rdhr", 1), interior=np.zeros(d))
        res = anneal(p, template, params, q_min, q_max, rng,
                     walk=WalkConfig("rdhr", 1), interior=np.zeros(d),
                     first_phase_points=pts)
        assert res.phase_count == 1
        q_term = res.terminal_scale
        # the terminal ball contains p, so the accepted ratio is exactly
        # vol(p)/vol(q C) = (1.05/q)^d; the tests pinned it to the window
        assert q_term > 1.05
        assert 0.1 <= (1.05 / q_term) ** d <= 0.15
        # bracket expansion pushed the search bound beyond the sampled q_max
        assert res.upper_bound > q_max

    def test_cube_20_single_phase(self):
        p = cube(20)
        params = CoolingParams.for_dimension(20)
        rng = rng_stream(43)
        template = Ball(np.zeros(20), 1.0)
        q_min, q_max, pts = initial_q_bounds(
            p, template, params, rng, walk=WalkConfig("cdhr", 1), interior=np.zeros(20))
        res = anneal(p, template, params, q_min, q_max, rng,
                     walk=WalkConfig("cdhr", 1), interior=np.zeros(20),
                     first_phase_points=pts)
        assert res.phase_count == 1

    def test_determinism(self):
        d = 4
        p = Ball(np.zeros(d), 1.3)

        def run():
            params = CoolingParams.for_dimension(d)
            rng = rng_stream(47)
            template = Ball(np.zeros(d), 1.0)
            q_min, q_max, pts = initial_q_bounds(
                p, template, params, rng, walk=WalkConfig("rdhr", 1), interior=np.zeros(d))
            return anneal(p, template, params, q_min, q_max, rng,
                          walk=WalkConfig("rdhr", 1), interior=np.zeros(d),
                          first_phase_points=pts)

        a, b = run(), run()
        assert a.scales == b.scales
        assert a.seed_ratios == b.seed_ratios


def elongated_box(half_length: float) -> HPolytope:
    """Box [-1,1]^2 x [-L,L]: small enough waist that the terminal ball
    captures well under a tenth of the volume, forcing regular steps."""
    a = np.vstack([np.eye(3), -np.eye(3)])
    b = np.array([1.0, 1.0, half_length, 1.0, 1.0, half_length])
    return HPolytope(a, b)


def run_box_schedule(half_length, seed):
    p = elongated_box(half_length)
    params = CoolingParams.for_dimension(3)
    rng = rng_stream(seed)
    template = Ball(np.zeros(3), 1.0)
    counter = StepCounter()
    q_min, q_max, pts = initial_q_bounds(
        p, template, params, rng, walk=WalkConfig("cdhr", 1),
        interior=np.zeros(3), counter=counter)
    res = anneal(p, template, params, q_min, q_max, rng,
                 walk=WalkConfig("cdhr", 1), interior=np.zeros(3),
                 first_phase_points=pts, counter=counter)
    return p, res


class TestScheduleStructure:
    def test_multi_phase_schedule_on_elongated_box(self):
        p, res = run_box_schedule(40.0, 51)
        assert res.phase_count >= 2
        # scales strictly decrease and the bodies nest
        assert all(a > b for a, b in zip(res.scales, res.scales[1:]))
        rng = np.random.default_rng(0)
        pts = rng.uniform(-1.0, 1.0, size=(500, 3)) * np.array([1.0, 1.0, 40.0])
        for big, small in zip(res.bodies, res.bodies[1:]):
            inside_small = small.contains_many(pts)
            inside_big = big.contains_many(pts)
            assert np.all(inside_big[inside_small])

    def test_seed_ratios_cover_every_phase(self):
        _, res = run_box_schedule(40.0, 53)
        assert len(res.seed_ratios) == res.phase_count + 1
        for hits, total in res.seed_ratios:
            assert 0 <= hits <= total

    def test_diagnostics_replay_as_valid_bisection(self):
        _, res = run_box_schedule(40.0, 57)
        assert res.diagnostics[0]["phase"] == "init"
        for diag in res.diagnostics:
            assert diag["resamples"] >= 0
            for probe in diag["probes"]:
                lo, hi, scale = probe["lo"], probe["hi"], probe["scale"]
                assert lo <= hi
                if probe["kind"] == "bisect":
                    assert scale == 0.5 * (lo + hi)
                elif probe["kind"] == "expand":
                    assert scale == hi
                elif probe["kind"] == "stop":
                    assert scale == lo
            if "scale" in diag:
                last = diag["probes"][-1]
                assert last["lo"] - 1e-12 <= diag["scale"] <= last["hi"] + 1e-12

    def test_phase_count_brackets_volume_ratio(self):
        # two-sided phase-count check: with r=0.1 and delta=0.05, m should
        # fall between the telescoping bounds derived from the true volumes
        hits = 0
        runs = 10
        for seed in range(runs):
            half_length = 25.0 + 5.0 * (seed % 4)
            p, res = run_box_schedule(half_length, 800 + seed)
            m = res.phase_count
            vol_p = 4.0 * 2.0 * half_length
            vol_pm = mc_ball_box_overlap(res.terminal_scale, half_length, seed)
            ratio = vol_p / vol_pm
            low = math.floor(math.log(ratio) / math.log(1.0 / 0.15)) - 1
            high = math.ceil(math.log(ratio) / math.log(1.0 / 0.1)) + 1
            if low <= m <= high:
                hits += 1
        assert hits >= 0.9 * runs


def mc_ball_box_overlap(radius, half_length, seed, n=60_000):
    """MC volume of ball(0, radius) cut to the box [-1,1]^2 x [-L, L]."""
    rng = np.random.default_rng(10_000 + seed)
    cap = min(radius, half_length)
    box = np.array([min(radius, 1.0), min(radius, 1.0), cap])
    pts = rng.uniform(-box, box, size=(n, 3))
    inside = np.linalg.norm(pts, axis=1) <= radius
    return float(np.prod(2.0 * box)) * inside.mean()


class TestScheduleFailure:
    def test_degenerate_parameters_fail_loudly(self):
        # two points per list can never exceed the normal-approximation
        # guard, so no probe can double-certify and the budget runs out
        p = Ball(np.zeros(2), 3.0)
        params = CoolingParams(lists=2, points_per_list=2)
        rng = rng_stream(61)
        with pytest.raises(ScheduleFailure):
            initial_terminal_search(
                p, Ball(np.zeros(2), 1.0), params, 0.0, 3.0, rng, init_total=4)


class TestAnnealHBody:
    def test_low_order_zonotope_short_schedule(self):
        z = zono(10, 13, np.random.default_rng(71))
        params = CoolingParams.for_dimension(10)
        res = anneal_hbody(z, params, rng_stream(71), walk=WalkConfig("rdhr", 1))
        assert res.phase_count <= 3
        # interpolation parameters decrease toward the terminal body
        assert all(a > b for a, b in zip(res.scales, res.scales[1:]))

    def test_bodies_nest_statistically(self):
        z = zono(4, 7, np.random.default_rng(73))
        params = CoolingParams.for_dimension(4)
        res = anneal_hbody(z, params, rng_stream(73), walk=WalkConfig("rdhr", 1))
        rng = np.random.default_rng(1)
        signs = rng.choice([-1.0, 1.0], size=(1000, z.k))
        pts = signs @ z.generators.T * rng.uniform(0.0, 1.0, size=(1000, 1))
        for big, small in zip(res.bodies, res.bodies[1:]):
            inside_small = small.contains_many(pts)
            assert np.all(big.contains_many(pts)[inside_small])

    def test_terminal_ratio_against_mc_oracle(self):
        # the search certifies vol(C' cap z) / vol(C') into the ratio window;
        # re-estimate it with a long fresh walk over the terminal body
        z = zono(4, 7, np.random.default_rng(73))
        params = CoolingParams.for_dimension(4)
        res = anneal_hbody(z, params, rng_stream(73), walk=WalkConfig("rdhr", 1))
        chain = HnRChain(res.terminal_body.as_hpolytope(), np.zeros(4),
                         WalkConfig("cdhr", 5), rng_stream(2))
        pts = chain.draw_many(100_000)
        ratio = z.contains_many(pts).mean()
        assert 0.05 <= ratio <= 0.20

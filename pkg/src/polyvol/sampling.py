"""Seeded randomness, exact ball/sphere sampling, and Hit-and-Run walks.

Random state is always an explicit numpy Generator created by
``rng_stream(seed)``; the same seed reproduces the same stream bit for bit,
which the volume reports rely on.

Hit-and-Run works against any body exposing ``contains`` and
``line_intersection``.  ``HnRChain`` keeps per-facet products cached so a
coordinate-direction step over an H-polytope costs one pass over the
facets instead of a full matrix product; intersections of bodies are
flattened so each part keeps its own cache.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bodies import Ball, HPolytope, IntersectionBody, ShiftedHBody
from .errors import NumericError

# Chord endpoints are pulled inward by this fraction of the chord length so
# a sampled point never lands exactly on the boundary.
CHORD_MARGIN = 1e-10

# Recompute cached facet products from scratch this often (steps).
_CACHE_REFRESH = 10_000


def rng_stream(seed: int) -> np.random.Generator:
    """Independent deterministic stream for a 64-bit seed."""
    return np.random.Generator(np.random.PCG64(int(seed)))


@dataclass(frozen=True)
class WalkConfig:
    mode: str = "cdhr"  # "cdhr": random coordinate direction; "rdhr": random sphere direction
    steps_per_sample: int = 1

    def __post_init__(self):
        if self.mode not in ("cdhr", "rdhr"):
            raise ValueError(f"unknown walk mode {self.mode!r}")
        if self.steps_per_sample < 1:
            raise ValueError("steps_per_sample must be positive")


class StepCounter:
    """Mutable tally of Hit-and-Run steps taken across a pipeline."""

    __slots__ = ("n",)

    def __init__(self):
        self.n = 0

    def add(self, k: int = 1) -> None:
        self.n += k


def sample_unit_sphere(rng: np.random.Generator, d: int) -> np.ndarray:
    g = rng.standard_normal(d)
    norm = np.linalg.norm(g)
    while norm < 1e-12:
        g = rng.standard_normal(d)
        norm = np.linalg.norm(g)
    return g / norm


def sample_ball(rng: np.random.Generator, ball: Ball) -> np.ndarray:
    return sample_ball_many(rng, ball, 1)[0]


def sample_ball_many(rng: np.random.Generator, ball: Ball, n: int) -> np.ndarray:
    """n uniform points from the ball; radius is r * U^(1/d)."""
    d = ball.dim
    g = rng.standard_normal((n, d))
    norms = np.linalg.norm(g, axis=1, keepdims=True)
    norms[norms < 1e-12] = 1.0
    radii = ball.radius * rng.uniform(0.0, 1.0, n) ** (1.0 / d)
    return ball.center + g / norms * radii[:, None]


class BallSampler:
    """Exact uniform draws; same .draw() interface as a walk chain."""

    def __init__(self, ball: Ball, rng: np.random.Generator):
        self.ball = ball
        self.rng = rng

    def draw(self) -> np.ndarray:
        return sample_ball(self.rng, self.ball)


class _LinearPart:
    """Cached facet products for a body {x : a x <= b}."""

    def __init__(self, a: np.ndarray, b: np.ndarray, x: np.ndarray):
        self.a = a
        self.b = b
        self.ax = a @ x

    def chord(self, x: np.ndarray, v: np.ndarray | None, coord: int) -> tuple[float, float, np.ndarray]:
        den = self.a[:, coord] if v is None else self.a @ v
        with np.errstate(divide="ignore", invalid="ignore"):
            bounds = (self.b - self.ax) / den
        t_hi = np.min(bounds[den > 0], initial=np.inf)
        t_lo = np.max(bounds[den < 0], initial=-np.inf)
        return t_lo, t_hi, den

    def advance(self, t: float, den: np.ndarray) -> None:
        self.ax += t * den

    def refresh(self, x: np.ndarray) -> None:
        self.ax = self.a @ x


class _BallPart:
    def __init__(self, ball: Ball):
        self.ball = ball

    def chord(self, x: np.ndarray, v: np.ndarray | None, coord: int) -> tuple[float, float, None]:
        u = x - self.ball.center
        if v is None:
            vv = 1.0
            uv = float(u[coord])
        else:
            vv = float(v @ v)
            uv = float(u @ v)
        disc = uv * uv - vv * (float(u @ u) - self.ball.radius**2)
        if disc < 0:
            return np.inf, -np.inf, None
        root = np.sqrt(disc)
        return (-uv - root) / vv, (-uv + root) / vv, None

    def advance(self, t: float, den) -> None:
        pass

    def refresh(self, x: np.ndarray) -> None:
        pass


class _OpaquePart:
    """Fallback for bodies whose chords come from LPs (V-polytopes, zonotopes)."""

    def __init__(self, body):
        self.body = body

    def chord(self, x: np.ndarray, v: np.ndarray | None, coord: int) -> tuple[float, float, None]:
        if v is None:
            v = np.zeros(x.shape[0])
            v[coord] = 1.0
        t_lo, t_hi = self.body.line_intersection(x, v)
        return t_lo, t_hi, None

    def advance(self, t: float, den) -> None:
        pass

    def refresh(self, x: np.ndarray) -> None:
        pass


def _flatten(body) -> list:
    if isinstance(body, IntersectionBody):
        out = []
        for part in body.parts:
            out.extend(_flatten(part))
        return out
    return [body]


def _make_part(body, x: np.ndarray):
    if isinstance(body, HPolytope):
        return _LinearPart(body.a, body.b, x)
    if isinstance(body, ShiftedHBody):
        return _LinearPart(body.normals, body.offsets, x)
    if isinstance(body, Ball):
        return _BallPart(body)
    return _OpaquePart(body)


class HnRChain:
    """A Hit-and-Run chain over `body` starting from an interior point."""

    def __init__(
        self,
        body,
        start: np.ndarray,
        cfg: WalkConfig,
        rng: np.random.Generator,
        counter: StepCounter | None = None,
    ):
        if not body.contains(start):
            raise ValueError("walk must start from a point inside the body")
        self.body = body
        self.x = np.array(start, dtype=float)
        self.cfg = cfg
        self.rng = rng
        self.counter = counter
        self.d = self.x.shape[0]
        self.parts = [_make_part(b, self.x) for b in _flatten(body)]
        self._since_refresh = 0

    def step(self) -> np.ndarray:
        if self.cfg.mode == "cdhr":
            coord = int(self.rng.integers(self.d))
            v = None
        else:
            coord = -1
            v = sample_unit_sphere(self.rng, self.d)
        t_lo, t_hi = -np.inf, np.inf
        dens = []
        for part in self.parts:
            lo, hi, den = part.chord(self.x, v, coord)
            dens.append(den)
            t_lo = max(t_lo, lo)
            t_hi = min(t_hi, hi)
        if not (np.isfinite(t_lo) and np.isfinite(t_hi)) or not t_lo < t_hi:
            raise NumericError("empty or unbounded chord; walk left the body")
        t = self.rng.uniform(t_lo, t_hi)
        margin = CHORD_MARGIN * (t_hi - t_lo)
        t = min(max(t, t_lo + margin), t_hi - margin)
        if v is None:
            self.x[coord] += t
        else:
            self.x += t * v
        for part, den in zip(self.parts, dens):
            part.advance(t, den)
        if self.counter is not None:
            self.counter.add()
        self._since_refresh += 1
        if self._since_refresh >= _CACHE_REFRESH:
            self._since_refresh = 0
            for part in self.parts:
                part.refresh(self.x)
        return self.x

    def draw(self) -> np.ndarray:
        for _ in range(self.cfg.steps_per_sample):
            self.step()
        return self.x.copy()

    def draw_many(self, n: int) -> np.ndarray:
        out = np.empty((n, self.d))
        for i in range(n):
            out[i] = self.draw()
        return out


def hnr_step(
    body,
    x: np.ndarray,
    cfg: WalkConfig,
    rng: np.random.Generator,
    counter: StepCounter | None = None,
) -> np.ndarray:
    """One sample's worth of Hit-and-Run (cfg.steps_per_sample steps)."""
    return HnRChain(body, x, cfg, rng, counter).draw()

"""Command-line frontend.

Subcommands: `volume` estimates one file's volume (optionally several
seeded repetitions in parallel), `generate` writes benchmark bodies in the
cdd/plain-text formats, `reduce` scores the PCA order reduction of a
zonotope, and `bench` sweeps a named family over dimensions and emits CSV.

Exit codes: 0 success, 2 bad input (unreadable or malformed file, bad
flags), 3 annealing schedule failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

from . import generators, oracles
from .errors import NumericError, ParseError, ScheduleFailure
from .estimate import VolumeConfig, volume
from .formats import (
    read_ext,
    read_ine,
    read_zonotope,
    write_ext,
    write_ine,
    write_zonotope,
)
from .reduction import fitness
from .sampling import rng_stream

_READERS = {"h": read_ine, "v": read_ext, "z": read_zonotope}


def _worker_count(reps: int) -> int:
    cap = os.environ.get("POLYVOL_THREADS")
    try:
        cap = int(cap) if cap else (os.cpu_count() or 1)
    except ValueError:
        cap = os.cpu_count() or 1
    return max(1, min(reps, cap))


def _read_body(rep: str, path: str):
    try:
        return _READERS[rep](path)
    except (OSError, ParseError) as exc:
        raise SystemExit(f"polyvol: cannot read {path}: {exc}") from exc


def cmd_volume(args) -> int:
    p = _read_body(args.rep, args.file)
    if args.round and args.rep != "v":
        print("polyvol: --round needs a vertex representation", file=sys.stderr)
        return 2

    def run(index: int):
        cfg = VolumeConfig(
            epsilon=args.error, body=args.body, walk=args.walk,
            seed=args.seed + index, rounding=args.round,
        )
        return volume(p, cfg)

    try:
        if args.reps == 1:
            reports = [run(0)]
        else:
            with ThreadPoolExecutor(max_workers=_worker_count(args.reps)) as pool:
                reports = list(pool.map(run, range(args.reps)))
    except ScheduleFailure as exc:
        print(f"polyvol: schedule failed: {exc}", file=sys.stderr)
        return 3

    if args.json:
        payload = [r.as_dict() for r in reports]
        print(json.dumps(payload[0] if args.reps == 1 else payload, indent=2))
    else:
        for r in reports:
            vol = f"{r.volume:.6g}" if math.isfinite(r.volume) else "overflow"
            print(
                f"seed {r.seed}: volume {vol} (log {r.log_volume:.6f}) "
                f"m={r.m} steps={r.steps_total} time={r.time_seconds:.2f}s"
            )
    return 0


_GEN_EXT = {
    "cube": "ine", "simplex-h": "ine", "rh": "ine",
    "cube-v": "ext", "cross": "ext", "simplex": "ext", "rv": "ext",
    "z": "gen",
}


def cmd_generate(args) -> int:
    kind, d, size = args.kind, args.d, args.size
    needs_size = kind in ("rh", "rv", "z")
    if needs_size and size is None:
        print(f"polyvol: {kind} needs a size argument", file=sys.stderr)
        return 2
    rng = rng_stream(args.seed)
    if kind == "cube":
        body, write = generators.cube(d), write_ine
    elif kind == "cube-v":
        body, write = generators.cube_v(d), write_ext
    elif kind == "cross":
        body, write = generators.cross(d), write_ext
    elif kind == "simplex":
        body, write = generators.simplex(d), write_ext
    elif kind == "simplex-h":
        body, write = generators.simplex_h(d), write_ine
    elif kind == "rh":
        body, write = generators.rh(d, size, rng), write_ine
    elif kind == "rv":
        body, write = generators.rv(d, size, rng), write_ext
    else:
        body, write = generators.zono(d, size, rng), write_zonotope
    name = args.out
    if name is None:
        stem = f"{kind}-{d}" if size is None else f"{kind}-{d}-{size}"
        name = f"{stem}.{_GEN_EXT[kind]}"
    write(body, name)
    print(name)
    return 0


def cmd_reduce(args) -> int:
    z = _read_body("z", args.file)
    t0 = time.perf_counter()
    try:
        result = fitness(z, VolumeConfig(epsilon=args.error, seed=args.seed))
    except ScheduleFailure as exc:
        print(f"polyvol: schedule failed: {exc}", file=sys.stderr)
        return 3
    row = {
        "instance": os.path.basename(args.file),
        "d": z.dim,
        "k": z.generators.shape[1],
        "order": z.order,
        "vol_p_log": result.vol_p_log,
        "vol_red_log": result.vol_red_log,
        "R": result.r,
        "time_seconds": time.perf_counter() - t0,
    }
    print(json.dumps(row, indent=2))
    return 0


_SUITES = ("cubes", "crosses", "simplices", "rv", "zonotopes")


def _bench_instance(suite: str, d: int, seed: int):
    rng = rng_stream(seed)
    if suite == "cubes":
        return f"cube-{d}", generators.cube(d), oracles.exact_cube(d)
    if suite == "crosses":
        return f"cross-{d}", generators.cross(d), oracles.exact_cross(d)
    if suite == "simplices":
        return f"simplex-{d}", generators.simplex(d), oracles.exact_simplex(d)
    if suite == "rv":
        return f"rv-{d}-{2 * d}", generators.rv(d, 2 * d, rng), None
    z = generators.zono(d, 2 * d, rng)
    exact = None
    if math.comb(2 * d, d) <= oracles.SUBSET_LIMIT:
        exact = oracles.exact_zonotope(z)
    return f"z-{d}-{2 * d}", z, exact


def cmd_bench(args) -> int:
    try:
        dims = [int(tok) for tok in args.dims.split(",") if tok]
    except ValueError:
        print(f"polyvol: bad dimension list {args.dims!r}", file=sys.stderr)
        return 2
    print("instance,d,vol,m,steps,error,time_seconds")
    for d in dims:
        name, body, exact_log = _bench_instance(args.suite, d, args.seed)
        try:
            rep = volume(body, VolumeConfig(epsilon=args.error, seed=args.seed))
        except ScheduleFailure as exc:
            print(f"polyvol: schedule failed on {name}: {exc}", file=sys.stderr)
            return 3
        err = ""
        if exact_log is not None:
            err = f"{abs(math.exp(rep.log_volume - exact_log) - 1.0):.4f}"
        vol = f"{rep.volume:.6g}" if math.isfinite(rep.volume) else ""
        print(f"{name},{d},{vol},{rep.m},{rep.steps_total},{err},"
              f"{rep.time_seconds:.3f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="polyvol",
        description="Monte Carlo volume estimation for convex polytopes",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    pv = sub.add_parser("volume", help="estimate the volume of a polytope file")
    pv.add_argument("--rep", choices=("h", "v", "z"), required=True)
    pv.add_argument("--file", required=True)
    pv.add_argument("--error", type=float, default=0.1)
    pv.add_argument("--seed", type=int, default=0)
    pv.add_argument("--walk", choices=("cdhr", "rdhr", "auto"), default="auto")
    pv.add_argument("--body", choices=("ball", "hpoly", "auto"), default="auto")
    pv.add_argument("--round", action="store_true",
                    help="round a V-polytope by its enclosing ellipsoid first")
    pv.add_argument("--reps", type=int, default=1)
    pv.add_argument("--json", action="store_true")
    pv.set_defaults(func=cmd_volume)

    pg = sub.add_parser("generate", help="write a benchmark polytope file")
    pg.add_argument("kind", choices=sorted(_GEN_EXT))
    pg.add_argument("d", type=int)
    pg.add_argument("size", type=int, nargs="?")
    pg.add_argument("--seed", type=int, default=0)
    pg.add_argument("--out")
    pg.set_defaults(func=cmd_generate)

    pr = sub.add_parser("reduce", help="score the PCA order reduction of a zonotope")
    pr.add_argument("--file", required=True)
    pr.add_argument("--error", type=float, default=0.1)
    pr.add_argument("--seed", type=int, default=0)
    pr.set_defaults(func=cmd_reduce)

    pb = sub.add_parser("bench", help="run a benchmark family, emit CSV")
    pb.add_argument("suite", choices=_SUITES)
    pb.add_argument("--dims", required=True, help="comma-separated dimensions")
    pb.add_argument("--error", type=float, default=0.1)
    pb.add_argument("--seed", type=int, default=0)
    pb.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SystemExit as exc:
        if isinstance(exc.code, str):
            print(exc.code, file=sys.stderr)
            return 2
        raise
    except NumericError as exc:
        print(f"polyvol: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

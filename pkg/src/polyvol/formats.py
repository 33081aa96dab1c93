"""Reading and writing polytope files.

Three plain-text formats are supported:

* ``.ine``: H-representation, cdd style.  Everything before ``begin`` is
  comment, then a dimension line ``q d+1 real``, then q rows
  ``b_i  -a_i1 ... -a_id`` encoding a_i . x <= b_i, then ``end``.
* ``.ext``: V-representation, cdd style, rows ``1 v_1 ... v_d`` (a leading
  0 would denote a ray, which has no volume and is rejected).
* zonotope text: first line ``d k``, then k generator rows of d reals.

Numbers are written with 17 significant digits so a write/read round trip
reproduces every coordinate exactly.
"""

from __future__ import annotations

import io
from typing import TextIO

import numpy as np

from .bodies import HPolytope, VPolytope, Zonotope
from .errors import ParseError


def _tokens(line: str) -> list[str]:
    return line.split()


def _read_cdd_block(handle: TextIO, what: str) -> tuple[np.ndarray, int, int]:
    lines = iter(handle.read().splitlines())
    for line in lines:
        if line.strip().lower() == "begin":
            break
    else:
        raise ParseError(f"{what}: no 'begin' line found")
    try:
        dims = _tokens(next(lines))
    except StopIteration:
        raise ParseError(f"{what}: missing dimension line after 'begin'") from None
    if len(dims) < 2:
        raise ParseError(f"{what}: dimension line needs at least two fields")
    try:
        rows, cols = int(dims[0]), int(dims[1])
    except ValueError:
        raise ParseError(f"{what}: non-integer dimensions {dims[:2]}") from None
    if rows < 1 or cols < 2:
        raise ParseError(f"{what}: invalid dimensions {rows} x {cols}")
    data = np.empty((rows, cols))
    for i in range(rows):
        try:
            fields = _tokens(next(lines))
        except StopIteration:
            raise ParseError(f"{what}: expected {rows} rows, file ended at row {i}") from None
        if fields and fields[0].lower() == "end":
            raise ParseError(f"{what}: expected {rows} rows, found 'end' at row {i}")
        if len(fields) != cols:
            raise ParseError(f"{what}: row {i} has {len(fields)} fields, expected {cols}")
        try:
            data[i] = [float(f) for f in fields]
        except ValueError:
            raise ParseError(f"{what}: non-numeric value in row {i}") from None
    for line in lines:
        if line.strip().lower() == "end":
            return data, rows, cols
        if line.strip():
            raise ParseError(f"{what}: unexpected content before 'end': {line.strip()!r}")
    raise ParseError(f"{what}: no 'end' line found")


def read_ine(source) -> HPolytope:
    with _opened(source) as handle:
        data, _, cols = _read_cdd_block(handle, "ine")
    return HPolytope(-data[:, 1:], data[:, 0])


def read_ext(source) -> VPolytope:
    with _opened(source) as handle:
        data, _, cols = _read_cdd_block(handle, "ext")
    flags = data[:, 0]
    if not np.all(flags == 1.0):
        raise ParseError("ext: rays (leading 0 rows) are not supported")
    return VPolytope(data[:, 1:])


def read_zonotope(source) -> Zonotope:
    with _opened(source) as handle:
        lines = [ln for ln in handle.read().splitlines() if ln.strip()]
    if not lines:
        raise ParseError("zonotope: empty file")
    head = _tokens(lines[0])
    if len(head) != 2:
        raise ParseError(f"zonotope: header must be 'd k', got {lines[0]!r}")
    try:
        d, k = int(head[0]), int(head[1])
    except ValueError:
        raise ParseError(f"zonotope: non-integer header {lines[0]!r}") from None
    if d < 1 or k < 1:
        raise ParseError(f"zonotope: invalid dimensions d={d} k={k}")
    if len(lines) - 1 != k:
        raise ParseError(f"zonotope: expected {k} generator rows, found {len(lines) - 1}")
    rows = np.empty((k, d))
    for i, line in enumerate(lines[1:]):
        fields = _tokens(line)
        if len(fields) != d:
            raise ParseError(f"zonotope: row {i} has {len(fields)} fields, expected {d}")
        try:
            rows[i] = [float(f) for f in fields]
        except ValueError:
            raise ParseError(f"zonotope: non-numeric value in row {i}") from None
    return Zonotope(rows.T)


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def write_ine(p: HPolytope, target, name: str = "polytope") -> None:
    with _opened(target, "w") as handle:
        handle.write(f"{name}\n")
        handle.write("begin\n")
        handle.write(f" {p.n_facets} {p.dim + 1} real\n")
        for row, off in zip(p.a, p.b):
            handle.write(" " + " ".join([_fmt(off)] + [_fmt(-v) for v in row]) + "\n")
        handle.write("end\n")


def write_ext(p: VPolytope, target, name: str = "polytope") -> None:
    with _opened(target, "w") as handle:
        handle.write(f"{name}\n")
        handle.write("begin\n")
        handle.write(f" {p.n_vertices} {p.dim + 1} real\n")
        for row in p.vertices:
            handle.write(" " + " ".join(["1"] + [_fmt(v) for v in row]) + "\n")
        handle.write("end\n")


def write_zonotope(z: Zonotope, target) -> None:
    with _opened(target, "w") as handle:
        handle.write(f"{z.dim} {z.k}\n")
        for row in z.generators.T:
            handle.write(" ".join(_fmt(v) for v in row) + "\n")


class _opened:
    """Accept a path or an open text handle; only close what we opened."""

    def __init__(self, target, mode: str = "r"):
        self.target = target
        self.mode = mode
        self.handle = None
        self.owns = False

    def __enter__(self):
        if isinstance(self.target, (str, bytes)) or hasattr(self.target, "__fspath__"):
            self.handle = open(self.target, self.mode)
            self.owns = True
        elif isinstance(self.target, io.TextIOBase) or hasattr(self.target, "read") or hasattr(self.target, "write"):
            self.handle = self.target
        else:
            raise TypeError(f"expected a path or file object, got {type(self.target)!r}")
        return self.handle

    def __exit__(self, *exc):
        if self.owns:
            self.handle.close()
        return False

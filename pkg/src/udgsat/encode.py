"""Propositional encoding of k-colorability.

Variable x_{v,c} (index k*v + c for 0-based vertex v, 1-based color c) says
"vertex v has color c".  The formula has one at-least-one clause per vertex
and, per edge and color, a binary clause forbidding the shared color.
At-most-one clauses are omitted on purpose: they are redundant for
satisfiability, and the decoder resolves multi-colored vertices by taking
the least true color.

Symmetry breaking fixes the colors of up to three anchor points, the unit
triangle (0,0), (1,0), (1/2, sqrt3/2), to colors 1, 2, 3.  Anchors are
located by exact point equality so that reindexed (trimmed) graphs keep
their anchors.  Fixing distinct colors is only sound when the anchors
present are pairwise adjacent; callers on unsaturated graphs must check.
"""

from __future__ import annotations

import io
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, TextIO

from .exactnum import DEFAULT_CONTEXT, FieldContext
from .geometry import Point, origin
from .udgraph import UnitDistanceGraph

# Clause tags: ("ALO", v) | ("EDGE", v, w, c) | ("SYM", v)
ClauseTag = tuple
Assignment = dict[int, bool]


class NotAModel(ValueError):
    """The assignment falsifies some clause of the formula."""


def anchor_points(ctx: FieldContext = DEFAULT_CONTEXT) -> list[Point]:
    """The unit triangle used for symmetry breaking, in color order."""
    return [
        origin(ctx),
        Point(ctx.one, ctx.zero),
        Point(ctx.rational(Fraction(1, 2)), ctx.element({3: Fraction(1, 2)})),
    ]


@dataclass
class ColoringCnf:
    k: int
    vertex_count: int
    clauses: list[list[int]]
    tags: list[ClauseTag]

    @property
    def nvars(self) -> int:
        return self.k * self.vertex_count

    def var(self, v: int, c: int) -> int:
        """Variable for 0-based vertex v and 1-based color c."""
        if not (0 <= v < self.vertex_count and 1 <= c <= self.k):
            raise IndexError(f"no variable for vertex {v}, color {c}")
        return self.k * v + c

    def vertex_color_of_var(self, x: int) -> tuple[int, int]:
        return (x - 1) // self.k, (x - 1) % self.k + 1


def encode(
    graph: UnitDistanceGraph, k: int, symmetry_breaking: bool = False
) -> ColoringCnf:
    """CNF asking whether the graph is k-colorable."""
    if k < 1:
        raise ValueError("need at least one color")
    cnf = ColoringCnf(k, graph.n, [], [])
    for v in range(graph.n):
        cnf.clauses.append([cnf.var(v, c) for c in range(1, k + 1)])
        cnf.tags.append(("ALO", v))
    for a, b in sorted(graph.edges):
        for c in range(1, k + 1):
            cnf.clauses.append([-cnf.var(a, c), -cnf.var(b, c)])
            cnf.tags.append(("EDGE", a, b, c))
    if symmetry_breaking and k >= 3:
        for color, p in enumerate(anchor_points(graph.ctx), start=1):
            v = graph.index.get(p)
            if v is not None:
                cnf.clauses.append([cnf.var(v, color)])
                cnf.tags.append(("SYM", v))
    return cnf


def shuffle(cnf: ColoringCnf, seed: int) -> ColoringCnf:
    """Seeded Fisher-Yates permutation of clause order and of the literal
    order inside each clause; the variable mapping is untouched."""
    rng = random.Random(seed)
    order = list(range(len(cnf.clauses)))
    rng.shuffle(order)
    clauses = []
    tags = []
    for i in order:
        lits = list(cnf.clauses[i])
        rng.shuffle(lits)
        clauses.append(lits)
        tags.append(cnf.tags[i])
    return ColoringCnf(cnf.k, cnf.vertex_count, clauses, tags)


def decode(cnf: ColoringCnf, assignment: Assignment) -> dict[int, int]:
    """Vertex coloring from a model: the least true color per vertex."""
    for i, clause in enumerate(cnf.clauses):
        if not any(assignment.get(abs(l), False) == (l > 0) for l in clause):
            raise NotAModel(f"clause {i} is falsified")
    coloring = {}
    for v in range(cnf.vertex_count):
        for c in range(1, cnf.k + 1):
            if assignment.get(cnf.var(v, c), False):
                coloring[v] = c
                break
        else:
            raise NotAModel(f"vertex {v} has no color")  # unreachable given ALO
    return coloring


def check_coloring(graph: UnitDistanceGraph, coloring: dict[int, int]) -> bool:
    return all(coloring[a] != coloring[b] for a, b in graph.edges)


# -- DIMACS and the tag sidecar -------------------------------------------------


def write_dimacs(nvars: int, clauses: Iterable[list[int]], out: TextIO) -> None:
    clauses = list(clauses)
    out.write(f"p cnf {nvars} {len(clauses)}\n")
    for clause in clauses:
        out.write(" ".join(map(str, clause)) + " 0\n")


def dimacs_text(cnf: ColoringCnf) -> str:
    buf = io.StringIO()
    write_dimacs(cnf.nvars, cnf.clauses, buf)
    return buf.getvalue()


def read_dimacs(text: str) -> tuple[int, list[list[int]]]:
    nvars = None
    nclauses = None
    clauses: list[list[int]] = []
    current: list[int] = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ValueError(f"bad DIMACS header: {line!r}")
            nvars, nclauses = int(parts[2]), int(parts[3])
            continue
        for tok in line.split():
            lit = int(tok)
            if lit == 0:
                clauses.append(current)
                current = []
            else:
                current.append(lit)
    if current:
        raise ValueError("last clause not terminated by 0")
    if nvars is None:
        raise ValueError("missing DIMACS header")
    if nclauses is not None and nclauses != len(clauses):
        raise ValueError(f"header says {nclauses} clauses, found {len(clauses)}")
    return nvars, clauses


def write_tags(cnf: ColoringCnf, out: TextIO) -> None:
    for i, tag in enumerate(cnf.tags):
        out.write(f"{i} " + " ".join(map(str, tag)) + "\n")


def read_tags(text: str) -> list[ClauseTag]:
    tags: dict[int, ClauseTag] = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        idx = int(parts[0])
        kind = parts[1]
        if kind not in ("ALO", "EDGE", "SYM"):
            raise ValueError(f"unknown clause tag {kind!r}")
        tags[idx] = (kind, *map(int, parts[2:]))
    return [tags[i] for i in range(len(tags))]

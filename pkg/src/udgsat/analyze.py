"""Chromatic-number certification and structural reports.

The chromatic number is established by an ascending search: the first k
whose coloring formula is satisfiable, paired with a checked refutation of
k-1 colors.  Pattern enumeration projects all k-colorings onto
same-color-as-center indicator bits over a marked vertex list, enumerating
distinct projections with blocking clauses over selector variables.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction

from . import cdcl
from .cdcl import SolverConfig, solve
from .drat import DratProof, check
from .encode import decode, encode
from .geometry import origin
from .udgraph import UnitDistanceGraph


class BudgetExceeded(RuntimeError):
    """The solver budget ran out before the answer was certified."""


#: Radicands of the base field the large construction parts live in.
SUBFIELD_RADICANDS = frozenset({1, 3, 11, 33})

PatternRow = tuple[int, ...]


@dataclass
class ChromaticCertificate:
    chi: int
    coloring: dict[int, int]  # proper chi-coloring
    model: dict[int, bool]
    refutation: DratProof | None  # verified proof that chi-1 colors fail
    refutation_checked: bool


def _solve_for(graph: UnitDistanceGraph, k: int, cfg: SolverConfig):
    from .shrink import encode_for

    cnf = encode_for(graph, k)
    res = solve(cnf, cfg)
    if res.status == cdcl.UNKNOWN:
        raise BudgetExceeded(f"budget exhausted at k={k}")
    return cnf, res


def chromatic_number(
    graph: UnitDistanceGraph, kmax: int | None = None, cfg: SolverConfig | None = None
) -> ChromaticCertificate:
    """Ascending certified search; k=1 needs only the satisfiable side."""
    cfg = cfg or SolverConfig()
    if graph.n == 0:
        return ChromaticCertificate(0, {}, {}, None, False)
    if kmax is None:
        kmax = graph.n
    refutation: DratProof | None = None
    for k in range(1, kmax + 1):
        cnf, res = _solve_for(graph, k, cfg)
        if res.status == cdcl.SAT:
            return ChromaticCertificate(
                chi=k,
                coloring=decode(cnf, res.model),
                model=res.model,
                refutation=refutation,
                refutation_checked=refutation is not None,
            )
        if not check(cnf.clauses, res.proof).ok:
            raise AssertionError(f"refutation at k={k} failed checking")
        refutation = res.proof
    raise BudgetExceeded(f"no coloring found up to kmax={kmax}")


def is_k_colorable(
    graph: UnitDistanceGraph, k: int, cfg: SolverConfig | None = None
) -> bool:
    cfg = cfg or SolverConfig()
    _, res = _solve_for(graph, k, cfg)
    return res.status == cdcl.SAT


def enumerate_patterns(
    graph: UnitDistanceGraph,
    center: int,
    marked: list[int],
    k: int,
    cfg: SolverConfig | None = None,
) -> set[PatternRow]:
    """All k-colorings projected to (same color as center?) bits on the
    marked vertices.

    The center is pinned to exactly color 1 (no other symmetry breaking), so
    "shares a color class with the center" collapses to the marked vertex's
    color-1 variable; one selector per marked vertex mirrors it, and
    blocking clauses over the selectors enumerate distinct projections.
    """
    cfg = cfg or SolverConfig()
    base = encode(graph, k, symmetry_breaking=False)
    clauses = [list(c) for c in base.clauses]
    clauses.append([base.var(center, 1)])
    for c in range(2, k + 1):
        clauses.append([-base.var(center, c)])
    selectors = {}
    nvars = base.nvars
    for v in marked:
        nvars += 1
        selectors[v] = nvars
        clauses.append([-nvars, base.var(v, 1)])
        clauses.append([nvars, -base.var(v, 1)])
    found: set[PatternRow] = set()
    while True:
        res = solve((nvars, clauses), cfg)
        if res.status == cdcl.UNKNOWN:
            raise BudgetExceeded("pattern enumeration ran out of budget")
        if res.status == cdcl.UNSAT:
            return found
        row = tuple(int(res.model[selectors[v]]) for v in marked)
        found.add(row)
        clauses.append(
            [-selectors[v] if bit else selectors[v] for v, bit in zip(marked, row)]
        )


def count_patterns(
    graph: UnitDistanceGraph,
    center: int,
    marked: list[int],
    k: int,
    constraint=None,
    cfg: SolverConfig | None = None,
) -> int:
    rows = enumerate_patterns(graph, center, marked, k, cfg)
    if constraint is None:
        return len(rows)
    return sum(1 for row in rows if constraint(row))


def degree_stats(graph: UnitDistanceGraph) -> tuple[Fraction, dict[int, int]]:
    """Exact average degree 2|E|/|V| and the degree histogram."""
    if graph.n == 0:
        return Fraction(0), {}
    histogram = Counter(graph.degrees())
    return Fraction(2 * graph.m, graph.n), dict(sorted(histogram.items()))


def partition_by_field(
    graph: UnitDistanceGraph, radicands: frozenset[int] = SUBFIELD_RADICANDS
) -> tuple[set[int], set[int]]:
    """Split vertex ids by whether both coordinates stay inside the subfield
    spanned by the given radicands; the central vertex, when present, is
    counted on both sides."""
    inside: set[int] = set()
    outside: set[int] = set()
    for i, p in enumerate(graph.points):
        support = p.x.radicand_support() | p.y.radicand_support()
        (inside if support <= radicands else outside).add(i)
    o = origin(graph.ctx)
    center = graph.index.get(o)
    if center is not None:
        inside.add(center)
        outside.add(center)
    return inside, outside

"""Graph minimization built on proof trimming.

One probe shuffles the coloring formula with a fresh seed, solves it, trims
the refutation backward, and keeps the subgraph the core describes.  The
descent repeats probes, accepting a result only when the vertex count
strictly drops, until a fixed number of consecutive probes bring nothing.
Criticality passes then grind further: a vertex (or edge) is removed
whenever the graph without it still cannot be colored.

Every accepted step can be re-certified from scratch (refutation at k plus
a coloring at k+1), which keeps the invariant honest at the cost of an
extra solve per improvement.

All randomness flows from explicit seeds; a run writes a manifest with
enough information to replay or resume it.
"""

from __future__ import annotations

import json
import random
import time
from dataclasses import asdict, dataclass, field

from . import cdcl
from .cdcl import SolveResult, SolverConfig, solve
from .drat import check, core_to_subgraph, trim
from .encode import ColoringCnf, anchor_points, decode, encode, shuffle
from .geometry import Rotation
from .udgraph import UnitDistanceGraph


class NotUnsatisfiable(ValueError):
    """The graph is k-colorable, so there is nothing to preserve."""


class SolverBudgetExceeded(RuntimeError):
    """A probe ran out of solver budget."""


def sb_is_sound(graph: UnitDistanceGraph) -> bool:
    """Fixing distinct anchor colors needs the present anchors pairwise
    adjacent; unsaturated graphs may have dropped those edges."""
    ids = [graph.index[p] for p in anchor_points(graph.ctx) if p in graph.index]
    return all(
        (min(a, b), max(a, b)) in graph.edges
        for i, a in enumerate(ids)
        for b in ids[i + 1 :]
    )


def encode_for(graph: UnitDistanceGraph, k: int) -> ColoringCnf:
    """Coloring formula with symmetry breaking whenever it is sound here."""
    return encode(graph, k, symmetry_breaking=(k >= 3 and sb_is_sound(graph)))


def _solve_or_raise(cnf: ColoringCnf, cfg: SolverConfig) -> SolveResult:
    res = solve(cnf, cfg)
    if res.status == cdcl.UNKNOWN:
        raise SolverBudgetExceeded(
            f"solver gave up after {res.stats.conflicts} conflicts"
        )
    return res


@dataclass
class ProbeLog:
    seed: int
    vertices_before: int
    vertices_after: int
    accepted: bool
    proof_additions: int
    trimmed_additions: int
    conflicts: int
    wall_time: float


@dataclass
class Certificate:
    """A verified chromatic-number-above-k witness pair for a graph."""

    k: int
    refutation_checked: bool
    coloring: dict[int, int]  # proper (k+1)-coloring

    @classmethod
    def establish(cls, graph: UnitDistanceGraph, k: int, cfg: SolverConfig) -> "Certificate":
        cnf = encode_for(graph, k)
        res = _solve_or_raise(cnf, cfg)
        if res.status != cdcl.UNSAT:
            raise NotUnsatisfiable(f"graph is {k}-colorable")
        verdict = check(cnf.clauses, res.proof)
        if not verdict.ok:
            raise AssertionError(f"refutation failed checking: {verdict.reason}")
        cnf_up = encode_for(graph, k + 1)
        res_up = _solve_or_raise(cnf_up, cfg)
        if res_up.status != cdcl.SAT:
            raise NotUnsatisfiable(f"graph is not even {k + 1}-colorable")
        return cls(k, True, decode(cnf_up, res_up.model))


@dataclass
class ShrinkRun:
    master_seed: int
    k: int
    patience: int
    graph: UnitDistanceGraph
    status: str = "Progressing"  # Progressing | Fixpoint | Critical
    iterations: list[ProbeLog] = field(default_factory=list)
    certificate: Certificate | None = None


def trim_step(
    graph: UnitDistanceGraph, k: int, seed: int, cfg: SolverConfig | None = None
) -> tuple[UnitDistanceGraph, ProbeLog]:
    """Shuffle, solve, trim, extract: one randomized shrink probe."""
    cfg = cfg or SolverConfig()
    t0 = time.perf_counter()
    cnf = shuffle(encode_for(graph, k), seed)
    res = _solve_or_raise(cnf, SolverConfig(**{**asdict(cfg), "seed": seed}))
    if res.status != cdcl.UNSAT:
        raise NotUnsatisfiable(f"graph is {k}-colorable; nothing to trim")
    report = trim(cnf.clauses, res.proof)
    sub = core_to_subgraph(graph, cnf, report)
    log = ProbeLog(
        seed=seed,
        vertices_before=graph.n,
        vertices_after=sub.n,
        accepted=sub.n < graph.n,
        proof_additions=res.proof.additions,
        trimmed_additions=report.stats.trimmed_additions,
        conflicts=res.stats.conflicts,
        wall_time=time.perf_counter() - t0,
    )
    return sub, log


def randomized_descent(
    graph: UnitDistanceGraph,
    k: int,
    master_seed: int = 0,
    patience: int = 20,
    max_probes: int | None = None,
    cfg: SolverConfig | None = None,
    certify: bool = True,
    on_progress=None,
) -> ShrinkRun:
    """Repeat trim probes with fresh seeds until `patience` consecutive
    probes fail to shrink the graph; accepts strict decreases only."""
    cfg = cfg or SolverConfig()
    rng = random.Random(master_seed)
    run = ShrinkRun(master_seed, k, patience, graph)
    stale = 0
    while stale < patience and (max_probes is None or len(run.iterations) < max_probes):
        seed = rng.getrandbits(63)
        try:
            candidate, log = trim_step(run.graph, k, seed, cfg)
        except SolverBudgetExceeded:
            stale += 1
            continue
        run.iterations.append(log)
        if log.accepted:
            run.graph = candidate
            stale = 0
            if certify:
                run.certificate = Certificate.establish(candidate, k, cfg)
            if on_progress is not None:
                on_progress(run)
        else:
            stale += 1
    run.status = "Fixpoint" if stale >= patience else "Progressing"
    return run


@dataclass
class CriticalityResult:
    graph: UnitDistanceGraph
    critical: bool
    removed: int
    # per-vertex colorings of graph-minus-v, keyed by the vertex's point
    certificates: dict[int, dict[int, int]] = field(default_factory=dict)


def criticalize_vertices(
    graph: UnitDistanceGraph,
    k: int,
    seed: int = 0,
    cfg: SolverConfig | None = None,
    certificate_limit: int = 300,
) -> CriticalityResult:
    """Remove vertices one at a time, in seeded random order, whenever the
    remainder still has no k-coloring; repeat until a clean pass.

    The final pass yields, for every surviving vertex, a k-coloring of the
    graph without it (stored exhaustively up to `certificate_limit` vertices,
    sampled above that).
    """
    cfg = cfg or SolverConfig()
    rng = random.Random(seed)
    current = graph
    removed = 0
    certificates: dict[int, dict[int, int]] = {}
    try:
        while True:
            order = list(range(current.n))
            rng.shuffle(order)
            certificates = {}
            changed = False
            # removing by descending id keeps earlier ids in this pass stable
            for v in sorted(order, reverse=True):
                candidate = current.remove_vertex(v)
                cnf = encode_for(candidate, k)
                res = _solve_or_raise(cnf, cfg)
                if res.status == cdcl.UNSAT:
                    current = candidate
                    removed += 1
                    changed = True
                else:
                    certificates[v] = decode(cnf, res.model)
            if not changed:
                break
    except SolverBudgetExceeded:
        return CriticalityResult(current, False, removed, {})
    if current.n > certificate_limit:
        keep = set(rng.sample(sorted(certificates), certificate_limit))
        certificates = {v: c for v, c in certificates.items() if v in keep}
    return CriticalityResult(current, True, removed, certificates)


def criticalize_edges(
    graph: UnitDistanceGraph,
    k: int,
    seed: int = 0,
    cfg: SolverConfig | None = None,
) -> CriticalityResult:
    """Same pass structure over edges; the result is no longer saturated."""
    cfg = cfg or SolverConfig()
    rng = random.Random(seed)
    current = graph
    removed = 0
    try:
        while True:
            edges = sorted(current.edges)
            rng.shuffle(edges)
            changed = False
            for e in edges:
                candidate = current.remove_edge(e)
                res = _solve_or_raise(encode_for(candidate, k), cfg)
                if res.status == cdcl.UNSAT:
                    current = candidate
                    removed += 1
                    changed = True
            if not changed:
                break
    except SolverBudgetExceeded:
        return CriticalityResult(current, False, removed, {})
    return CriticalityResult(current, True, removed, {})


@dataclass
class MergeReport:
    graph: UnitDistanceGraph
    merged_vertices: int
    avg_degree_inputs: tuple  # exact rationals, one per input
    avg_degree_merged: object


def merge_rotated(
    g1: UnitDistanceGraph, g2: UnitDistanceGraph, rotation: Rotation
) -> MergeReport:
    """Union g1 with a rotated copy of g2 about the shared central vertex."""
    from .analyze import degree_stats

    for g in (g1, g2):
        if not g.has_origin():
            raise ValueError("merge is defined for graphs containing the origin")
    merged = g1.union(g2.rotate(rotation))
    return MergeReport(
        graph=merged,
        merged_vertices=g1.n + g2.n - merged.n,
        avg_degree_inputs=(degree_stats(g1)[0], degree_stats(g2)[0]),
        avg_degree_merged=degree_stats(merged)[0],
    )


def augment_outer(
    graph: UnitDistanceGraph, donor: UnitDistanceGraph, rsq
) -> UnitDistanceGraph:
    """Add the donor's vertices that lie strictly outside the given squared
    radius; meant to precede a descent so far points can displace near ones."""
    return graph.union(donor.filter_radius(rsq, keep_leq=False))


# -- run manifests -----------------------------------------------------------------


def save_manifest(run: ShrinkRun, path: str, graph_path: str, cfg: SolverConfig) -> None:
    doc = {
        "master_seed": run.master_seed,
        "k": run.k,
        "patience": run.patience,
        "status": run.status,
        "graph_path": graph_path,
        "max_conflicts": cfg.max_conflicts,
        "iterations": [asdict(it) for it in run.iterations],
        "vertices": run.graph.n,
        "edges": run.graph.m,
    }
    with open(path, "w") as f:
        json.dump(doc, f, indent=1)


def load_manifest(path: str) -> dict:
    with open(path) as f:
        doc = json.load(f)
    for key in ("master_seed", "k", "patience", "iterations", "graph_path"):
        if key not in doc:
            raise ValueError(f"manifest missing {key!r}")
    return doc


def resume_descent(
    manifest: dict,
    graph: UnitDistanceGraph,
    cfg: SolverConfig | None = None,
    patience: int | None = None,
    max_probes: int | None = None,
    certify: bool = True,
    on_progress=None,
) -> ShrinkRun:
    """Continue a recorded run: replays the seed stream past the iterations
    already logged, then proceeds exactly like randomized_descent."""
    cfg = cfg or SolverConfig(max_conflicts=manifest.get("max_conflicts"))
    rng = random.Random(manifest["master_seed"])
    done = len(manifest["iterations"])
    for _ in range(done):
        rng.getrandbits(63)
    run = ShrinkRun(
        manifest["master_seed"],
        manifest["k"],
        patience if patience is not None else manifest["patience"],
        graph,
        status=manifest.get("status", "Progressing"),
    )
    run.iterations = [ProbeLog(**it) for it in manifest["iterations"]]
    stale = 0
    for it in reversed(run.iterations):
        if it.accepted:
            break
        stale += 1
    while stale < run.patience and (
        max_probes is None or len(run.iterations) < done + (max_probes or 0)
    ):
        seed = rng.getrandbits(63)
        try:
            candidate, log = trim_step(run.graph, run.k, seed, cfg)
        except SolverBudgetExceeded:
            stale += 1
            continue
        run.iterations.append(log)
        if log.accepted:
            run.graph = candidate
            stale = 0
            if certify:
                run.certificate = Certificate.establish(candidate, run.k, cfg)
            if on_progress is not None:
                on_progress(run)
        else:
            stale += 1
    run.status = "Fixpoint" if stale >= run.patience else "Progressing"
    return run

import itertools
import random

import pytest

from udgsat.cdcl import SAT, UNSAT, SolverConfig, solve
from udgsat.drat import (
    CoreReport,
    DratProof,
    InvalidProof,
    check,
    core_to_subgraph,
    trim,
)
from udgsat.encode import encode
from udgsat.exactnum import DEFAULT_CONTEXT
from udgsat.geometry import Point
from udgsat.udgraph import UnitDistanceGraph, moser

CTX = DEFAULT_CONTEXT


def proof(*steps):
    out = []
    for s in steps:
        if s and s[0] == "d":
            out.append((True, tuple(s[1:])))
        else:
            out.append((False, tuple(s)))
    return DratProof(out)


# -- check ------------------------------------------------------------------

def test_check_trivial_contradiction():
    assert check([[1], [-1]], proof(())).ok


def test_check_rat_example():
    # (x or y) is not RUP for (!x or !y) but it is RAT on x
    res = check([[-1, -2]], proof((1, 2)), require_refutation=False)
    assert res.ok
    assert res.steps_verified == 1
    # as a refutation the same proof is incomplete, and the failure is the
    # missing empty clause rather than the RAT step itself
    res2 = check([[-1, -2]], proof((1, 2)))
    assert not res2.ok
    assert res2.step is None
    assert res2.steps_verified == 1


def test_check_unit_chain():
    assert check([[1], [-1, 2], [-2]], proof(())).ok


def test_check_accepts_blocked_clause():
    # no clause contains -3, so (3) is vacuously RAT on 3
    res = check([[1, 2]], proof((3,)), require_refutation=False)
    assert res.ok


def test_check_rejects_unsupported_addition():
    # F is satisfiable but F and (-1) is not: (-1) is neither RUP nor RAT
    res = check([[1], [2]], proof((-1,)), require_refutation=False)
    assert not res.ok
    assert res.step == 0


def test_check_applies_deletions():
    # after deleting (!x), the empty clause no longer follows
    res = check([[1], [-1]], proof(("d", -1), ()))
    assert not res.ok
    assert res.step == 1


def test_check_rat_becomes_invalid_after_relevant_addition():
    # (x or y) is RAT on x for (!x or !y), but not after (!x or y),(x or !y),
    # whose resolvent chain refutes it
    f = [[-1, -2], [-1, 2], [1, -2]]
    res = check(f, proof((1, 2)), require_refutation=False)
    assert not res.ok


def test_check_proof_with_deletions_still_accepts():
    f = [[1, 2], [-1, 2], [1, -2], [-1, -2]]
    # derive (2), drop the now-subsumed (1 or 2), finish via (1,-2),(-1,-2)
    assert check(f, proof((2,), ("d", 1, 2), ())).ok


# -- trim: hand-derived examples ---------------------------------------------------

def test_trim_drops_unused_addition_and_clause():
    f = [[1], [-1], [2, 3]]
    rep = trim(f, proof((2,), ()))
    assert rep.core_clause_indices == [0, 1]
    assert rep.trimmed_proof.steps == [(False, ())]
    assert rep.stats.skipped_steps == 1


def test_trim_nothing_removable():
    f = [[1], [-1]]
    rep = trim(f, proof(()))
    assert rep.core_clause_indices == [0, 1]
    assert rep.trimmed_proof.steps == [(False, ())]


def test_trim_requires_empty_clause():
    with pytest.raises(InvalidProof):
        trim([[1], [-1]], proof((1,)))


def test_trim_core_of_spindle_contains_every_alo():
    # the spindle is vertex-critical at 3 colors, so every at-least-one
    # clause must appear in any unsatisfiable core of the plain encoding
    g = moser()
    cnf = encode(g, 3)
    res = solve(cnf)
    assert res.status == UNSAT
    rep = trim(cnf.clauses, res.proof)
    alo_in_core = {
        cnf.tags[i][1] for i in rep.core_clause_indices if cnf.tags[i][0] == "ALO"
    }
    assert alo_in_core == set(range(7))


def test_trim_core_of_spindle_with_sb_covers_every_vertex():
    # under symmetry breaking an anchor may be carried by its unit clause
    # instead of its at-least-one clause, but every vertex must show up
    g = moser()
    cnf = encode(g, 3, symmetry_breaking=True)
    res = solve(cnf)
    assert res.status == UNSAT
    rep = trim(cnf.clauses, res.proof)
    covered = {
        cnf.tags[i][1]
        for i in rep.core_clause_indices
        if cnf.tags[i][0] in ("ALO", "SYM")
    }
    covered |= {
        v
        for i in rep.core_clause_indices
        if cnf.tags[i][0] == "EDGE"
        for v in cnf.tags[i][1:3]
    }
    assert covered == set(range(7))


def test_trim_lengths_never_grow():
    g = moser()
    cnf = encode(g, 3, symmetry_breaking=True)
    res = solve(cnf)
    rep = trim(cnf.clauses, res.proof)
    assert rep.trimmed_proof.additions <= res.proof.additions
    assert len(rep.core_clause_indices) <= len(cnf.clauses)


# -- trim invariants on random instances ----------------------------------------------

def test_trim_invariants_random_unsat():
    rng = random.Random(99)
    tested = 0
    while tested < 25:
        nvars = rng.randint(3, 8)
        clauses = [
            [rng.choice([-1, 1]) * rng.randint(1, nvars) for _ in range(rng.randint(1, 3))]
            for _ in range(rng.randint(6, 26))
        ]
        res = solve((nvars, clauses), SolverConfig(seed=tested))
        if res.status != UNSAT:
            continue
        tested += 1
        rep = trim(clauses, res.proof)
        core = [clauses[i] for i in rep.core_clause_indices]
        # (a) the trimmed proof verifies against the core
        assert check(core, rep.trimmed_proof).ok
        # (b) the core re-solved from scratch is UNSAT
        assert solve((nvars, core)).status == UNSAT
        # (c) no growth
        assert rep.trimmed_proof.additions <= res.proof.additions
        assert len(core) <= len(clauses)


def test_check_accepts_all_solver_proofs_random():
    rng = random.Random(5)
    for trial in range(40):
        nvars = rng.randint(2, 7)
        clauses = [
            [rng.choice([-1, 1]) * rng.randint(1, nvars) for _ in range(rng.randint(1, 3))]
            for _ in range(rng.randint(4, 20))
        ]
        res = solve((nvars, clauses), SolverConfig(seed=trial))
        if res.status == UNSAT:
            assert check(clauses, res.proof).ok


# -- core_to_subgraph ----------------------------------------------------------------------


def pt(x, y):
    return Point(CTX.rational(x), CTX.rational(y))


def test_isolated_far_vertex_removed():
    g = moser().union(UnitDistanceGraph.from_points([pt(10, 0)]))
    assert g.n == 8
    cnf = encode(g, 3, symmetry_breaking=True)
    res = solve(cnf)
    assert res.status == UNSAT
    rep = trim(cnf.clauses, res.proof)
    sub = core_to_subgraph(g, cnf, rep)
    assert sub.n == 7
    assert pt(10, 0) not in sub
    assert sub.m == 11


def test_all_alo_in_core_keeps_vertex_set():
    g = moser()
    cnf = encode(g, 3, symmetry_breaking=True)
    res = solve(cnf)
    rep = trim(cnf.clauses, res.proof)
    sub = core_to_subgraph(g, cnf, rep)
    assert set(sub.points) == set(g.points)


def test_edges_restored_between_survivors():
    # hand the extractor a core that lost an edge clause between survivors:
    # the subgraph must still contain that unit-distance edge
    g = moser()
    cnf = encode(g, 3)
    res = solve(cnf)
    rep = trim(cnf.clauses, res.proof)
    some_edge_idx = next(
        i for i in rep.core_clause_indices if cnf.tags[i][0] == "EDGE"
    )
    v, w = cnf.tags[some_edge_idx][1], cnf.tags[some_edge_idx][2]
    pruned = CoreReport(
        [i for i in rep.core_clause_indices
         if not (cnf.tags[i][0] == "EDGE" and cnf.tags[i][1] == v and cnf.tags[i][2] == w)],
        rep.trimmed_proof,
    )
    sub = core_to_subgraph(g, cnf, pruned)
    if g.points[v] in sub.index and g.points[w] in sub.index:
        a, b = sub.index[g.points[v]], sub.index[g.points[w]]
        assert (min(a, b), max(a, b)) in sub.edges

"""Conflict-driven clause-learning SAT solver with DRAT proof output.

Standard architecture: two-watched-literal propagation, first-UIP clause
learning with local minimization, exponential variable activities with a
lazy heap, phase saving, Luby restarts, and activity/LBD-based reduction of
the learned-clause database.  Every learned clause is appended to the DRAT
proof as an addition step and every clause dropped by database reduction as
a deletion step, so an UNSAT run leaves behind a checkable refutation.

Literals are encoded internally as 2v (positive) / 2v+1 (negative); the
public surface speaks signed DIMACS integers.  One solver instance runs one
solve and is not reusable; make a fresh instance per formula.
"""

from __future__ import annotations

import random
import re
import shlex
import subprocess
import time
from dataclasses import dataclass, field
from heapq import heappop, heappush

from .drat import DratProof

SAT = "SAT"
UNSAT = "UNSAT"
UNKNOWN = "UNKNOWN"


class ProcessFailure(RuntimeError):
    """External solver process could not run or crashed."""


class UnparseableOutput(RuntimeError):
    """External solver output did not follow the expected conventions."""


class ModelCheckFailed(UnparseableOutput):
    """External solver claimed SAT but its model falsifies the formula."""


@dataclass
class SolverConfig:
    seed: int = 0
    var_decay: float = 0.95
    clause_decay: float = 0.999
    random_decision_freq: float = 0.02
    restart_base: int = 100
    max_conflicts: int | None = 10_000_000
    max_seconds: float | None = None
    emit_proof: bool = True
    backend: str = "auto"  # auto | fast | python

    def __post_init__(self):
        if self.max_conflicts is not None and self.max_conflicts <= 0:
            raise ValueError("conflict budget must be positive")
        if self.max_seconds is not None and self.max_seconds <= 0:
            raise ValueError("time budget must be positive")
        if self.backend not in ("auto", "fast", "python"):
            raise ValueError(f"unknown backend {self.backend!r}")


@dataclass
class SolveStats:
    conflicts: int = 0
    decisions: int = 0
    propagations: int = 0
    restarts: int = 0
    learned: int = 0
    runtime: float = 0.0


@dataclass
class SolveResult:
    status: str
    model: dict[int, bool] | None = None
    proof: DratProof | None = None
    proof_path: str | None = None
    stats: SolveStats = field(default_factory=SolveStats)


def _luby(i: int) -> int:
    """1,1,2,1,1,2,4,...: the i-th Luby restart factor (1-based)."""
    k = 1
    while (1 << k) - 1 < i:
        k += 1
    while (1 << k) - 1 != i:
        i -= (1 << (k - 1)) - 1
        k = 1
        while (1 << k) - 1 < i:
            k += 1
    return 1 << (k - 1)


class Solver:
    def __init__(self, nvars: int, cfg: SolverConfig, proof_file=None):
        self.cfg = cfg
        self.nvars = nvars
        n = nvars + 1
        self.val = bytearray(2 * n)  # per literal: 0 undef, 1 true, 2 false
        self.watches: list[list[int]] = [[] for _ in range(2 * n)]  # flat [cid, blocker, ...]
        self.lits: list[int] = []
        self.c_start: list[int] = []
        self.c_size: list[int] = []
        self.c_learned: list[bool] = []
        self.c_lbd: list[int] = []
        self.c_act: list[float] = []
        self.n_original = 0
        self.units: list[int] = []  # root-level input units
        self.trail: list[int] = []
        self.trail_lim: list[int] = []
        self.qhead = 0
        self.dl = 0
        self.level = [0] * n
        self.reason = [-1] * n
        self.phase = bytearray(n)  # saved polarity, 1 = positive
        self.activity = [0.0] * n
        self.act_inc = 1.0
        self.cla_inc = 1.0
        self.heap: list[tuple[float, int]] = []
        self.seen = bytearray(n)
        self.rng = random.Random(cfg.seed)
        self.stats = SolveStats()
        self.proof_file = proof_file
        self.proof_steps: list[tuple[bool, tuple[int, ...]]] = []
        self.root_conflict = False

    # -- proof emission ------------------------------------------------------

    def _proof_add(self, clause: list[int]) -> None:
        if not self.cfg.emit_proof:
            return
        signed = tuple(-(l >> 1) if l & 1 else l >> 1 for l in clause)
        if self.proof_file is not None:
            self.proof_file.write(" ".join(map(str, signed)) + " 0\n")
        else:
            self.proof_steps.append((False, signed))

    def _proof_delete(self, clause: list[int]) -> None:
        if not self.cfg.emit_proof:
            return
        signed = tuple(-(l >> 1) if l & 1 else l >> 1 for l in clause)
        if self.proof_file is not None:
            self.proof_file.write("d " + " ".join(map(str, signed)) + " 0\n")
        else:
            self.proof_steps.append((True, signed))

    # -- clause database -------------------------------------------------------

    def _add_clause_raw(self, lits: list[int], learned: bool, lbd: int) -> int:
        cid = len(self.c_start)
        self.c_start.append(len(self.lits))
        self.c_size.append(len(lits))
        self.c_learned.append(learned)
        self.c_lbd.append(lbd)
        self.c_act.append(0.0)
        self.lits.extend(lits)
        b = self.c_start[cid]
        w0, w1 = self.lits[b], self.lits[b + 1]
        self.watches[w0].append(cid)
        self.watches[w0].append(w1)
        self.watches[w1].append(cid)
        self.watches[w1].append(w0)
        return cid

    def add_input_clause(self, clause: list[int]) -> bool:
        """Returns False if the clause is the (unsatisfiable) empty clause."""
        enc = []
        seen = set()
        taut = False
        for l in clause:
            e = 2 * l if l > 0 else -2 * l + 1
            if e ^ 1 in seen:
                taut = True
                break
            if e not in seen:
                seen.add(e)
                enc.append(e)
        if taut:
            return True
        if not enc:
            self.root_conflict = True
            return False
        if len(enc) == 1:
            self.units.append(enc[0])
            return True
        self._add_clause_raw(enc, False, 0)
        return True

    # -- assignment ----------------------------------------------------------------

    def _enqueue(self, lit: int, reason_cid: int) -> None:
        self.val[lit] = 1
        self.val[lit ^ 1] = 2
        v = lit >> 1
        self.level[v] = self.dl
        self.reason[v] = reason_cid
        self.trail.append(lit)

    def _backjump(self, lvl: int) -> None:
        if self.dl <= lvl:
            return
        trail = self.trail
        val = self.val
        lim = self.trail_lim[lvl]
        heap = self.heap
        activity = self.activity
        for idx in range(len(trail) - 1, lim - 1, -1):
            l = trail[idx]
            v = l >> 1
            val[l] = 0
            val[l ^ 1] = 0
            self.phase[v] = (l & 1) ^ 1
            self.reason[v] = -1
            heappush(heap, (-activity[v], v))
        del trail[lim:]
        del self.trail_lim[lvl:]
        self.qhead = lim
        self.dl = lvl

    # -- activities --------------------------------------------------------------------

    def _bump_var(self, v: int) -> None:
        a = self.activity[v] + self.act_inc
        self.activity[v] = a
        if a > 1e100:
            inv = 1e-100
            for i in range(len(self.activity)):
                self.activity[i] *= inv
            self.act_inc *= inv
            self.heap = [(-self.activity[v2], v2) for v2 in range(1, self.nvars + 1)
                         if self.val[2 * v2] == 0]
            self.heap.sort()
        else:
            heappush(self.heap, (-a, v))

    def _bump_clause(self, cid: int) -> None:
        a = self.c_act[cid] + self.cla_inc
        self.c_act[cid] = a
        if a > 1e20:
            inv = 1e-20
            for i in range(len(self.c_act)):
                self.c_act[i] *= inv
            self.cla_inc *= inv

    # -- propagation (hot path) ------------------------------------------------------------

    def _propagate(self) -> int:
        val = self.val
        lits = self.lits
        c_start = self.c_start
        c_size = self.c_size
        watches = self.watches
        trail = self.trail
        reason = self.reason
        level = self.level
        dl = self.dl
        qhead = self.qhead
        props = 0
        while qhead < len(trail):
            p = trail[qhead]
            qhead += 1
            fl = p ^ 1
            ws = watches[fl]
            i = j = 0
            n_ws = len(ws)
            while i < n_ws:
                cid = ws[i]
                blocker = ws[i + 1]
                i += 2
                if val[blocker] == 1:
                    ws[j] = cid
                    ws[j + 1] = blocker
                    j += 2
                    continue
                b = c_start[cid]
                other = lits[b]
                if other == fl:
                    other = lits[b + 1]
                    lits[b] = other
                    lits[b + 1] = fl
                if val[other] == 1:
                    ws[j] = cid
                    ws[j + 1] = other
                    j += 2
                    continue
                k = b + 2
                e = b + c_size[cid]
                while k < e:
                    lk = lits[k]
                    if val[lk] != 2:
                        lits[b + 1] = lk
                        lits[k] = fl
                        wl = watches[lk]
                        wl.append(cid)
                        wl.append(other)
                        break
                    k += 1
                else:
                    ws[j] = cid
                    ws[j + 1] = other
                    j += 2
                    if val[other] == 2:
                        while i < n_ws:  # conflict: keep remaining watchers
                            ws[j] = ws[i]
                            ws[j + 1] = ws[i + 1]
                            i += 2
                            j += 2
                        del ws[j:]
                        self.qhead = len(trail)
                        self.stats.propagations += props
                        return cid
                    val[other] = 1
                    val[other ^ 1] = 2
                    v = other >> 1
                    level[v] = dl
                    reason[v] = cid
                    trail.append(other)
                    props += 1
            del ws[j:]
        self.qhead = qhead
        self.stats.propagations += props
        return -1

    # -- conflict analysis ---------------------------------------------------------

    def _analyze(self, confl: int) -> tuple[list[int], int, int]:
        lits = self.lits
        c_start = self.c_start
        c_size = self.c_size
        seen = self.seen
        level = self.level
        reason = self.reason
        trail = self.trail
        cur = self.dl
        learnt: list[int] = [0]
        path = 0
        p = -1
        idx = len(trail)
        c = confl
        while True:
            if self.c_learned[c]:
                self._bump_clause(c)
            b = c_start[c]
            for t in range(b, b + c_size[c]):
                q = lits[t]
                if q == p:
                    continue
                v = q >> 1
                if not seen[v] and level[v] > 0:
                    seen[v] = 1
                    self._bump_var(v)
                    if level[v] >= cur:
                        path += 1
                    else:
                        learnt.append(q)
            idx -= 1
            while not seen[trail[idx] >> 1]:
                idx -= 1
            p = trail[idx]
            v = p >> 1
            c = reason[v]
            seen[v] = 0
            path -= 1
            if path == 0:
                break
        learnt[0] = p ^ 1

        # local minimization: drop literals implied by the rest of the clause
        out = [learnt[0]]
        for q in learnt[1:]:
            r = reason[q >> 1]
            if r == -1:
                out.append(q)
                continue
            b = c_start[r]
            for t in range(b, b + c_size[r]):
                x = lits[t]
                xv = x >> 1
                if xv != (q >> 1) and not seen[xv] and level[xv] > 0:
                    out.append(q)
                    break
        levels = set()
        for q in out:
            levels.add(level[q >> 1])
            seen[q >> 1] = 0
        for q in learnt:  # clear the dropped ones too
            seen[q >> 1] = 0
        lbd = len(levels)

        if len(out) == 1:
            return out, 0, lbd
        # move a literal of the backjump level to the second watch position
        bt = 0
        pos = 1
        for t in range(1, len(out)):
            lv = level[out[t] >> 1]
            if lv > bt:
                bt = lv
                pos = t
        out[1], out[pos] = out[pos], out[1]
        return out, bt, lbd

    # -- learned-clause database reduction ------------------------------------------------

    def _reduce_db(self) -> None:
        locked = set()
        for l in self.trail:
            r = self.reason[l >> 1]
            if r != -1:
                locked.add(r)
        learned_ids = [
            cid
            for cid in range(self.n_original, len(self.c_start))
            if self.c_size[cid] > 0
        ]
        removable = [
            cid
            for cid in learned_ids
            if cid not in locked and self.c_lbd[cid] > 2 and self.c_size[cid] > 2
        ]
        removable.sort(key=lambda cid: (-self.c_lbd[cid], self.c_act[cid]))
        drop = set(removable[: len(learned_ids) // 2])
        if not drop:
            return
        for cid in drop:
            b = self.c_start[cid]
            self._proof_delete(self.lits[b : b + self.c_size[cid]])
        self._compact(drop)

    def _compact(self, drop: set[int]) -> None:
        new_lits: list[int] = []
        remap = {}
        n_old = len(self.c_start)
        keep = [cid for cid in range(n_old) if cid not in drop and self.c_size[cid] > 0]
        c_start, c_size = [], []
        c_learned, c_lbd, c_act = [], [], []
        for new_cid, cid in enumerate(keep):
            remap[cid] = new_cid
            b = self.c_start[cid]
            sz = self.c_size[cid]
            c_start.append(len(new_lits))
            new_lits.extend(self.lits[b : b + sz])
            c_size.append(sz)
            c_learned.append(self.c_learned[cid])
            c_lbd.append(self.c_lbd[cid])
            c_act.append(self.c_act[cid])
        self.lits = new_lits
        self.c_start = c_start
        self.c_size = c_size
        self.c_learned = c_learned
        self.c_lbd = c_lbd
        self.c_act = c_act
        for w in self.watches:
            del w[:]
        for cid in range(len(c_start)):
            b = c_start[cid]
            w0, w1 = self.lits[b], self.lits[b + 1]
            self.watches[w0].append(cid)
            self.watches[w0].append(w1)
            self.watches[w1].append(cid)
            self.watches[w1].append(w0)
        for v in range(1, self.nvars + 1):
            r = self.reason[v]
            if r != -1:
                self.reason[v] = remap[r]

    # -- decisions ----------------------------------------------------------------------------

    def _decide(self) -> bool:
        v = 0
        if self.rng.random() < self.cfg.random_decision_freq:
            for _ in range(8):
                cand = self.rng.randint(1, self.nvars)
                if self.val[2 * cand] == 0:
                    v = cand
                    break
        heap = self.heap
        val = self.val
        activity = self.activity
        while v == 0 and heap:
            negact, cand = heappop(heap)
            if val[2 * cand] == 0 and -negact == activity[cand]:
                v = cand
        if v == 0:
            for cand in range(1, self.nvars + 1):  # heap exhausted by staleness
                if val[2 * cand] == 0:
                    v = cand
                    break
            else:
                return False
        self.dl += 1
        self.trail_lim.append(len(self.trail))
        self._enqueue(2 * v + ((self.phase[v]) ^ 1), -1)
        self.stats.decisions += 1
        return True

    # -- main search --------------------------------------------------------------------------

    def solve(self) -> SolveResult:
        t0 = time.perf_counter()
        stats = self.stats
        if self.root_conflict:
            self._proof_add([])
            return self._finish(UNSAT, t0)
        for u in self.units:
            if self.val[u] == 2:
                self._proof_add([])
                return self._finish(UNSAT, t0)
            if self.val[u] == 0:
                self._enqueue(u, -1)
        self.n_original = len(self.c_start)
        # decision order seeded by first occurrence: earlier variables in the
        # clause stream get a head start, so shuffling the input moves the
        # search (and hence the proof) around
        rank = 0
        seen_vars = set()
        eps = 1e-7
        total = self.nvars
        for t in self.lits:
            v = t >> 1
            if v not in seen_vars:
                seen_vars.add(v)
                self.activity[v] = eps * (total - rank)
                rank += 1
        self.heap = [(-self.activity[v], v) for v in range(1, self.nvars + 1)]
        self.heap.sort()

        if self._propagate() != -1:
            self._proof_add([])
            return self._finish(UNSAT, t0)

        learnt_limit = max(2000, len(self.c_start) // 3)
        restart_idx = 1
        conflicts_until_restart = _luby(restart_idx) * self.cfg.restart_base
        max_conflicts = self.cfg.max_conflicts
        max_seconds = self.cfg.max_seconds

        while True:
            confl = self._propagate()
            if confl != -1:
                stats.conflicts += 1
                conflicts_until_restart -= 1
                if self.dl == 0:
                    self._proof_add([])
                    return self._finish(UNSAT, t0)
                learnt, bt, lbd = self._analyze(confl)
                self._proof_add(learnt)
                stats.learned += 1
                self._backjump(bt)
                if len(learnt) == 1:
                    self._enqueue(learnt[0], -1)
                else:
                    cid = self._add_clause_raw(learnt, True, lbd)
                    self._bump_clause(cid)
                    self._enqueue(learnt[0], cid)
                self.act_inc /= self.cfg.var_decay
                self.cla_inc /= self.cfg.clause_decay
                if max_conflicts is not None and stats.conflicts >= max_conflicts:
                    return self._finish(UNKNOWN, t0)
                if max_seconds is not None and stats.conflicts % 512 == 0:
                    if time.perf_counter() - t0 > max_seconds:
                        return self._finish(UNKNOWN, t0)
            else:
                if conflicts_until_restart <= 0:
                    stats.restarts += 1
                    restart_idx += 1
                    conflicts_until_restart = _luby(restart_idx) * self.cfg.restart_base
                    self._backjump(0)
                    continue
                if len(self.c_start) - self.n_original > learnt_limit:
                    self._reduce_db()
                    learnt_limit = int(learnt_limit * 1.2)
                if not self._decide():
                    self._verify_model()
                    return self._finish(SAT, t0)

    def _verify_model(self) -> None:
        val = self.val
        for u in self.units:
            if val[u] != 1:
                raise AssertionError("model check failed on a unit clause")
        for cid in range(self.n_original):
            b = self.c_start[cid]
            if not any(val[self.lits[t]] == 1 for t in range(b, b + self.c_size[cid])):
                raise AssertionError(f"model check failed on clause {cid}")

    def _finish(self, status: str, t0: float) -> SolveResult:
        self.stats.runtime = time.perf_counter() - t0
        result = SolveResult(status=status, stats=self.stats)
        if status == SAT:
            result.model = {v: self.val[2 * v] == 1 for v in range(1, self.nvars + 1)}
        elif status == UNSAT and self.cfg.emit_proof and self.proof_file is None:
            result.proof = DratProof(self.proof_steps)
        return result


def _as_clauses(formula) -> tuple[int, list[list[int]]]:
    if hasattr(formula, "clauses") and hasattr(formula, "nvars"):
        return formula.nvars, formula.clauses
    nvars, clauses = formula
    return nvars, clauses


def _fast_available() -> bool:
    try:
        from . import _fastsolve

        return _fastsolve.HAVE_NUMBA
    except ImportError:
        return False


def _solve_fast(nvars: int, clauses, cfg: SolverConfig, proof_path: str | None) -> SolveResult:
    from . import _fastsolve

    t0 = time.perf_counter()
    enc_clauses: list[list[int]] = []
    units: list[int] = []
    for clause in clauses:
        enc = []
        seen = set()
        taut = False
        for l in clause:
            e = 2 * l if l > 0 else -2 * l + 1
            if e ^ 1 in seen:
                taut = True
                break
            if e not in seen:
                seen.add(e)
                enc.append(e)
        if taut:
            continue
        if not enc:
            proof = DratProof([(False, ())]) if cfg.emit_proof else None
            if proof is not None and proof_path:
                proof.write(proof_path)
            return SolveResult(
                UNSAT,
                proof=None if proof_path else proof,
                proof_path=proof_path if cfg.emit_proof else None,
                stats=SolveStats(runtime=time.perf_counter() - t0),
            )
        if len(enc) == 1:
            units.append(enc[0])
        else:
            enc_clauses.append(enc)
    status_i, proof_arr, val, conflicts, decisions, props, restarts, learned = (
        _fastsolve.run_fast(enc_clauses, units, nvars, cfg)
    )
    stats = SolveStats(
        conflicts=int(conflicts),
        decisions=int(decisions),
        propagations=int(props),
        restarts=int(restarts),
        learned=int(learned),
        runtime=time.perf_counter() - t0,
    )
    if status_i == _fastsolve.SAT_:
        model = {v: bool(val[2 * v] == 1) for v in range(1, nvars + 1)}
        for clause in clauses:  # re-verify before trusting the engine
            if clause and not any(model.get(abs(l), False) == (l > 0) for l in clause):
                raise AssertionError("fast backend model check failed")
        return SolveResult(SAT, model=model, stats=stats)
    if status_i == _fastsolve.UNSAT_:
        result = SolveResult(UNSAT, stats=stats)
        if cfg.emit_proof:
            steps = []
            i = 0
            arr = proof_arr
            while i < arr.size:
                kind = int(arr[i])
                count = int(arr[i + 1])
                i += 2
                steps.append((kind == 1, tuple(int(x) for x in arr[i : i + count])))
                i += count
            proof = DratProof(steps)
            if proof_path:
                proof.write(proof_path)
                result.proof_path = proof_path
            else:
                result.proof = proof
        return result
    return SolveResult(UNKNOWN, stats=stats)


def solve(formula, cfg: SolverConfig | None = None, proof_path: str | None = None) -> SolveResult:
    """Solve a ColoringCnf or an ``(nvars, clauses)`` pair.

    With ``proof_path`` the DRAT stream goes to that file incrementally;
    otherwise an UNSAT result carries the proof in memory.  The default
    backend is the compiled engine when numba is importable, with the pure
    Python engine as reference and fallback.
    """
    nvars, clauses = _as_clauses(formula)
    cfg = cfg or SolverConfig()
    backend = cfg.backend
    if backend == "auto":
        backend = "fast" if _fast_available() else "python"
    if backend == "fast":
        return _solve_fast(nvars, clauses, cfg, proof_path)
    handle = open(proof_path, "w") if (proof_path and cfg.emit_proof) else None
    try:
        solver = Solver(nvars, cfg, proof_file=handle)
        for clause in clauses:
            solver.add_input_clause(clause)
        result = solver.solve()
        result.proof_path = proof_path if handle else None
        return result
    finally:
        if handle is not None:
            handle.close()


# -- external solver adapter --------------------------------------------------------------------


def solve_external(
    dimacs_path: str,
    command_template: str,
    proof_path: str,
    timeout: float | None = None,
) -> SolveResult:
    """Run an external DIMACS solver and parse its standard output.

    ``command_template`` uses ``{dimacs}`` and ``{proof}`` placeholders.  The
    solver must print ``s SATISFIABLE`` with ``v`` model lines, or
    ``s UNSATISFIABLE`` and write a DRAT file to the proof path.  SAT models
    are re-checked against the formula before being trusted.
    """
    cmd = [
        part.format(dimacs=dimacs_path, proof=proof_path)
        for part in shlex.split(command_template)
    ]
    t0 = time.perf_counter()
    try:
        proc = subprocess.run(
            cmd, capture_output=True, text=True, timeout=timeout, check=False
        )
    except FileNotFoundError as exc:
        raise ProcessFailure(f"cannot run {cmd[0]!r}: {exc}") from exc
    except subprocess.TimeoutExpired as exc:
        raise ProcessFailure(f"external solver timed out after {timeout}s") from exc
    runtime = time.perf_counter() - t0
    out = proc.stdout or ""
    stats = SolveStats(runtime=runtime)
    if re.search(r"^s\s+UNSATISFIABLE\s*$", out, re.MULTILINE):
        try:
            with open(proof_path) as f:
                proof = DratProof.parse(f.read())
        except OSError as exc:
            raise UnparseableOutput(f"missing DRAT file {proof_path}: {exc}") from exc
        return SolveResult(status=UNSAT, proof=proof, proof_path=proof_path, stats=stats)
    if re.search(r"^s\s+SATISFIABLE\s*$", out, re.MULTILINE):
        model: dict[int, bool] = {}
        for line in out.splitlines():
            if line.startswith("v ") or line == "v":
                for tok in line[1:].split():
                    lit = int(tok)
                    if lit != 0:
                        model[abs(lit)] = lit > 0
        if not model:
            raise UnparseableOutput("SAT status but no v lines")
        with open(dimacs_path) as f:
            from .encode import read_dimacs

            nvars, clauses = read_dimacs(f.read())
        for i, clause in enumerate(clauses):
            if not any(model.get(abs(l), False) == (l > 0) for l in clause):
                raise ModelCheckFailed(f"external model falsifies clause {i}")
        for v in range(1, nvars + 1):
            model.setdefault(v, False)
        return SolveResult(status=SAT, model=model, stats=stats)
    if proc.returncode not in (0, 10, 20):
        raise ProcessFailure(f"exit code {proc.returncode}, no status line")
    raise UnparseableOutput("no s SATISFIABLE / s UNSATISFIABLE line")

"""DRAT proof checking, trimming, and unsatisfiable-core extraction.

A proof is a sequence of clause additions and deletions over an input
formula.  An addition is redundant if unit propagation on the accumulated
formula plus the negated clause reaches a conflict (RUP), or failing that,
if every resolvent on the clause's first literal passes that test (RAT).
A proof refutes the formula when it derives the empty clause.

``check`` verifies a proof front to back.  ``trim`` walks it backwards from
the empty clause, verifying only the steps that some later verification
actually used, and collects the original clauses touched by any of those
conflict analyses: the unsatisfiable core.  Propagation prefers clauses that
are already marked, which is what keeps cores (and hence the shrunken
graphs extracted from them) small.  Applied to a coloring formula, a core
that lacks a vertex's at-least-one-color clause proves the vertex is
redundant; ``core_to_subgraph`` turns that observation into a graph.
"""

from __future__ import annotations

from dataclasses import dataclass, field


class InvalidProof(ValueError):
    """The proof does not verify against the formula."""


@dataclass
class DratProof:
    """Sequence of (is_delete, signed-literal-tuple) steps."""

    steps: list[tuple[bool, tuple[int, ...]]]

    def __len__(self) -> int:
        return len(self.steps)

    @property
    def additions(self) -> int:
        return sum(1 for d, _ in self.steps if not d)

    @property
    def deletions(self) -> int:
        return sum(1 for d, _ in self.steps if d)

    def text(self) -> str:
        lines = []
        for is_del, lits in self.steps:
            body = " ".join(map(str, lits)) + (" 0" if lits else "0")
            lines.append(("d " + body) if is_del else body)
        return "\n".join(lines) + ("\n" if lines else "")

    @classmethod
    def parse(cls, text: str) -> "DratProof":
        steps = []
        for raw in text.splitlines():
            line = raw.strip()
            if not line or line.startswith("c"):
                continue
            is_del = False
            if line.startswith("d ") or line == "d":
                is_del = True
                line = line[1:].strip()
            toks = line.split()
            if not toks or toks[-1] != "0":
                raise ValueError(f"proof line not terminated by 0: {raw!r}")
            steps.append((is_del, tuple(int(t) for t in toks[:-1])))
        return cls(steps)

    def write(self, path: str) -> None:
        with open(path, "w") as f:
            f.write(self.text())

    @classmethod
    def read(cls, path: str) -> "DratProof":
        with open(path) as f:
            return cls.parse(f.read())


@dataclass
class CheckResult:
    ok: bool
    step: int | None = None
    reason: str = ""
    steps_verified: int = 0

    def __bool__(self) -> bool:
        return self.ok


@dataclass
class TrimStats:
    checked_steps: int = 0
    skipped_steps: int = 0
    input_additions: int = 0
    trimmed_additions: int = 0


@dataclass
class CoreReport:
    core_clause_indices: list[int]
    trimmed_proof: DratProof
    stats: TrimStats = field(default_factory=TrimStats)


def _encode(l: int) -> int:
    return 2 * l if l > 0 else -2 * l + 1


def _decode(e: int) -> int:
    return -(e >> 1) if e & 1 else e >> 1


class _Session:
    """Clause database with activation flags, two-watched-literal unit
    propagation that prefers marked clauses, and antecedent marking.

    The root trail (propagation without assumptions) persists between
    verifications and is rebuilt lazily when a database change invalidates
    it.  Verifications push assumptions on top and always undo them.
    """

    def __init__(self, formula: list[list[int]], proof: DratProof):
        maxvar = 0
        for clause in formula:
            for l in clause:
                maxvar = max(maxvar, abs(l))
        for _, lits in proof.steps:
            for l in lits:
                maxvar = max(maxvar, abs(l))
        self.nvars = maxvar
        n = maxvar + 1
        self.lits: list[int] = []
        self.c_start: list[int] = []
        self.c_size: list[int] = []
        self.pivot: list[int] = []  # first literal as written; -1 if empty
        self.orig_lits: list[tuple[int, ...]] = []  # signed, as written
        self.active = bytearray()
        self.marked = bytearray()
        self.unit_cids: list[int] = []
        self.empty_active: set[int] = set()
        self.watchesM: list[list[int]] = [[] for _ in range(2 * n)]
        self.watchesU: list[list[int]] = [[] for _ in range(2 * n)]
        self.val = bytearray(2 * n)
        self.trail: list[int] = []
        self.reason = [-1] * n
        self.reason_count: dict[int, int] = {}
        self.qM = 0
        self.qU = 0
        self.root_dirty = True
        self.root_conflict = -1
        self.visited = bytearray(n)
        self.n_formula = len(formula)
        self.buckets: dict[tuple[int, ...], list[int]] = {}
        self.watches_live = False
        for clause in formula:
            self._new_instance(clause)

    # -- instances ----------------------------------------------------------

    def _new_instance(self, signed: list[int] | tuple[int, ...]) -> int:
        enc = []
        seen = set()
        for l in signed:  # clauses are literal sets: drop repeats, keep order
            e = _encode(l)
            if e not in seen:
                seen.add(e)
                enc.append(e)
        cid = len(self.c_start)
        self.c_start.append(len(self.lits))
        self.c_size.append(len(enc))
        self.pivot.append(enc[0] if enc else -1)
        self.orig_lits.append(tuple(signed))
        self.lits.extend(enc)
        self.active.append(0)
        self.marked.append(0)
        if len(enc) == 1:
            self.unit_cids.append(cid)
        return cid

    def _key(self, cid: int) -> tuple[int, ...]:
        b = self.c_start[cid]
        return tuple(sorted(self.lits[b : b + self.c_size[cid]]))

    def _clause_lits(self, cid: int) -> list[int]:
        b = self.c_start[cid]
        return self.lits[b : b + self.c_size[cid]]

    # -- activation with watch upkeep -------------------------------------------

    def activate(self, cid: int) -> None:
        self.active[cid] = 1
        self.buckets.setdefault(self._key(cid), []).append(cid)
        if not self.watches_live:
            return
        sz = self.c_size[cid]
        if sz == 0:
            self.empty_active.add(cid)
            return
        b = self.c_start[cid]
        lits = self.lits
        val = self.val
        if sz == 1:
            lit = lits[b]
            if not self.root_dirty:
                if val[lit] == 2:
                    self.root_dirty = True
                elif val[lit] == 0:
                    self._enqueue(lit, cid)
            return
        # move up to two non-false literals to the watch positions
        first = -1
        second = -1
        for k in range(b, b + sz):
            if val[lits[k]] != 2:
                if first < 0:
                    first = k
                else:
                    second = k
                    break
        if first < 0:
            self.root_dirty = True  # falsified at root; rebuild will notice
        elif second < 0:
            lits[b], lits[first] = lits[first], lits[b]
            if not self.root_dirty and val[lits[b]] == 0:
                self._enqueue(lits[b], cid)
        else:
            lits[b], lits[first] = lits[first], lits[b]
            if second == b:
                second = first
            lits[b + 1], lits[second] = lits[second], lits[b + 1]
        self._watch(cid, lits[b], lits[b + 1])
        self._watch(cid, lits[b + 1], lits[b])

    def _watch(self, cid: int, w: int, other: int) -> None:
        ws = self.watchesM[w] if self.marked[cid] else self.watchesU[w]
        ws.append(cid)
        ws.append(other)

    def deactivate(self, cid: int) -> None:
        self.active[cid] = 0
        key = self._key(cid)
        bucket = self.buckets.get(key)
        if bucket and cid in bucket:
            bucket.remove(cid)
        self.empty_active.discard(cid)
        if self.reason_count.get(cid):
            self.root_dirty = True

    def pop_matching_active(self, signed: tuple[int, ...]) -> int | None:
        key = tuple(sorted({_encode(l) for l in signed}))
        bucket = self.buckets.get(key)
        if not bucket:
            return None
        cid = bucket[-1]
        self.active[cid] = 0
        bucket.pop()
        self.empty_active.discard(cid)
        if self.reason_count.get(cid):
            self.root_dirty = True
        return cid

    def init_watches(self) -> None:
        """(Re)create watches for every active clause; root state reset."""
        self.watches_live = True
        for w in self.watchesM:
            del w[:]
        for w in self.watchesU:
            del w[:]
        self.empty_active.clear()
        for cid in range(len(self.c_start)):
            if not self.active[cid]:
                continue
            sz = self.c_size[cid]
            if sz == 0:
                self.empty_active.add(cid)
            elif sz >= 2:
                b = self.c_start[cid]
                self._watch(cid, self.lits[b], self.lits[b + 1])
                self._watch(cid, self.lits[b + 1], self.lits[b])
        self.root_dirty = True

    # -- assignment -----------------------------------------------------------------

    def _enqueue(self, lit: int, reason_cid: int) -> None:
        self.val[lit] = 1
        self.val[lit ^ 1] = 2
        self.reason[lit >> 1] = reason_cid
        if reason_cid != -1:
            self.reason_count[reason_cid] = self.reason_count.get(reason_cid, 0) + 1
        self.trail.append(lit)

    def _undo_to(self, saved: int) -> None:
        trail = self.trail
        val = self.val
        for idx in range(len(trail) - 1, saved - 1, -1):
            l = trail[idx]
            v = l >> 1
            val[l] = 0
            val[l ^ 1] = 0
            r = self.reason[v]
            if r != -1:
                c = self.reason_count.get(r, 0) - 1
                if c:
                    self.reason_count[r] = c
                else:
                    self.reason_count.pop(r, None)
            self.reason[v] = -1
        del trail[saved:]
        self.qM = min(self.qM, saved)
        self.qU = min(self.qU, saved)

    def ensure_root(self) -> int:
        """Propagate to fixpoint at the root; returns a conflict cid or -1."""
        if self.root_dirty:
            self._undo_to(0)
            self.root_dirty = False
            self.root_conflict = -1
            if self.empty_active:
                self.root_conflict = next(iter(self.empty_active))
                return self.root_conflict
            for cid in self.unit_cids:
                if not self.active[cid]:
                    continue
                lit = self.lits[self.c_start[cid]]
                if self.val[lit] == 2:
                    self.root_conflict = cid
                    return cid
                if self.val[lit] == 0:
                    self._enqueue(lit, cid)
            self.root_conflict = self._propagate()
            return self.root_conflict
        if self.root_conflict != -1 and self.active[self.root_conflict]:
            return self.root_conflict
        if self.empty_active:
            self.root_conflict = next(iter(self.empty_active))
            return self.root_conflict
        self.root_conflict = self._propagate()
        return self.root_conflict

    # -- propagation, marked clauses first ------------------------------------------

    def _propagate(self) -> int:
        trail = self.trail
        while True:
            if self.qM < len(trail):
                p = trail[self.qM]
                self.qM += 1
                c = self._scan(self.watchesM[p ^ 1], p ^ 1, True)
                if c != -1:
                    return c
                continue
            if self.qU < len(trail):
                p = trail[self.qU]
                self.qU += 1
                c = self._scan(self.watchesU[p ^ 1], p ^ 1, False)
                if c != -1:
                    return c
                continue
            return -1

    def _scan(self, ws: list[int], fl: int, marked_list: bool) -> int:
        val = self.val
        lits = self.lits
        c_start = self.c_start
        c_size = self.c_size
        active = self.active
        marked = self.marked
        i = j = 0
        n_ws = len(ws)
        while i < n_ws:
            cid = ws[i]
            blocker = ws[i + 1]
            i += 2
            if val[blocker] == 1 and active[cid] and marked[cid] == marked_list:
                ws[j] = cid
                ws[j + 1] = blocker
                j += 2
                continue
            if not active[cid] or marked[cid] != marked_list:
                continue  # stale entry: drop
            b = c_start[cid]
            other = lits[b]
            if other == fl:
                other = lits[b + 1]
                lits[b] = other
                lits[b + 1] = fl
            elif lits[b + 1] != fl:
                continue  # stale entry: watches moved elsewhere
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
                    self._watch(cid, lk, other)
                    break
                k += 1
            else:
                ws[j] = cid
                ws[j + 1] = other
                j += 2
                if val[other] == 2:
                    while i < n_ws:
                        ws[j] = ws[i]
                        ws[j + 1] = ws[i + 1]
                        i += 2
                        j += 2
                    del ws[j:]
                    return cid
                self._enqueue(other, cid)
        del ws[j:]
        return -1

    # -- antecedent marking --------------------------------------------------------------

    def _mark_clause(self, cid: int) -> None:
        if self.marked[cid]:
            return
        self.marked[cid] = 1
        if self.active[cid] and self.c_size[cid] >= 2:
            b = self.c_start[cid]
            lits = self.lits
            ws = self.watchesM
            ws[lits[b]].append(cid)
            ws[lits[b]].append(lits[b + 1])
            ws[lits[b + 1]].append(cid)
            ws[lits[b + 1]].append(lits[b])

    def _mark_from_vars(self, stack: list[int]) -> None:
        vis = self.visited
        cleared = []
        lits = self.lits
        while stack:
            v = stack.pop()
            if vis[v]:
                continue
            vis[v] = 1
            cleared.append(v)
            r = self.reason[v]
            if r != -1:
                self._mark_clause(r)
                b = self.c_start[r]
                for t in range(b, b + self.c_size[r]):
                    w = lits[t] >> 1
                    if w != v and not vis[w]:
                        stack.append(w)
        for v in cleared:
            vis[v] = 0

    def _mark_conflict(self, confl_cid: int) -> None:
        self._mark_clause(confl_cid)
        b = self.c_start[confl_cid]
        self._mark_from_vars(
            [self.lits[t] >> 1 for t in range(b, b + self.c_size[confl_cid])]
        )

    # -- redundancy verification --------------------------------------------------------------

    def _rup(self, enc_clause: list[int]) -> bool:
        """Try the unit-propagation check, marking antecedents on success."""
        saved = len(self.trail)
        val = self.val
        for l in set(enc_clause):
            if val[l] == 1:
                self._mark_from_vars([l >> 1])
                self._undo_to(saved)
                return True
            if val[l] == 0:
                self._enqueue(l ^ 1, -1)
        confl = self._propagate()
        if confl != -1:
            self._mark_conflict(confl)
            self._undo_to(saved)
            return True
        self._undo_to(saved)
        return False

    def verify(self, cid: int) -> tuple[bool, str]:
        """RUP, or RAT on the recorded pivot, against the active database."""
        root = self.ensure_root()
        if root != -1:
            self._mark_conflict(root)
            return True, ""
        enc = self._clause_lits(cid)
        if self._rup(enc):
            return True, ""
        pivot = self.pivot[cid]
        if pivot == -1:
            return False, "empty clause is not implied by unit propagation"
        rest = [l for l in enc if l != pivot]
        negp = pivot ^ 1
        for d in range(len(self.c_start)):
            if not self.active[d]:
                continue
            dl = self._clause_lits(d)
            if negp not in dl:
                continue
            resolvent = rest + [x for x in dl if x != negp]
            support = set(resolvent)
            if any(x ^ 1 in support for x in support):
                continue  # tautological resolvent holds trivially
            if not self._rup(resolvent):
                return False, f"resolvent with clause instance {d} is not RUP"
        return True, ""


def _forward_pass(
    sess: _Session, proof: DratProof
) -> tuple[list[tuple[bool, int]], int]:
    """Activation bookkeeping only.  Returns (steps as (is_del, cid),
    cid of the first empty addition or -1); steps after it are dropped."""
    for cid in range(sess.n_formula):
        sess.activate(cid)
    steps: list[tuple[bool, int]] = []
    for is_del, signed in proof.steps:
        if is_del:
            cid = sess.pop_matching_active(signed)
            if cid is not None:
                steps.append((True, cid))
            continue
        cid = sess._new_instance(signed)
        sess.activate(cid)
        steps.append((False, cid))
        if not signed:
            return steps, cid
    return steps, -1


def check(
    formula: list[list[int]], proof: DratProof, require_refutation: bool = True
) -> CheckResult:
    """Verify every addition front to back, applying deletions in order."""
    sess = _Session(formula, proof)
    for cid in range(sess.n_formula):
        sess.activate(cid)
    sess.init_watches()
    derived_empty = any(len(c) == 0 for c in formula)
    verified = 0
    for idx, (is_del, signed) in enumerate(proof.steps):
        if derived_empty:
            break
        if is_del:
            sess.pop_matching_active(signed)
            continue
        cid = sess._new_instance(signed)
        ok, why = sess.verify(cid)
        if not ok:
            return CheckResult(False, idx, why, verified)
        verified += 1
        sess.activate(cid)
        if not signed:
            derived_empty = True
    if require_refutation and not derived_empty:
        return CheckResult(False, None, "no empty clause derived", verified)
    return CheckResult(True, None, "", verified)


def trim(formula: list[list[int]], proof: DratProof) -> CoreReport:
    """Backward-check a refutation; keep only what the refutation used.

    Walks back from the empty clause undoing each step; marked additions are
    verified against the database state just before them, and the clauses
    their conflict analyses touch become marked in turn.  Unmarked steps are
    dropped and unmarked original clauses are excluded from the core.  The
    result is re-checked internally before being returned.
    """
    sess = _Session(formula, proof)
    steps, empty_cid = _forward_pass(sess, proof)
    if empty_cid == -1:
        raise InvalidProof("proof does not contain the empty clause")
    sess.init_watches()
    sess.marked[empty_cid] = 1
    stats = TrimStats(input_additions=proof.additions)
    for is_del, cid in reversed(steps):
        if is_del:
            sess.activate(cid)
            continue
        sess.deactivate(cid)
        if sess.marked[cid]:
            ok, why = sess.verify(cid)
            if not ok:
                raise InvalidProof(
                    f"step adding {sess.orig_lits[cid]} failed backward check: {why}"
                )
            stats.checked_steps += 1
        else:
            stats.skipped_steps += 1
    core = [i for i in range(sess.n_formula) if sess.marked[i]]
    trimmed_steps = [
        (is_del, sess.orig_lits[cid]) for is_del, cid in steps if sess.marked[cid]
    ]
    trimmed = DratProof(trimmed_steps)
    stats.trimmed_additions = trimmed.additions
    report = CoreReport(core, trimmed, stats)
    recheck = check([formula[i] for i in core], trimmed)
    if not recheck.ok:
        raise InvalidProof(
            f"internal error: trimmed proof failed recheck at step {recheck.step}: {recheck.reason}"
        )
    return report


def core_to_subgraph(graph, cnf, report: CoreReport):
    """Vertices whose at-least-one-color clause survived in the core, with
    every unit-distance edge among them restored; symmetry anchors that were
    fixed in the formula are always kept."""
    keep = set()
    core = set(report.core_clause_indices)
    for idx in core:
        tag = cnf.tags[idx]
        if tag[0] == "ALO":
            keep.add(tag[1])
    for tag in cnf.tags:
        if tag[0] == "SYM":
            keep.add(tag[1])
    return graph.induced(sorted(keep)).resaturate()

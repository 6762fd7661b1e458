"""Compiled twin of the reference CDCL engine.

Same algorithm as :mod:`udgsat.cdcl` (two watched literals, first-UIP
learning with local minimization, phase saving, Luby restarts, LBD/activity
database reduction, DRAT emission), restated over flat numpy arrays and
compiled with numba so the big coloring instances are tractable.  Watcher
lists are linked lists in a shared arena; the variable order is an explicit
binary heap.  The proof is accumulated as an int32 stream of
``[kind, n, lit*n]`` records (kind 0 adds, 1 deletes).

The two engines are cross-validated in the test suite; either one is
deterministic for a fixed formula, config, and seed, but their proofs are
not byte-identical to each other.
"""

from __future__ import annotations

import time

import numpy as np

try:
    from numba import njit, objmode

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dependency
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(f):
            return f

        return wrap


UNKNOWN_ = 0
SAT_ = 1
UNSAT_ = 2


@njit(cache=True)
def _luby(i):
    k = 1
    while (1 << k) - 1 < i:
        k += 1
    while (1 << k) - 1 != i:
        i -= (1 << (k - 1)) - 1
        k = 1
        while (1 << k) - 1 < i:
            k += 1
    return 1 << (k - 1)


@njit(cache=True)
def _heap_up(heap, pos, act, i):
    v = heap[i]
    a = act[v]
    while i > 0:
        p = (i - 1) >> 1
        pv = heap[p]
        if act[pv] >= a:
            break
        heap[i] = pv
        pos[pv] = i
        i = p
    heap[i] = v
    pos[v] = i


@njit(cache=True)
def _heap_down(heap, pos, act, size, i):
    v = heap[i]
    a = act[v]
    while True:
        left = 2 * i + 1
        if left >= size:
            break
        child = left
        right = left + 1
        if right < size and act[heap[right]] > act[heap[left]]:
            child = right
        cv = heap[child]
        if act[cv] <= a:
            break
        heap[i] = cv
        pos[cv] = i
        i = child
    heap[i] = v
    pos[v] = i


@njit(cache=True)
def _rand_next(state):
    state ^= state >> np.uint64(12)
    state ^= state << np.uint64(25)
    state &= np.uint64(0xFFFFFFFFFFFFFFFF)
    state ^= state >> np.uint64(27)
    return state


@njit(cache=True)
def _run(
    in_lits,
    in_offsets,
    unit_lits,
    nvars,
    seed,
    var_decay,
    clause_decay,
    random_freq,
    restart_base,
    max_conflicts,
    max_seconds,
    emit_proof,
):
    n = nvars + 1
    ncl_in = in_offsets.size - 1

    # clause arena
    cap_lits = in_lits.size * 2 + 1024
    lits = np.empty(cap_lits, dtype=np.int32)
    cap_cl = ncl_in * 2 + 1024
    c_start = np.empty(cap_cl, dtype=np.int64)
    c_size = np.empty(cap_cl, dtype=np.int32)
    c_lbd = np.empty(cap_cl, dtype=np.int32)
    c_act = np.empty(cap_cl, dtype=np.float64)
    n_clauses = 0
    lits_used = 0

    # watcher linked lists
    cap_w = 2 * (in_lits.size + 1024)
    w_cid = np.empty(cap_w, dtype=np.int32)
    w_blk = np.empty(cap_w, dtype=np.int32)
    w_next = np.empty(cap_w, dtype=np.int64)
    w_used = 0
    w_free = np.int64(-1)
    watch_head = np.full(2 * n, -1, dtype=np.int64)

    val = np.zeros(2 * n, dtype=np.uint8)
    trail = np.empty(n, dtype=np.int32)
    trail_len = 0
    trail_lim = np.empty(n, dtype=np.int32)
    dl = 0
    qhead = 0
    level = np.zeros(n, dtype=np.int32)
    reason = np.full(n, -1, dtype=np.int64)
    phase = np.zeros(n, dtype=np.uint8)
    activity = np.zeros(n, dtype=np.float64)
    heap = np.empty(n, dtype=np.int32)
    heap_pos = np.full(n, -1, dtype=np.int64)
    heap_size = 0
    seen = np.zeros(n, dtype=np.uint8)
    lbd_seen = np.zeros(n + 1, dtype=np.uint8)
    learnt = np.empty(n + 1, dtype=np.int32)
    minim = np.empty(n + 1, dtype=np.int32)

    proof = np.empty(4096, dtype=np.int32)
    proof_len = 0

    conflicts = 0
    decisions = 0
    propagations = 0
    restarts = 0
    learned_total = 0
    act_inc = 1.0
    cla_inc = 1.0
    rng = np.uint64(seed * 2 + 88172645463325252)

    status = UNKNOWN_

    # ---- load input clauses (callers pass deduped, width >= 2) ----
    for ci in range(ncl_in):
        b = in_offsets[ci]
        e = in_offsets[ci + 1]
        sz = e - b
        if lits_used + sz > cap_lits:
            cap_lits = max(cap_lits * 2, lits_used + sz)
            tmp = np.empty(cap_lits, dtype=np.int32)
            tmp[:lits_used] = lits[:lits_used]
            lits = tmp
        c_start[n_clauses] = lits_used
        c_size[n_clauses] = sz
        c_lbd[n_clauses] = 0
        c_act[n_clauses] = 0.0
        for t in range(sz):
            lits[lits_used + t] = in_lits[b + t]
        lits_used += sz
        # watches
        for wslot in range(2):
            wl = lits[c_start[n_clauses] + wslot]
            other = lits[c_start[n_clauses] + (1 - wslot)]
            if w_free != -1:
                node = w_free
                w_free = w_next[node]
            else:
                if w_used >= cap_w:
                    cap_w *= 2
                    t1 = np.empty(cap_w, dtype=np.int32)
                    t1[:w_used] = w_cid[:w_used]
                    w_cid = t1
                    t2 = np.empty(cap_w, dtype=np.int32)
                    t2[:w_used] = w_blk[:w_used]
                    w_blk = t2
                    t3 = np.empty(cap_w, dtype=np.int64)
                    t3[:w_used] = w_next[:w_used]
                    w_next = t3
                node = w_used
                w_used += 1
            w_cid[node] = n_clauses
            w_blk[node] = other
            w_next[node] = watch_head[wl]
            watch_head[wl] = node
        n_clauses += 1
    n_original = n_clauses

    # ---- occurrence-ranked initial activities ----
    rank = 0
    for t in range(lits_used):
        v = lits[t] >> 1
        if activity[v] == 0.0:
            activity[v] = 1e-7 * (nvars - rank)
            rank += 1
    for lu in range(unit_lits.size):
        v = unit_lits[lu] >> 1
        if activity[v] == 0.0:
            activity[v] = 1e-7 * (nvars - rank)
            rank += 1
    for v in range(1, nvars + 1):
        heap[heap_size] = v
        heap_pos[v] = heap_size
        heap_size += 1
        _heap_up(heap, heap_pos, activity, heap_size - 1)

    # ---- root units ----
    for lu in range(unit_lits.size):
        u = unit_lits[lu]
        if val[u] == 2:
            if emit_proof:
                if proof_len + 2 > proof.size:
                    tmp = np.empty(proof.size * 2, dtype=np.int32)
                    tmp[:proof_len] = proof[:proof_len]
                    proof = tmp
                proof[proof_len] = 0
                proof[proof_len + 1] = 0
                proof_len += 2
            return (
                UNSAT_,
                proof[:proof_len],
                val,
                conflicts,
                decisions,
                propagations,
                restarts,
                learned_total,
            )
        if val[u] == 0:
            val[u] = 1
            val[u ^ 1] = 2
            level[u >> 1] = 0
            reason[u >> 1] = -1
            trail[trail_len] = u
            trail_len += 1

    learnt_limit = max(2000, n_clauses // 3)
    restart_idx = 1
    until_restart = _luby(restart_idx) * restart_base
    t_start = 0.0
    if max_seconds > 0.0:
        with objmode(t_start="float64"):
            t_start = time.perf_counter()

    while True:
        # ---------------- propagation ----------------
        confl = np.int64(-1)
        while qhead < trail_len:
            p = trail[qhead]
            qhead += 1
            fl = p ^ 1
            prev = np.int64(-1)
            cur = watch_head[fl]
            while cur != -1:
                nxt = w_next[cur]
                blk = w_blk[cur]
                if val[blk] == 1:
                    prev = cur
                    cur = nxt
                    continue
                cid = w_cid[cur]
                b = c_start[cid]
                other = lits[b]
                if other == fl:
                    other = lits[b + 1]
                    lits[b] = other
                    lits[b + 1] = fl
                if val[other] == 1:
                    w_blk[cur] = other
                    prev = cur
                    cur = nxt
                    continue
                sz = c_size[cid]
                kfound = np.int64(-1)
                for k in range(b + 2, b + sz):
                    if val[lits[k]] != 2:
                        kfound = k
                        break
                if kfound != -1:
                    lk = lits[kfound]
                    lits[b + 1] = lk
                    lits[kfound] = fl
                    if prev == -1:
                        watch_head[fl] = nxt
                    else:
                        w_next[prev] = nxt
                    w_next[cur] = watch_head[lk]
                    watch_head[lk] = cur
                    w_blk[cur] = other
                    cur = nxt
                    continue
                w_blk[cur] = other
                if val[other] == 2:
                    confl = cid
                    qhead = trail_len
                    break
                val[other] = 1
                val[other ^ 1] = 2
                ov = other >> 1
                level[ov] = dl
                reason[ov] = cid
                trail[trail_len] = other
                trail_len += 1
                propagations += 1
                prev = cur
                cur = nxt
            if confl != -1:
                break

        if confl != -1:
            conflicts += 1
            until_restart -= 1
            if dl == 0:
                status = UNSAT_
                if emit_proof:
                    if proof_len + 2 > proof.size:
                        tmp = np.empty(proof.size * 2, dtype=np.int32)
                        tmp[:proof_len] = proof[:proof_len]
                        proof = tmp
                    proof[proof_len] = 0
                    proof[proof_len + 1] = 0
                    proof_len += 2
                break
            # ---------------- analyze (first UIP) ----------------
            nlearnt = 1
            path = 0
            p = np.int32(-1)
            idx = trail_len
            c = confl
            while True:
                if c >= n_original:
                    a = c_act[c] + cla_inc
                    c_act[c] = a
                    if a > 1e20:
                        for x in range(n_clauses):
                            c_act[x] *= 1e-20
                        cla_inc *= 1e-20
                b = c_start[c]
                for t in range(b, b + c_size[c]):
                    q = lits[t]
                    if q == p:
                        continue
                    v = q >> 1
                    if seen[v] == 0 and level[v] > 0:
                        seen[v] = 1
                        a = activity[v] + act_inc
                        activity[v] = a
                        if a > 1e100:
                            # uniform rescale preserves order, heap stays valid
                            for x in range(1, nvars + 1):
                                activity[x] *= 1e-100
                            act_inc *= 1e-100
                        if heap_pos[v] != -1:
                            _heap_up(heap, heap_pos, activity, heap_pos[v])
                        if level[v] >= dl:
                            path += 1
                        else:
                            learnt[nlearnt] = q
                            nlearnt += 1
                idx -= 1
                while seen[trail[idx] >> 1] == 0:
                    idx -= 1
                p = trail[idx]
                v = p >> 1
                c = reason[v]
                seen[v] = 0
                path -= 1
                if path == 0:
                    break
            learnt[0] = p ^ 1

            # local minimization
            nout = 1
            minim[0] = learnt[0]
            for t in range(1, nlearnt):
                q = learnt[t]
                r = reason[q >> 1]
                keep = True
                if r != -1:
                    keep = False
                    rb = c_start[r]
                    for u in range(rb, rb + c_size[r]):
                        xv = lits[u] >> 1
                        if xv != (q >> 1) and seen[xv] == 0 and level[xv] > 0:
                            keep = True
                            break
                if keep:
                    minim[nout] = q
                    nout += 1
            # lbd over kept literals + clear seen
            lbd = 0
            for t in range(nout):
                lv = level[minim[t] >> 1]
                if lbd_seen[lv] == 0:
                    lbd_seen[lv] = 1
                    lbd += 1
            for t in range(nout):
                lbd_seen[level[minim[t] >> 1]] = 0
            for t in range(nlearnt):
                seen[learnt[t] >> 1] = 0

            if emit_proof:
                if proof_len + 2 + nout > proof.size:
                    newcap = proof.size * 2
                    while newcap < proof_len + 2 + nout:
                        newcap *= 2
                    tmp = np.empty(newcap, dtype=np.int32)
                    tmp[:proof_len] = proof[:proof_len]
                    proof = tmp
                proof[proof_len] = 0
                proof[proof_len + 1] = nout
                proof_len += 2
                for t in range(nout):
                    el = minim[t]
                    proof[proof_len] = -(el >> 1) if (el & 1) else (el >> 1)
                    proof_len += 1
            learned_total += 1

            # backjump
            bt = 0
            if nout > 1:
                pos = 1
                for t in range(1, nout):
                    lv = level[minim[t] >> 1]
                    if lv > bt:
                        bt = lv
                        pos = t
                tmpl = minim[1]
                minim[1] = minim[pos]
                minim[pos] = tmpl
            if dl > bt:
                lim = trail_lim[bt]
                for tix in range(trail_len - 1, lim - 1, -1):
                    l = trail[tix]
                    v = l >> 1
                    val[l] = 0
                    val[l ^ 1] = 0
                    phase[v] = (l & 1) ^ 1
                    reason[v] = -1
                    if heap_pos[v] == -1:
                        heap[heap_size] = v
                        heap_pos[v] = heap_size
                        heap_size += 1
                        _heap_up(heap, heap_pos, activity, heap_size - 1)
                trail_len = lim
                qhead = lim
                dl = bt

            if nout == 1:
                u = minim[0]
                val[u] = 1
                val[u ^ 1] = 2
                level[u >> 1] = 0
                reason[u >> 1] = -1
                trail[trail_len] = u
                trail_len += 1
            else:
                # install learned clause
                if lits_used + nout > cap_lits:
                    cap_lits = max(cap_lits * 2, lits_used + nout)
                    tmp = np.empty(cap_lits, dtype=np.int32)
                    tmp[:lits_used] = lits[:lits_used]
                    lits = tmp
                if n_clauses >= cap_cl:
                    cap_cl *= 2
                    t1 = np.empty(cap_cl, dtype=np.int64)
                    t1[:n_clauses] = c_start[:n_clauses]
                    c_start = t1
                    t2 = np.empty(cap_cl, dtype=np.int32)
                    t2[:n_clauses] = c_size[:n_clauses]
                    c_size = t2
                    t3 = np.empty(cap_cl, dtype=np.int32)
                    t3[:n_clauses] = c_lbd[:n_clauses]
                    c_lbd = t3
                    t4 = np.empty(cap_cl, dtype=np.float64)
                    t4[:n_clauses] = c_act[:n_clauses]
                    c_act = t4
                cid = n_clauses
                n_clauses += 1
                c_start[cid] = lits_used
                c_size[cid] = nout
                c_lbd[cid] = lbd
                c_act[cid] = cla_inc
                for t in range(nout):
                    lits[lits_used + t] = minim[t]
                lits_used += nout
                for wslot in range(2):
                    wl = lits[c_start[cid] + wslot]
                    other = lits[c_start[cid] + (1 - wslot)]
                    if w_free != -1:
                        node = w_free
                        w_free = w_next[node]
                    else:
                        if w_used >= cap_w:
                            cap_w *= 2
                            t1 = np.empty(cap_w, dtype=np.int32)
                            t1[:w_used] = w_cid[:w_used]
                            w_cid = t1
                            t2 = np.empty(cap_w, dtype=np.int32)
                            t2[:w_used] = w_blk[:w_used]
                            w_blk = t2
                            t3 = np.empty(cap_w, dtype=np.int64)
                            t3[:w_used] = w_next[:w_used]
                            w_next = t3
                        node = w_used
                        w_used += 1
                    w_cid[node] = cid
                    w_blk[node] = other
                    w_next[node] = watch_head[wl]
                    watch_head[wl] = node
                u = minim[0]
                val[u] = 1
                val[u ^ 1] = 2
                level[u >> 1] = dl
                reason[u >> 1] = cid
                trail[trail_len] = u
                trail_len += 1

            act_inc /= var_decay
            cla_inc /= clause_decay

            if max_conflicts > 0 and conflicts >= max_conflicts:
                status = UNKNOWN_
                break
            if max_seconds > 0.0 and conflicts % 4096 == 0:
                t_now = 0.0
                with objmode(t_now="float64"):
                    t_now = time.perf_counter()
                if t_now - t_start > max_seconds:
                    status = UNKNOWN_
                    break
            continue

        # ---------------- no conflict ----------------
        if until_restart <= 0:
            restarts += 1
            restart_idx += 1
            until_restart = _luby(restart_idx) * restart_base
            if dl > 0:
                lim = trail_lim[0]
                for tix in range(trail_len - 1, lim - 1, -1):
                    l = trail[tix]
                    v = l >> 1
                    val[l] = 0
                    val[l ^ 1] = 0
                    phase[v] = (l & 1) ^ 1
                    reason[v] = -1
                    if heap_pos[v] == -1:
                        heap[heap_size] = v
                        heap_pos[v] = heap_size
                        heap_size += 1
                        _heap_up(heap, heap_pos, activity, heap_size - 1)
                trail_len = lim
                qhead = lim
                dl = 0
            continue

        # ---------------- reduce learned database ----------------
        if n_clauses - n_original > learnt_limit:
            nlearned = n_clauses - n_original
            keyarr = np.empty(nlearned, dtype=np.float64)
            for i in range(nlearned):
                cid = n_original + i
                keyarr[i] = c_lbd[cid] * 1e21 + (1e20 - c_act[cid])
            order = np.argsort(keyarr)
            drop = np.zeros(nlearned, dtype=np.uint8)
            ndrop = 0
            want = nlearned // 2
            for oi in range(nlearned - 1, -1, -1):  # worst first
                if ndrop >= want:
                    break
                i = order[oi]
                cid = n_original + i
                if c_lbd[cid] <= 2 or c_size[cid] <= 2:
                    continue
                locked = False
                first = lits[c_start[cid]]
                if reason[first >> 1] == cid and val[first] == 1:
                    locked = True
                if not locked:
                    drop[i] = 1
                    ndrop += 1
            if ndrop > 0:
                if emit_proof:
                    for i in range(nlearned):
                        if drop[i] == 0:
                            continue
                        cid = n_original + i
                        sz = c_size[cid]
                        if proof_len + 2 + sz > proof.size:
                            newcap = proof.size * 2
                            while newcap < proof_len + 2 + sz:
                                newcap *= 2
                            tmp = np.empty(newcap, dtype=np.int32)
                            tmp[:proof_len] = proof[:proof_len]
                            proof = tmp
                        proof[proof_len] = 1
                        proof[proof_len + 1] = sz
                        proof_len += 2
                        b = c_start[cid]
                        for t in range(b, b + sz):
                            el = lits[t]
                            proof[proof_len] = -(el >> 1) if (el & 1) else (el >> 1)
                            proof_len += 1
                # compact arenas and rebuild watches
                remap = np.full(n_clauses, -1, dtype=np.int64)
                new_used = np.int64(0)
                new_n = 0
                for cid in range(n_clauses):
                    if cid >= n_original and drop[cid - n_original] == 1:
                        continue
                    b = c_start[cid]
                    sz = c_size[cid]
                    c_start[new_n] = new_used
                    c_size[new_n] = sz
                    c_lbd[new_n] = c_lbd[cid]
                    c_act[new_n] = c_act[cid]
                    for t in range(sz):
                        lits[new_used + t] = lits[b + t]
                    new_used += sz
                    remap[cid] = new_n
                    new_n += 1
                n_clauses = new_n
                lits_used = new_used
                for v in range(1, nvars + 1):
                    if reason[v] != -1:
                        reason[v] = remap[reason[v]]
                for li in range(2 * n):
                    watch_head[li] = -1
                w_used = 0
                w_free = -1
                for cid in range(n_clauses):
                    b = c_start[cid]
                    for wslot in range(2):
                        wl = lits[b + wslot]
                        other = lits[b + (1 - wslot)]
                        node = w_used
                        w_used += 1
                        w_cid[node] = cid
                        w_blk[node] = other
                        w_next[node] = watch_head[wl]
                        watch_head[wl] = node
            learnt_limit = int(learnt_limit * 1.2)
            continue

        # ---------------- decide ----------------
        v = 0
        rng = _rand_next(rng)
        if (rng >> np.uint64(40)) < np.uint64(random_freq * 16777216.0):
            for _ in range(8):
                rng = _rand_next(rng)
                cand = 1 + int(rng % np.uint64(nvars))
                if val[2 * cand] == 0:
                    v = cand
                    break
        while v == 0 and heap_size > 0:
            cand = heap[0]
            heap_pos[cand] = -1
            heap_size -= 1
            if heap_size > 0:
                heap[0] = heap[heap_size]
                heap_pos[heap[0]] = 0
                _heap_down(heap, heap_pos, activity, heap_size, 0)
            if val[2 * cand] == 0:
                v = cand
        if v == 0:
            done = True
            for cand in range(1, nvars + 1):
                if val[2 * cand] == 0:
                    v = cand
                    done = False
                    break
            if done:
                status = SAT_
                break
        dl += 1
        trail_lim[dl - 1] = trail_len
        u = 2 * v + (1 - phase[v])
        val[u] = 1
        val[u ^ 1] = 2
        level[v] = dl
        reason[v] = -1
        trail[trail_len] = u
        trail_len += 1
        decisions += 1

    return (
        status,
        proof[:proof_len],
        val,
        conflicts,
        decisions,
        propagations,
        restarts,
        learned_total,
    )


def run_fast(
    clauses_enc: list[list[int]],
    units_enc: list[int],
    nvars: int,
    cfg,
) -> tuple:
    """Python-side marshalling around the compiled search."""
    flat: list[int] = []
    offsets = [0]
    for c in clauses_enc:
        flat.extend(c)
        offsets.append(len(flat))
    in_lits = np.array(flat, dtype=np.int32)
    in_offsets = np.array(offsets, dtype=np.int64)
    unit_arr = np.array(units_enc, dtype=np.int32)
    return _run(
        in_lits,
        in_offsets,
        unit_arr,
        nvars,
        cfg.seed & 0x3FFFFFFFFFFFFFF,
        cfg.var_decay,
        cfg.clause_decay,
        cfg.random_decision_freq,
        cfg.restart_base,
        cfg.max_conflicts if cfg.max_conflicts is not None else 0,
        cfg.max_seconds if cfg.max_seconds is not None else 0.0,
        cfg.emit_proof,
    )

"""Batch replication kernels for the society process.

One njit function per information model, each running a contiguous block of
replications and writing per-replication checkpoint rows into caller-owned
arrays. All belief/index arithmetic is delegated to the scalar functions in
``_scalar``, which the pure-Python reference path also calls, so a kernel
trajectory and a ``run_replication`` trajectory are bitwise identical.

Explored items live in a binary max-heap ordered by (index desc, id asc);
the fresh reservoir is a sentinel index compared with >= so that equal-index
ties open explored items first, smaller id first. The revealed-value heaps
use lazy deletion: an entry is live only while its key still equals the
item's current index (or posterior mean, for the quality-tracking heap).
"""
from __future__ import annotations

import numpy as np
from numba import njit

from ._scalar import (
    TAG_DIAMOND,
    TAG_QUALITY,
    TAG_ROUND_BASE,
    diamond_theta_s,
    key_normal,
    key_uniform,
    posterior_mean_var_s,
    resv_mix_s,
    value_index_offset_s,
)

OK = 0
ERR_STEP_CAP = 1


@njit(cache=True, inline="always")
def _higher(k1, i1, k2, i2):
    # priority: larger key first, then smaller item id
    return k1 > k2 or (k1 == k2 and i1 < i2)


@njit(cache=True)
def _heap_push(keys, ids, n, key, iid):
    keys[n] = key
    ids[n] = iid
    i = n
    while i > 0:
        par = (i - 1) >> 1
        if _higher(keys[i], ids[i], keys[par], ids[par]):
            keys[i], keys[par] = keys[par], keys[i]
            ids[i], ids[par] = ids[par], ids[i]
            i = par
        else:
            break
    return n + 1


@njit(cache=True)
def _heap_pop(keys, ids, n):
    key = keys[0]
    iid = ids[0]
    n -= 1
    keys[0] = keys[n]
    ids[0] = ids[n]
    i = 0
    while True:
        left = 2 * i + 1
        if left >= n:
            break
        best = left
        right = left + 1
        if right < n and _higher(keys[right], ids[right], keys[left], ids[left]):
            best = right
        if _higher(keys[best], ids[best], keys[i], ids[i]):
            keys[i], keys[best] = keys[best], keys[i]
            ids[i], ids[best] = ids[best], ids[i]
            i = best
        else:
            break
    return key, iid, n


@njit(cache=True)
def _grow_f8(arr):
    out = np.empty(arr.shape[0] * 2, np.float64)
    out[: arr.shape[0]] = arr
    return out


@njit(cache=True)
def _grow_i8(arr):
    out = np.empty(arr.shape[0] * 2, np.int64)
    out[: arr.shape[0]] = arr
    return out


@njit(cache=True)
def fill_value_offsets(T, sigma, cost):
    """g[k] = index minus posterior mean for a k-times-explored item; g[0] unused."""
    g = np.empty(T + 1, np.float64)
    g[0] = np.nan
    for k in range(1, T + 1):
        g[k] = value_index_offset_s(np.float64(k), sigma, cost)
    return g


@njit(cache=True, nogil=True)
def quality_batch(
    seed,
    rep_lo,
    rep_hi,
    sigma,
    sq1ms2,
    cost,
    p,
    jump,
    T,
    fresh_index,
    explored_offset,
    step_cap,
    t_grid,
    probe_rounds,
    out_uout,
    out_umust,
    out_m,
    out_items,
    out_probe,
):
    """Revealed-quality model, optional diamond materialization (p > 0).

    Explored item index = q + explored_offset, where the offset collapses
    every revealed-quality belief: sigma*x~(c/sigma) for sigma > 0, -c at
    sigma = 0. Each explored item keeps exactly one heap entry.
    """
    n_grid = t_grid.shape[0]
    n_probe = probe_rounds.shape[0]
    for rep in range(rep_lo, rep_hi):
        row = rep - rep_lo
        q = np.empty(1024, np.float64)
        hkeys = np.empty(1024, np.float64)
        hids = np.empty(1024, np.int64)
        heap_n = 0
        n_items = 0
        pop_keys = np.empty(256, np.float64)
        pop_ids = np.empty(256, np.int64)
        new_ids = np.empty(256, np.int64)
        max_q = -np.inf
        usum_out = 0.0
        usum_must = 0.0
        gi = 0
        pi = 0
        for t in range(1, T + 1):
            tag = TAG_ROUND_BASE + t - 1
            y = -np.inf
            opens = 0
            n_pop = 0
            n_new = 0
            while True:
                use_exp = heap_n > 0 and hkeys[0] >= fresh_index
                nxt = hkeys[0] if use_exp else fresh_index
                if y >= nxt:
                    break
                if opens >= step_cap:
                    return ERR_STEP_CAP
                if use_exp:
                    key, iid, heap_n = _heap_pop(hkeys, hids, heap_n)
                    if n_pop >= pop_keys.shape[0]:
                        pop_keys = _grow_f8(pop_keys)
                        pop_ids = _grow_i8(pop_ids)
                    pop_keys[n_pop] = key
                    pop_ids[n_pop] = iid
                    n_pop += 1
                    v = q[iid] + sigma * key_normal(seed, rep, iid, tag)
                else:
                    iid = n_items
                    d = 0.0
                    if p > 0.0 and key_uniform(seed, rep, iid, TAG_DIAMOND) < p:
                        d = jump
                    qq = d + sq1ms2 * key_normal(seed, rep, iid, TAG_QUALITY)
                    v = qq + sigma * key_normal(seed, rep, iid, tag)
                    if n_items >= q.shape[0]:
                        q = _grow_f8(q)
                        hkeys = _grow_f8(hkeys)
                        hids = _grow_i8(hids)
                    q[n_items] = qq
                    if n_new >= new_ids.shape[0]:
                        new_ids = _grow_i8(new_ids)
                    new_ids[n_new] = iid
                    n_new += 1
                    n_items += 1
                opens += 1
                if v > y:
                    y = v
            uo = (y if y > 0.0 else 0.0) - cost * opens
            um = y - cost * opens
            usum_out += uo
            usum_must += um
            for j in range(n_pop):
                heap_n = _heap_push(hkeys, hids, heap_n, pop_keys[j], pop_ids[j])
            for j in range(n_new):
                iid = new_ids[j]
                qq = q[iid]
                if qq > max_q:
                    max_q = qq
                heap_n = _heap_push(hkeys, hids, heap_n, qq + explored_offset, iid)
            if pi < n_probe and probe_rounds[pi] == t:
                out_probe[row, pi] = uo
                pi += 1
            if gi < n_grid and t_grid[gi] == t:
                out_uout[row, gi] = usum_out / t
                out_umust[row, gi] = usum_must / t
                out_m[row, gi] = max_q if max_q > 0.0 else 0.0
                out_items[row, gi] = n_items
                gi += 1
    return OK


@njit(cache=True, nogil=True)
def value_batch(
    seed,
    rep_lo,
    rep_hi,
    sigma,
    sq1ms2,
    cost,
    p,
    jump,
    T,
    fresh_index,
    g_table,
    step_cap,
    t_grid,
    probe_rounds,
    out_uout,
    out_umust,
    out_m,
    out_items,
    out_probe,
):
    """Revealed-value model with the Gaussian quality prior.

    Covers any sigma in [0, 1]; with p > 0 it also covers the sigma = 0
    diamond case (values reveal q exactly, so no theta machinery is needed).
    Item index = posterior mean + g_table[k]; both heaps use lazy deletion
    keyed on the item's current index / posterior mean.
    """
    s2 = sigma * sigma
    n_grid = t_grid.shape[0]
    n_probe = probe_rounds.shape[0]
    for rep in range(rep_lo, rep_hi):
        row = rep - rep_lo
        cap = 1024
        qtrue = np.empty(cap, np.float64)
        kcnt = np.zeros(cap, np.int64)
        vsum = np.empty(cap, np.float64)
        m_cur = np.empty(cap, np.float64)
        idx_cur = np.empty(cap, np.float64)
        opened_at = np.zeros(cap, np.int64)  # last round this item was opened
        hkeys = np.empty(cap, np.float64)
        hids = np.empty(cap, np.int64)
        heap_n = 0
        mkeys = np.empty(cap, np.float64)
        mids = np.empty(cap, np.int64)
        mheap_n = 0
        n_items = 0
        op_ids = np.empty(256, np.int64)
        op_vals = np.empty(256, np.float64)
        usum_out = 0.0
        usum_must = 0.0
        gi = 0
        pi = 0
        for t in range(1, T + 1):
            tag = TAG_ROUND_BASE + t - 1
            y = -np.inf
            opens = 0
            n_op = 0
            while True:
                # purge stale or already-opened entries off the top
                while heap_n > 0 and (
                    hkeys[0] != idx_cur[hids[0]] or opened_at[hids[0]] == t
                ):
                    _, _, heap_n = _heap_pop(hkeys, hids, heap_n)
                use_exp = heap_n > 0 and hkeys[0] >= fresh_index
                nxt = hkeys[0] if use_exp else fresh_index
                if y >= nxt:
                    break
                if opens >= step_cap:
                    return ERR_STEP_CAP
                if use_exp:
                    _, iid, heap_n = _heap_pop(hkeys, hids, heap_n)
                    v = qtrue[iid] + sigma * key_normal(seed, rep, iid, tag)
                else:
                    iid = n_items
                    d = 0.0
                    if p > 0.0 and key_uniform(seed, rep, iid, TAG_DIAMOND) < p:
                        d = jump
                    qq = d + sq1ms2 * key_normal(seed, rep, iid, TAG_QUALITY)
                    v = qq + sigma * key_normal(seed, rep, iid, tag)
                    if n_items >= cap:
                        cap *= 2
                        qtrue = _grow_f8(qtrue)
                        kcnt = _grow_i8(kcnt)
                        vsum = _grow_f8(vsum)
                        m_cur = _grow_f8(m_cur)
                        idx_cur = _grow_f8(idx_cur)
                        opened_at = _grow_i8(opened_at)
                    qtrue[iid] = qq
                    kcnt[iid] = 0
                    vsum[iid] = 0.0
                    n_items += 1
                opened_at[iid] = t
                if n_op >= op_ids.shape[0]:
                    op_ids = _grow_i8(op_ids)
                    op_vals = _grow_f8(op_vals)
                op_ids[n_op] = iid
                op_vals[n_op] = v
                n_op += 1
                opens += 1
                if v > y:
                    y = v
            uo = (y if y > 0.0 else 0.0) - cost * opens
            um = y - cost * opens
            usum_out += uo
            usum_must += um
            # public stats update once the agent is done, in open order
            for j in range(n_op):
                iid = op_ids[j]
                kcnt[iid] += 1
                vsum[iid] += op_vals[j]
                m, _ = posterior_mean_var_s(np.float64(kcnt[iid]), vsum[iid], sigma)
                idx = m + g_table[kcnt[iid]]
                m_cur[iid] = m
                idx_cur[iid] = idx
                if heap_n + 1 >= hkeys.shape[0]:
                    hkeys = _grow_f8(hkeys)
                    hids = _grow_i8(hids)
                heap_n = _heap_push(hkeys, hids, heap_n, idx, iid)
                if mheap_n + 1 >= mkeys.shape[0]:
                    mkeys = _grow_f8(mkeys)
                    mids = _grow_i8(mids)
                mheap_n = _heap_push(mkeys, mids, mheap_n, m, iid)
            if pi < n_probe and probe_rounds[pi] == t:
                out_probe[row, pi] = uo
                pi += 1
            if gi < n_grid and t_grid[gi] == t:
                while mheap_n > 0 and mkeys[0] != m_cur[mids[0]]:
                    _, _, mheap_n = _heap_pop(mkeys, mids, mheap_n)
                top_m = mkeys[0] if mheap_n > 0 else 0.0
                out_uout[row, gi] = usum_out / t
                out_umust[row, gi] = usum_must / t
                out_m[row, gi] = top_m if top_m > 0.0 else 0.0
                out_items[row, gi] = n_items
                gi += 1
    return OK


@njit(cache=True, nogil=True)
def diamond_value_batch(
    seed,
    rep_lo,
    rep_hi,
    p,
    jump,
    cost,
    T,
    fresh_index,
    step_cap,
    t_grid,
    probe_rounds,
    out_uout,
    out_umust,
    out_m,
    out_items,
    out_probe,
    out_disc_round,
    out_disc_k,
    out_disc_vsum,
):
    """Revealed-value diamond model at sigma = 1.

    Quality collapses to the jump indicator, so the public posterior is the
    single weight theta and the item index solves the two-component mixture
    call. Items with theta < p sit strictly below the fresh index forever
    (index is increasing in theta), so they skip the index heap and the
    mixture solve entirely; they still carry their posterior mean theta*jump
    for the max-quality statistic.

    Also reports, per replication, the first round in which a true-jump item
    was opened and that item's final (count, value sum).
    """
    sigma = 1.0
    n_grid = t_grid.shape[0]
    n_probe = probe_rounds.shape[0]
    for rep in range(rep_lo, rep_hi):
        row = rep - rep_lo
        cap = 1024
        dtrue = np.empty(cap, np.float64)
        kcnt = np.zeros(cap, np.int64)
        vsum = np.empty(cap, np.float64)
        m_cur = np.empty(cap, np.float64)
        idx_cur = np.empty(cap, np.float64)
        opened_at = np.zeros(cap, np.int64)
        hkeys = np.empty(cap, np.float64)
        hids = np.empty(cap, np.int64)
        heap_n = 0
        mkeys = np.empty(cap, np.float64)
        mids = np.empty(cap, np.int64)
        mheap_n = 0
        n_items = 0
        op_ids = np.empty(256, np.int64)
        op_vals = np.empty(256, np.float64)
        usum_out = 0.0
        usum_must = 0.0
        disc_round = 0
        disc_id = -1
        gi = 0
        pi = 0
        for t in range(1, T + 1):
            tag = TAG_ROUND_BASE + t - 1
            y = -np.inf
            opens = 0
            n_op = 0
            while True:
                while heap_n > 0 and (
                    hkeys[0] != idx_cur[hids[0]] or opened_at[hids[0]] == t
                ):
                    _, _, heap_n = _heap_pop(hkeys, hids, heap_n)
                use_exp = heap_n > 0 and hkeys[0] >= fresh_index
                nxt = hkeys[0] if use_exp else fresh_index
                if y >= nxt:
                    break
                if opens >= step_cap:
                    return ERR_STEP_CAP
                if use_exp:
                    _, iid, heap_n = _heap_pop(hkeys, hids, heap_n)
                else:
                    iid = n_items
                    d = 0.0
                    if key_uniform(seed, rep, iid, TAG_DIAMOND) < p:
                        d = jump
                    if n_items >= cap:
                        cap *= 2
                        dtrue = _grow_f8(dtrue)
                        kcnt = _grow_i8(kcnt)
                        vsum = _grow_f8(vsum)
                        m_cur = _grow_f8(m_cur)
                        idx_cur = _grow_f8(idx_cur)
                        opened_at = _grow_i8(opened_at)
                    dtrue[iid] = d
                    kcnt[iid] = 0
                    vsum[iid] = 0.0
                    n_items += 1
                v = dtrue[iid] + sigma * key_normal(seed, rep, iid, tag)
                if dtrue[iid] > 0.0 and disc_round == 0:
                    disc_round = t
                    disc_id = iid
                opened_at[iid] = t
                if n_op >= op_ids.shape[0]:
                    op_ids = _grow_i8(op_ids)
                    op_vals = _grow_f8(op_vals)
                op_ids[n_op] = iid
                op_vals[n_op] = v
                n_op += 1
                opens += 1
                if v > y:
                    y = v
            uo = (y if y > 0.0 else 0.0) - cost * opens
            um = y - cost * opens
            usum_out += uo
            usum_must += um
            for j in range(n_op):
                iid = op_ids[j]
                kcnt[iid] += 1
                vsum[iid] += op_vals[j]
                theta = diamond_theta_s(np.float64(kcnt[iid]), vsum[iid], p, jump)
                m = theta * jump
                m_cur[iid] = m
                if theta < p:
                    idx_cur[iid] = -np.inf  # strictly below fresh; never re-opened
                else:
                    idx = resv_mix_s(theta, jump, 0.0, 1.0, cost)
                    idx_cur[iid] = idx
                    if heap_n + 1 >= hkeys.shape[0]:
                        hkeys = _grow_f8(hkeys)
                        hids = _grow_i8(hids)
                    heap_n = _heap_push(hkeys, hids, heap_n, idx, iid)
                if mheap_n + 1 >= mkeys.shape[0]:
                    mkeys = _grow_f8(mkeys)
                    mids = _grow_i8(mids)
                mheap_n = _heap_push(mkeys, mids, mheap_n, m, iid)
            if pi < n_probe and probe_rounds[pi] == t:
                out_probe[row, pi] = uo
                pi += 1
            if gi < n_grid and t_grid[gi] == t:
                while mheap_n > 0 and mkeys[0] != m_cur[mids[0]]:
                    _, _, mheap_n = _heap_pop(mkeys, mids, mheap_n)
                top_m = mkeys[0] if mheap_n > 0 else 0.0
                out_uout[row, gi] = usum_out / t
                out_umust[row, gi] = usum_must / t
                out_m[row, gi] = top_m if top_m > 0.0 else 0.0
                out_items[row, gi] = n_items
                gi += 1
        out_disc_round[row] = disc_round
        if disc_id >= 0:
            out_disc_k[row] = kcnt[disc_id]
            out_disc_vsum[row] = vsum[disc_id]
        else:
            out_disc_k[row] = 0
            out_disc_vsum[row] = 0.0
    return OK


@njit(cache=True, nogil=True)
def coupled_scan(seed, rep, sigma, sq1ms2, T, threshold, scan_cap, out_iprime):
    """Threshold-rule exploration frontier coupled to the true process.

    Each round the alternative agent walks items in materialization order;
    at every item whose quality clears the threshold the coin is the event
    s_{i,t} >= -1, read from the same keyed draw the true process would use,
    which is exactly the coupling. out_iprime[t-1] = I'(t), the running max
    of the per-round stop position.
    """
    q = np.empty(1024, np.float64)
    n_q = 0
    iprime = 0
    for t in range(1, T + 1):
        tag = TAG_ROUND_BASE + t - 1
        pos = 0
        stopped = False
        while pos < scan_cap:
            if pos >= n_q:
                if n_q >= q.shape[0]:
                    q = _grow_f8(q)
                q[n_q] = sq1ms2 * key_normal(seed, rep, n_q, TAG_QUALITY)
                n_q += 1
            if q[pos] >= threshold:
                s = sigma * key_normal(seed, rep, pos, tag)
                if s >= -1.0:
                    stopped = True
            pos += 1
            if stopped:
                break
        if pos > iprime:
            iprime = pos
        out_iprime[t - 1] = iprime
    return OK

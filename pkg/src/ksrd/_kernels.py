"""Compiled batch verification kernels.

Mirrors ``defense._evaluate`` attack-for-attack (same search order, same
per-attack splitmix64 roulette stream) so that batch counts agree with the
pure-Python reference exactly.

Attack outcome codes: TRIVIAL/DET_OK/ROU_OK are defended, NONE/DET_FAIL/
ROU_FAIL are not.
"""

from __future__ import annotations

import numpy as np
from numba import njit

# Kernels that allocate nothing are compiled without the runtime's reference
# counting (``_nrt=False``); on the per-attack path it costs more than the work.

TRIVIAL, NONE, DET_OK, DET_FAIL, ROU_OK, ROU_FAIL = 0, 1, 2, 3, 4, 5

# when a coverage entry must be revisited: any change of the node, a raise,
# or a raise that turns the node into a lender (label <= 1 to >= 2)
ON_ANY, ON_RAISE, ON_PROMOTE = 2, 1, 0

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
C1 = np.uint64(0xBF58476D1CE4E5B9)
C2 = np.uint64(0x94D049BB133111EB)
S30 = np.uint64(30)
S27 = np.uint64(27)
S31 = np.uint64(31)
S32 = np.uint64(32)


@njit(cache=True, _nrt=False)
def mix64(z):
    z = (z ^ (z >> S30)) * C1
    z = (z ^ (z >> S27)) * C2
    return z ^ (z >> S31)


@njit(cache=True, _nrt=False)
def attack_seed(seed, epoch, idx):
    z = np.uint64(seed) * GOLDEN + np.uint64(epoch) * C1 + np.uint64(idx) * C2
    return mix64(z)


@njit(cache=True, _nrt=False)
def _defended(code):
    return code == TRIVIAL or code == DET_OK or code == ROU_OK


@njit(cache=True, _nrt=False)
def _dfs(labels, nred, alt_ptr, alt_buf, picked, used, choice):
    depth = 0
    choice[0] = 0
    while True:
        if depth == nred:
            for i in range(nred):
                picked[i] = alt_buf[alt_ptr[i] + choice[i]]
            for i in range(nred):
                used[picked[i]] -= 1
            return True
        lo = alt_ptr[depth]
        hi = alt_ptr[depth + 1]
        placed = False
        while lo + choice[depth] < hi:
            u = alt_buf[lo + choice[depth]]
            if labels[u] - 1 - used[u] >= 1:
                used[u] += 1
                placed = True
                break
            choice[depth] += 1
        if placed:
            depth += 1
            if depth < nred:
                choice[depth] = 0
            continue
        depth -= 1
        if depth < 0:
            return False
        u = alt_buf[alt_ptr[depth] + choice[depth]]
        used[u] -= 1
        choice[depth] += 1


@njit(cache=True, _nrt=False)
def _hall(labels, nred, alt_ptr, alt_buf, used):
    """Whether an assignment exists, by Hall's condition: every set of
    attacked 0-nodes needs at least that many spare armies among its
    alternatives. Singletons always pass. ``used`` is scratch, left zeroed."""
    for mask in range(3, 1 << nred):
        cnt = 0
        for i in range(nred):
            cnt += (mask >> i) & 1
        if cnt < 2:
            continue
        spare = 0
        for rep in range(2):
            for i in range(nred):
                if (mask >> i) & 1:
                    for p in range(alt_ptr[i], alt_ptr[i + 1]):
                        u = alt_buf[p]
                        if rep == 0 and used[u] == 0:
                            used[u] = 1
                            spare += labels[u] - 1
                        elif rep == 1:
                            used[u] = 0
        if spare < cnt:
            return False
    return True


@njit(cache=True, _nrt=False)
def _roulette(labels, indptr, indices, red, nred, tries, state, picked, committed):
    for _ in range(tries):
        ok = True
        npk = 0
        for t in range(nred):
            v = red[t]
            total = 0
            for p in range(indptr[v], indptr[v + 1]):
                u = indices[p]
                d = labels[u] - 1 - committed[u]
                if d > 0:
                    total += d
            if total == 0:
                ok = False
                break
            state = state + GOLDEN
            z = mix64(state)
            r = np.int64(((z >> S32) * np.uint64(total)) >> S32)
            chosen = -1
            for p in range(indptr[v], indptr[v + 1]):
                u = indices[p]
                d = labels[u] - 1 - committed[u]
                if d > 0:
                    if r < d:
                        chosen = u
                        break
                    r -= d
            committed[chosen] += 1
            picked[npk] = chosen
            npk += 1
        for t in range(npk):
            committed[picked[t]] -= 1
        if ok:
            return True
    return False


@njit(cache=True, _nrt=False)
def lender_csr(labels, indptr, indices, lptr, lidx):
    """Fill ``lptr``/``lidx`` with each node's neighbors of label >= 2, in
    adjacency order. Evaluations only ever read these neighbors, so passing
    this in place of the full adjacency gives identical results faster."""
    n = labels.shape[0]
    q = 0
    lptr[0] = 0
    for v in range(n):
        for p in range(indptr[v], indptr[v + 1]):
            u = indices[p]
            if labels[u] >= 2:
                lidx[q] = u
                q += 1
        lptr[v + 1] = q


@njit(cache=True, _nrt=False)
def eval_attack(labels, indptr, indices, attacks, idx, cutoff, tries, seed, epoch,
                red, alt_ptr, alt_buf, picked, used, committed, choice, need_picks=True):
    """Returns (code, number of attacked 0-nodes).

    ``indptr``/``indices`` may be the full adjacency or the lender
    adjacency from :func:`lender_csr`. Without ``need_picks`` a small
    exhaustive case is settled by :func:`_hall` (same verdict as the search)
    and ``picked`` is left undefined.
    """
    k = attacks.shape[1]
    nred = 0
    nalt = 0
    product = 1
    alt_ptr[0] = 0
    for t in range(k):
        v = attacks[idx, t]
        if labels[v] > 0:
            continue
        start = nalt
        for p in range(indptr[v], indptr[v + 1]):
            u = indices[p]
            if labels[u] >= 2:
                alt_buf[nalt] = u
                nalt += 1
        if nalt == start:
            return NONE, nred
        red[nred] = v
        nred += 1
        alt_ptr[nred] = nalt
        product = min(product * (nalt - start), cutoff)
    if nred == 0:
        return TRIVIAL, 0
    if product < cutoff:
        if nred <= 4:
            if not _hall(labels, nred, alt_ptr, alt_buf, used):
                return DET_FAIL, nred
            if not need_picks:
                return DET_OK, nred
        if _dfs(labels, nred, alt_ptr, alt_buf, picked, used, choice):
            return DET_OK, nred
        return DET_FAIL, nred
    state = attack_seed(seed, epoch, idx)
    if _roulette(labels, indptr, indices, red, nred, tries, state, picked, committed):
        return ROU_OK, nred
    return ROU_FAIL, nred


@njit(cache=True)
def _grow(a, extra):
    b = np.empty(max(a.shape[0] * 2, a.shape[0] + extra), a.dtype)
    b[: a.shape[0]] = a
    return b


@njit(cache=True)
def _to_csr(nodes, atts, cnt, n):
    ptr = np.zeros(n + 1, np.int64)
    for t in range(cnt):
        ptr[nodes[t] + 1] += 1
    for x in range(n):
        ptr[x + 1] += ptr[x]
    out = np.empty(cnt, np.int64)
    fill = ptr[:-1].copy()
    for t in range(cnt):
        x = nodes[t]
        out[fill[x]] = atts[t]
        fill[x] += 1
    return ptr, out


@njit(cache=True)
def _to_csr_by_need(nodes, atts, need, cnt, n):
    """CSR with each node's segment ordered by ``need`` descending.

    ``need`` values are small non-negative ints, so a counting sort over
    (node, need) buckets does it in one scatter pass.
    """
    top = 0
    for t in range(cnt):
        if need[t] > top:
            top = need[t]
    w = top + 1
    bucket = np.zeros(n * w + 1, np.int64)
    for t in range(cnt):
        bucket[nodes[t] * w + (top - need[t]) + 1] += 1
    for b in range(n * w):
        bucket[b + 1] += bucket[b]
    ptr = np.empty(n + 1, np.int64)
    for x in range(n + 1):
        ptr[x] = bucket[x * w]
    out = np.empty(cnt, np.int64)
    out_need = np.empty(cnt, np.int64)
    for t in range(cnt):
        b = nodes[t] * w + (top - need[t])
        out[bucket[b]] = atts[t]
        out_need[bucket[b]] = need[t]
        bucket[b] += 1
    return ptr, out, out_need


@njit(cache=True, _nrt=False)
def _raise_sensitive(labels, indptr, indices, red, nred, alt_ptr, cutoff, bits, mark, stamp, touch):
    """Nodes whose promotion to lender (label <= 1 to >= 2) would push the
    assignment count of this exhaustively decided attack to ``cutoff``.

    Promoting ``x`` adds one alternative to every attacked 0-node next to
    it and, if ``x`` is itself one of them, drops its factor. Products
    saturate at ``cutoff``. Only one promotion at a time is covered.
    """
    top = 1
    for i in range(nred):
        top = min(top * (alt_ptr[i + 1] - alt_ptr[i] + 1), cutoff)
    if top < cutoff:
        return 0
    nt = 0
    for i in range(nred):
        v = red[i]
        if mark[v] != stamp:
            mark[v] = stamp
            bits[v] = 0
            touch[nt] = v
            nt += 1
        for p in range(indptr[v], indptr[v + 1]):
            x = indices[p]
            if labels[x] <= 1:
                if mark[x] != stamp:
                    mark[x] = stamp
                    bits[x] = 0
                    touch[nt] = x
                    nt += 1
                bits[x] |= np.int64(1) << i
    nreg = 0
    for t in range(nt):
        x = touch[t]
        p = 1
        for i in range(nred):
            if red[i] == x:
                continue
            p = min(p * ((alt_ptr[i + 1] - alt_ptr[i]) + ((bits[x] >> i) & 1)), cutoff)
        if p >= cutoff:
            touch[nreg] = x
            nreg += 1
    return nreg


@njit(cache=True, _nrt=False)
def _verify_span(labels, indptr, indices, lptr, lidx, attacks, cutoff, tries, seed, epoch,
                 want_cov, stop_after, st, failed, red, alt_ptr, alt_buf, picked, used, committed,
                 choice, bits, mark, touch, lend, d_node, d_att, d_need, s_node, s_att, s_kind,
                 f_node, f_att, f_kind):
    """Evaluate attacks from ``st[0]`` on, recording coverage, until all are
    done or an entry buffer might overflow. ``st`` holds (next attack,
    failures, defender entries, sensitive entries, failed-touch entries,
    stamp) and is updated in place. Returns True when finished."""
    m = attacks.shape[0]
    k = attacks.shape[1]
    per = touch.shape[0] + k
    idx, nf, nd, ns, nft, stamp = st[0], st[1], st[2], st[3], st[4], st[5]
    done = False
    while True:
        if idx == m:
            done = True
            break
        if want_cov and (nd + per > d_node.shape[0] or ns + per > s_node.shape[0]
                         or nft + per > f_node.shape[0]):
            break
        code, nred = eval_attack(labels, lptr, lidx, attacks, idx, cutoff, tries, seed, epoch,
                                 red, alt_ptr, alt_buf, picked, used, committed, choice, want_cov)
        ok = _defended(code)
        if not ok:
            failed[nf] = idx
            nf += 1
            if stop_after > 0 and nf >= stop_after:
                done = True
                break
        if not want_cov:
            idx += 1
            continue
        if code == NONE:
            # only the first 0-node without alternatives and its neighbors matter
            zeros = 0
            v = -1
            for t in range(k):
                if labels[attacks[idx, t]] == 0:
                    if zeros == nred:
                        v = attacks[idx, t]
                        break
                    zeros += 1
            for q in range(-1, indptr[v + 1] - indptr[v]):
                x = v if q < 0 else indices[indptr[v] + q]
                f_node[nft] = x
                f_att[nft] = idx
                f_kind[nft] = ON_RAISE
                nft += 1
            idx += 1
            continue
        stamp += 1
        if code == DET_FAIL or code == ROU_FAIL or code == ROU_OK:
            kind = ON_RAISE if code == DET_FAIL else ON_ANY
            # every node whose label the evaluation reads
            for t in range(k):
                v = attacks[idx, t]
                for q in range(-1, indptr[v + 1] - indptr[v]):
                    x = v if q < 0 else indices[indptr[v] + q]
                    if q >= 0 and labels[v] != 0:
                        break
                    if mark[x] == stamp:
                        continue
                    mark[x] = stamp
                    if ok:
                        s_node[ns] = x
                        s_att[ns] = idx
                        s_kind[ns] = kind
                        ns += 1
                    else:
                        f_node[nft] = x
                        f_att[nft] = idx
                        f_kind[nft] = kind
                        nft += 1
            if not ok:
                idx += 1
                continue
            stamp += 1
        # lenders and self-defenders, with the label each one must keep
        for t in range(nred):
            lend[picked[t]] += 1
        for t in range(k + nred):
            x = attacks[idx, t] if t < k else picked[t - k]
            if t < k and labels[x] == 0:
                continue
            if mark[x] == stamp:
                continue
            mark[x] = stamp
            d_node[nd] = x
            d_att[nd] = idx
            d_need[nd] = lend[x] + 1
            nd += 1
        for t in range(nred):
            lend[picked[t]] = 0
        if code == DET_OK:
            stamp += 1
            nreg = _raise_sensitive(labels, indptr, indices, red, nred, alt_ptr, cutoff,
                                    bits, mark, stamp, touch)
            for t in range(nreg):
                s_node[ns] = touch[t]
                s_att[ns] = idx
                s_kind[ns] = ON_PROMOTE
                ns += 1
        idx += 1
    st[0], st[1], st[2], st[3], st[4], st[5] = idx, nf, nd, ns, nft, stamp
    return done


@njit(cache=True)
def full_verify(labels, indptr, indices, attacks, cutoff, tries, seed, epoch, want_cov, stop_after):
    n = labels.shape[0]
    m = attacks.shape[0]
    k = attacks.shape[1]
    maxdeg = 0
    for v in range(n):
        d = indptr[v + 1] - indptr[v]
        if d > maxdeg:
            maxdeg = d
    red, alt_ptr, alt_buf, picked, used, committed, choice = make_buffers(n, k, maxdeg)
    bits = np.zeros(n, np.int64)
    mark = np.zeros(n, np.int64)
    lend = np.zeros(n, np.int64)
    touch = np.empty(k * (maxdeg + 1) + 1, np.int64)
    failed = np.empty(m, np.int64)
    per = touch.shape[0] + k
    cap0 = 16 if not want_cov else max(per, 4 * m)
    d_node, d_att, d_need = np.empty(cap0, np.int64), np.empty(cap0, np.int64), np.empty(cap0, np.int64)
    s_node, s_att, s_kind = np.empty(cap0, np.int64), np.empty(cap0, np.int64), np.empty(cap0, np.int64)
    f_node, f_att, f_kind = np.empty(cap0, np.int64), np.empty(cap0, np.int64), np.empty(cap0, np.int64)
    lptr = np.empty(n + 1, np.int64)
    lidx = np.empty(indices.shape[0], np.int64)
    lender_csr(labels, indptr, indices, lptr, lidx)
    st = np.zeros(6, np.int64)
    while not _verify_span(labels, indptr, indices, lptr, lidx, attacks, cutoff, tries, seed, epoch,
                           want_cov, stop_after, st, failed, red, alt_ptr, alt_buf, picked, used,
                           committed, choice, bits, mark, touch, lend, d_node, d_att, d_need,
                           s_node, s_att, s_kind, f_node, f_att, f_kind):
        nd, ns, nft = st[2], st[3], st[4]
        if nd + per > d_node.shape[0]:
            d_node, d_att, d_need = _grow(d_node, per), _grow(d_att, per), _grow(d_need, per)
        if ns + per > s_node.shape[0]:
            s_node, s_att, s_kind = _grow(s_node, per), _grow(s_att, per), _grow(s_kind, per)
        if nft + per > f_node.shape[0]:
            f_node, f_att, f_kind = _grow(f_node, per), _grow(f_att, per), _grow(f_kind, per)
    nf, nd, ns, nft = st[1], st[2], st[3], st[4]
    dp, di, dn = _to_csr_by_need(d_node, d_att, d_need, nd, n)
    sp, si, sk = _to_csr_by_need(s_node, s_att, s_kind, ns, n)
    fp, fi, fk = _to_csr_by_need(f_node, f_att, f_kind, nft, n)
    return nf, failed[:nf].copy(), dp, di, dn, sp, si, sk, fp, fi, fk


@njit(cache=True, _nrt=False)
def _in_attack(attacks, idx, x):
    for t in range(attacks.shape[1]):
        if attacks[idx, t] == x:
            return True
    return False


@njit(cache=True, _nrt=False)
def recheck(labels, lptr, lidx, attacks, dp, di, dn, sp, si, sk, fp, fi, fk, nfailed,
            ch_nodes, ch_old, cutoff, tries, seed, epoch, limit, amark, astamp,
            red, alt_ptr, alt_buf, picked, used, committed, choice):
    """Failure count after changing ``ch_nodes`` (old labels ``ch_old``).

    ``lptr``/``lidx`` is the lender adjacency of the current ``labels``.

    ``amark``/``astamp`` dedupe attack indices; the caller passes a fresh
    stamp per call. ``limit < 0`` disables early exit. Entries are visited
    only when the direction of the change can affect them (see
    ``CoverageInfo``); each segment is ordered so the skippable tail can be
    cut off with ``break``.
    """
    count = nfailed
    for c in range(ch_nodes.shape[0]):
        x = ch_nodes[c]
        old = ch_old[c]
        new = labels[x]
        for p in range(fp[x], fp[x + 1]):
            if fk[p] == ON_RAISE and new < old:
                break
            idx = fi[p]
            if amark[idx] == astamp:
                continue
            if fk[p] == ON_RAISE and old == 0 and new == 1 and not _in_attack(attacks, idx, x):
                continue
            amark[idx] = astamp
            code, _ = eval_attack(labels, lptr, lidx, attacks, idx, cutoff, tries, seed, epoch,
                                  red, alt_ptr, alt_buf, picked, used, committed, choice, False)
            if _defended(code):
                count -= 1
    if limit >= 0 and count >= limit:
        return count
    for c in range(ch_nodes.shape[0]):
        x = ch_nodes[c]
        old = ch_old[c]
        new = labels[x]
        promoted = old <= 1 and new >= 2
        for rep in range(2):
            if rep == 0:
                lo, hi, src = sp[x], sp[x + 1], si
            else:
                if new >= old:
                    break
                lo, hi, src = dp[x], dp[x + 1], di
            for p in range(lo, hi):
                if rep == 0 and sk[p] == ON_PROMOTE and not promoted:
                    break
                if rep == 1 and dn[p] <= new:
                    break
                idx = src[p]
                if amark[idx] == astamp:
                    continue
                amark[idx] = astamp
                code, _ = eval_attack(labels, lptr, lidx, attacks, idx, cutoff, tries, seed, epoch,
                                      red, alt_ptr, alt_buf, picked, used, committed, choice, False)
                if not _defended(code):
                    count += 1
                    if limit >= 0 and count >= limit:
                        return count
    return count


@njit(cache=True)
def make_buffers(n, k, maxdeg):
    return (np.empty(k, np.int64), np.empty(k + 1, np.int64), np.empty(k * maxdeg + 1, np.int64),
            np.empty(k, np.int64), np.zeros(n, np.int64), np.zeros(n, np.int64), np.zeros(k, np.int64))


@njit(cache=True)
def scan_pairs(labels, pi, pj, start, max_evals, cap, hot, base,
               indptr, indices, attacks, dp, di, dn, sp, si, sk, fp, fi, fk, nfailed,
               cutoff, tries, seed, epoch, amark, astamp):
    """Scan shuffled pairs from ``start`` for the first improving split.

    Returns (found, position, evaluations, last stamp, count). On success
    ``labels`` holds the improved labeling and ``count`` its exact
    non-defended count; otherwise ``count`` is ``base``.
    """
    n = labels.shape[0]
    k = attacks.shape[1]
    maxdeg = 0
    for v in range(n):
        d = indptr[v + 1] - indptr[v]
        if d > maxdeg:
            maxdeg = d
    red, alt_ptr, alt_buf, picked, used, committed, choice = make_buffers(n, k, maxdeg)
    ch_nodes = np.empty(2, np.int64)
    ch_old = np.empty(2, np.int64)
    lptr = np.empty(n + 1, np.int64)
    lidx = np.empty(indices.shape[0], np.int64)
    lender_csr(labels, indptr, indices, lptr, lidx)
    evals = 0
    npairs = pi.shape[0]
    pos = start
    while pos < npairs:
        i = pi[pos]
        j = pj[pos]
        if hot[i] or hot[j]:
            a = labels[i]
            b = labels[j]
            total = a + b
            lo = total - cap
            if lo < 0:
                lo = 0
            hi = total if total < cap else cap
            for x in range(lo, hi + 1):
                if x == a:
                    continue
                y = total - x
                labels[i] = x
                labels[j] = y
                nch = 0
                if x != a:
                    ch_nodes[nch] = i
                    ch_old[nch] = a
                    nch += 1
                if y != b:
                    ch_nodes[nch] = j
                    ch_old[nch] = b
                    nch += 1
                relend = (a >= 2) != (x >= 2) or (b >= 2) != (y >= 2)
                if relend:
                    lender_csr(labels, indptr, indices, lptr, lidx)
                astamp += 1
                evals += 1
                c = recheck(labels, lptr, lidx, attacks, dp, di, dn, sp, si, sk, fp, fi, fk, nfailed,
                            ch_nodes[:nch], ch_old[:nch], cutoff, tries, seed, epoch, base, amark, astamp,
                            red, alt_ptr, alt_buf, picked, used, committed, choice)
                if c < base:
                    return True, pos, evals, astamp, c
                labels[i] = a
                labels[j] = b
                if relend:
                    lender_csr(labels, indptr, indices, lptr, lidx)
        pos += 1
        if evals >= max_evals:
            break
    return False, pos, evals, astamp, base

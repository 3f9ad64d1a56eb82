"""Hot loops: trie build, codeword emission, decoding, access, extraction.

Everything here works on ``int64`` word arrays (word values stay below
``2**63`` since ``w <= 60``) and reports failures through negative status
codes; the Python wrappers turn those into exceptions.
"""

import numpy as np

from ._jit import jit
from .codec import _find_position
from .spanner import jump_target, spanner_move

BASELINE = 0
DETERMINISTIC = 1
RANDOMIZED = 2

OK = 0
ERR_MALFORMED = -1
ERR_TRUNCATED = -2
ERR_CAPACITY = -3
ERR_WIDTH = -4
ERR_RANGE = -5

# compressor state slots
S_CUR = 0      # trie node reached by the current descent
S_DEPTH = 1    # its depth
S_SCNT = 2     # special nodes on the descent (randomized only)
S_M = 3        # phrases emitted
S_WORDS = 4    # words emitted
S_POS = 5      # symbols consumed
S_M1 = 6       # simple / deterministic / LZ78 codewords
S_M2 = 7       # special codewords
S_M3 = 8       # position codewords
N_STATE = 9

# access trace slots
T_READ = 0     # codewords read (binary search probes, scans, depth probes)
T_PARENT = 1   # parent-link hops
T_SPAN = 2     # special-parent / ancestor / long-jump hops
N_TRACE = 3

MEMO_SIZE = 1 << 12


# ---------------------------------------------------------------- trie table

@jit
def _mix(key, mask):
    # no int64 overflow, so the pure-Python path hashes identically
    return ((key & 0xFFFFFFFF) * 40503 + (key >> 32)) & mask


@jit
def _ht_slot(keys, key):
    mask = keys.shape[0] - 1
    h = _mix(key, mask)
    while True:
        k = keys[h]
        if k == key or k == -1:
            return h
        h = (h + 1) & mask


# ---------------------------------------------------------------- compression

@jit
def _emit_phrase(scheme, c, start, next_start, st, node_link, node_special, path,
                 coins, out, o, s, L, B, limit, ds, dp):
    cur = st[S_CUR]
    depth = st[S_DEPTH] + 1
    m = st[S_M] + 1
    st[S_M] = m
    o0 = o
    if scheme == BASELINE:
        v = (cur << s) | c
        if v >= limit:
            return ERR_WIDTH
        out[o] = v
        o += 1
        st[S_M1] += 1
    elif scheme == DETERMINISTIC:
        anc = path[jump_target(depth, L)]
        v = ((cur + 1) << s) | c
        if start >= limit or v >= limit or anc + 1 >= limit:
            return ERR_WIDTH
        out[o] = start
        out[o + 1] = v
        out[o + 2] = anc + 1
        o += 3
        st[S_M1] += 1
    else:
        words0 = st[S_WORDS]
        node_link[m] = words0 + 1
        pw = (node_link[cur] << s) | c
        if pw >= limit:
            return ERR_WIDTH
        special = coins[m]
        node_special[m] = special
        if special:
            scnt = st[S_SCNT]
            q = 0
            a = 0
            if scnt > 0:
                q = path[scnt - 1]
                a = path[jump_target(scnt, L)]
            if depth >= limit:
                return ERR_WIDTH
            out[o] = ds
            out[o + 1] = depth
            out[o + 2] = pw
            out[o + 3] = node_link[q]
            out[o + 4] = node_link[a]
            o += 5
            st[S_M2] += 1
        else:
            out[o] = pw
            o += 1
            st[S_M1] += 1
        after = words0 + (o - o0)
        if words0 // B < after // B:
            if next_start >= limit:
                return ERR_WIDTH
            out[o] = dp
            out[o + 1] = next_start
            o += 2
            st[S_M3] += 1
    st[S_WORDS] += o - o0
    return o


@jit
def compress_chunk(scheme, x, st, keys, vals, node_link, node_special, path, coins,
                   out, s, L, B, limit, ds, dp, n_max):
    """Feed symbols ``x``; return the number of words written to ``out``."""
    o = 0
    for g in range(x.shape[0]):
        if st[S_POS] >= n_max:
            return ERR_CAPACITY
        c = np.int64(x[g])
        cur = st[S_CUR]
        key = (cur << s) | c
        h = _ht_slot(keys, key)
        st[S_POS] += 1
        if keys[h] == key:
            child = vals[h]
            nd = st[S_DEPTH] + 1
            st[S_CUR] = child
            st[S_DEPTH] = nd
            if scheme == DETERMINISTIC:
                path[nd] = child
            elif scheme == RANDOMIZED and node_special[child]:
                path[st[S_SCNT]] = child
                st[S_SCNT] += 1
            continue
        pos = st[S_POS]
        o = _emit_phrase(scheme, c, pos - st[S_DEPTH], pos + 1, st, node_link,
                         node_special, path, coins, out, o, s, L, B, limit, ds, dp)
        if o < 0:
            return o
        keys[h] = key
        vals[h] = st[S_M]
        st[S_CUR] = 0
        st[S_DEPTH] = 0
        st[S_SCNT] = 0
    return o


@jit
def compress_finish(scheme, st, node_link, node_special, path, coins, out,
                    s, L, B, limit, ds, dp):
    """Emit the final phrase if the input ended inside an existing phrase."""
    if st[S_DEPTH] == 0:
        return 0
    pos = st[S_POS]
    # the padded phrase ends one past the input, so the next one would start at n + 2
    o = _emit_phrase(scheme, 0, pos - st[S_DEPTH] + 1, pos + 2, st, node_link,
                     node_special, path, coins, out, 0, s, L, B, limit, ds, dp)
    st[S_CUR] = 0
    st[S_DEPTH] = 0
    st[S_SCNT] = 0
    return o


# ---------------------------------------------------------------- decoding

@jit
def _resolve(off2idx, link, off):
    if link == 0:
        return 0
    o = link - 1
    if o >= off:
        return -1
    return off2idx[o]


@jit
def decode_phrases(words, scheme, s, L, ds, dp):
    """Sequential parse into parallel phrase arrays (index 0 is the root).

    Returns ``(parent, symbol, depth, offset, sp, sa, m, status)``.  ``sp``
    and ``sa`` hold the special-parent / special-ancestor phrase indices of
    special phrases and -1 elsewhere.
    """
    nd = words.shape[0]
    cap = nd + 1
    parent = np.zeros(cap, np.int64)
    sym = np.zeros(cap, np.uint8)
    depth = np.zeros(cap, np.int64)
    offset = np.full(cap, -1, np.int64)
    sp = np.full(cap, -1, np.int64)
    sa = np.full(cap, -1, np.int64)
    off2idx = np.full(nd + 1, -1, np.int64)
    smask = (1 << s) - 1
    m = 0
    off = 0
    pos = 1
    status = OK
    while off < nd:
        w0 = words[off]
        clen = 1
        if scheme == DETERMINISTIC:
            if off + 3 > nd:
                status = ERR_TRUNCATED
                break
            if w0 != pos:
                status = ERR_MALFORMED
                break
            pw = words[off + 1]
            par = (pw >> s) - 1
            anc = words[off + 2] - 1
            if par < 0 or par > m or anc < 0 or anc > m:
                status = ERR_MALFORMED
                break
            if depth[anc] != jump_target(depth[par] + 1, L):
                status = ERR_MALFORMED
                break
            sp[m + 1] = anc
            clen = 3
        elif scheme == BASELINE:
            pw = w0
            par = pw >> s
            if par > m or w0 >= dp:
                status = ERR_MALFORMED
                break
        else:
            if w0 == dp:
                if off + 2 > nd:
                    status = ERR_TRUNCATED
                    break
                if words[off + 1] != pos:
                    status = ERR_MALFORMED
                    break
                off += 2
                continue
            if w0 == ds:
                if off + 5 > nd:
                    status = ERR_TRUNCATED
                    break
                pw = words[off + 2]
                par = _resolve(off2idx, pw >> s, off)
                q = _resolve(off2idx, words[off + 3], off)
                a = _resolve(off2idx, words[off + 4], off)
                if par < 0 or q < 0 or a < 0:
                    status = ERR_MALFORMED
                    break
                if (q > 0 and sp[q] < 0) or (a > 0 and sp[a] < 0):
                    status = ERR_MALFORMED  # link to a non-special phrase
                    break
                if words[off + 1] != depth[par] + 1:
                    status = ERR_MALFORMED
                    break
                sp[m + 1] = q
                sa[m + 1] = a
                clen = 5
            else:
                pw = w0
                par = _resolve(off2idx, pw >> s, off)
                if par < 0:
                    status = ERR_MALFORMED
                    break
            off2idx[off] = m + 1
        m += 1
        parent[m] = par
        sym[m] = pw & smask
        depth[m] = depth[par] + 1
        offset[m] = off
        pos += depth[m]
        off += clen
    return parent, sym, depth, offset, sp, sa, m, status


@jit
def expand(parent, sym, depth, m):
    total = 0
    for j in range(1, m + 1):
        total += depth[j]
    out = np.empty(total, np.uint8)
    start = np.zeros(m + 1, np.int64)
    p = 0
    for j in range(1, m + 1):
        start[j] = p
        par = parent[j]
        k = depth[par]
        src = start[par]
        for i in range(k):
            out[p + i] = out[src + i]
        out[p + k] = sym[j]
        p += depth[j]
    return out


def expand_numpy(parent, sym, depth, m):
    """Vectorized expansion by pointer doubling over copy sources."""
    if m == 0:
        return np.zeros(0, np.uint8)
    lengths = depth[1:m + 1]
    starts = np.zeros(m + 1, np.int64)
    starts[1:] = np.cumsum(lengths) - lengths
    pid = np.repeat(np.arange(1, m + 1), lengths)
    k = np.arange(pid.size) - starts[pid]
    literal = k == lengths[pid - 1] - 1
    ptr = np.where(literal, -1, starts[parent[pid]] + k)
    val = np.where(literal, sym[pid], 0).astype(np.uint8)
    live = ptr >= 0
    while live.any():
        idx = np.flatnonzero(live)
        tgt = ptr[idx]
        val[idx] = val[tgt]
        ptr[idx] = ptr[tgt]
        live = ptr >= 0
    return val


# ---------------------------------------------------------------- deterministic access

@jit
def _det_locate(words, m, ell, s, tr):
    lo = 1
    hi = m
    while lo < hi:
        mid = (lo + hi + 1) // 2
        tr[T_READ] += 1
        if words[3 * (mid - 1)] <= ell:
            lo = mid
        else:
            hi = mid - 1
    t = lo
    tr[T_READ] += 1
    pt = words[3 * (t - 1)]
    if t < m:
        d = words[3 * t] - pt
    else:
        # last phrase may be cut short; its depth is its parent's plus one
        par = (words[3 * (t - 1) + 1] >> s) - 1
        if par <= 0:
            d = 1
        else:
            tr[T_READ] += 1
            d = words[3 * par] - words[3 * (par - 1)] + 1
    return t, pt, d


@jit
def _det_walk(words, t, d, r, s, L, tr):
    cur = t
    u = d
    aligned = False
    while True:
        if u % L == L - 1:
            aligned = True
        mv = spanner_move(u, r, L, aligned)
        if mv == 0:
            return cur
        if mv == 2:
            nxt = words[3 * (cur - 1) + 2] - 1
            u = jump_target(u, L)
            tr[T_SPAN] += 1
        else:
            nxt = (words[3 * (cur - 1) + 1] >> s) - 1
            u -= 1
            tr[T_PARENT] += 1
        if nxt <= 0 or nxt >= cur:
            return ERR_MALFORMED
        cur = nxt


@jit
def det_access_batch(words, ells, s, L, out, traces):
    m = words.shape[0] // 3
    smask = (1 << s) - 1
    for q in range(ells.shape[0]):
        tr = traces[q]
        t, pt, d = _det_locate(words, m, ells[q], s, tr)
        r = ells[q] - pt + 1
        if r < 1 or r > d:
            return ERR_MALFORMED
        node = _det_walk(words, t, d, r, s, L, tr)
        if node < 0:
            return node
        out[q] = words[3 * (node - 1) + 1] & smask
    return OK


@jit
def det_extract(words, l1, l2, s, L, out, tr):
    m = words.shape[0] // 3
    smask = (1 << s) - 1
    t, pt, d = _det_locate(words, m, l2, s, tr)
    r = l2 - pt + 1
    if r < 1 or r > d:
        return ERR_MALFORMED
    cur = _det_walk(words, t, d, r, s, L, tr)
    if cur < 0:
        return cur
    j = t
    i = l2 - l1
    out[i] = words[3 * (cur - 1) + 1] & smask
    while i > 0:
        i -= 1
        par = (words[3 * (cur - 1) + 1] >> s) - 1
        if par < 0 or par >= cur:
            return ERR_MALFORMED
        if par == 0:
            j -= 1
            if j < 1:
                return ERR_MALFORMED
            cur = j
            tr[T_READ] += 1
        else:
            cur = par
            tr[T_PARENT] += 1
        out[i] = words[3 * (cur - 1) + 1] & smask
    return OK


def det_access_numpy(words, ells, s, L):
    """Vectorized deterministic access over a batch of positions."""
    m = words.size // 3
    p = words[0::3][:m]
    pw = words[1::3][:m]
    anc = words[2::3][:m] - 1
    par = (pw >> s) - 1
    t = np.searchsorted(p, ells, side="right")  # 1-based phrase index
    nxt = np.append(p[1:], 0)
    d = nxt[t - 1] - p[t - 1]
    last = t == m
    if last.any():
        lp = par[m - 1]
        d_last = 1 if lp <= 0 else int(p[lp] - p[lp - 1] + 1)
        d = np.where(last, d_last, d)
    r = ells - p[t - 1] + 1
    cur = t.astype(np.int64)
    u = d.astype(np.int64)
    aligned = np.zeros(cur.size, bool)
    while True:
        aligned |= (u % L) == L - 1
        active = u != r
        if not active.any():
            break
        jt = np.maximum(u - (np.left_shift(1, u % L)) * L, 0)
        jump = active & aligned & (jt >= r)
        step = active & ~jump
        cur = np.where(jump, anc[cur - 1], np.where(step, par[cur - 1], cur))
        u = np.where(jump, jt, np.where(step, u - 1, u))
    return (pw[cur - 1] & ((1 << s) - 1)).astype(np.uint8)


# ---------------------------------------------------------------- randomized access

@jit
def _memo_get(mk, mv, key):
    mask = mk.shape[0] - 1
    h = _mix(key, mask)
    while True:
        k = mk[h]
        if k == key:
            return mv[h]
        if k == -1:
            return -1
        h = (h + 1) & mask


@jit
def _memo_put(mk, mv, used, mstate, key, val):
    if mstate[0] >= mk.shape[0] // 2:
        return
    mask = mk.shape[0] - 1
    h = _mix(key, mask)
    while mk[h] != -1 and mk[h] != key:
        h = (h + 1) & mask
    if mk[h] == -1:
        used[mstate[0]] = h
        mstate[0] += 1
    mk[h] = key
    mv[h] = val


@jit
def _memo_reset(mk, used, mstate):
    for i in range(mstate[0]):
        mk[used[i]] = -1
    mstate[0] = 0


@jit
def new_memo():
    mk = np.full(MEMO_SIZE, -1, np.int64)
    mv = np.zeros(MEMO_SIZE, np.int64)
    used = np.zeros(MEMO_SIZE, np.int64)
    mstate = np.zeros(1, np.int64)
    buf = np.zeros(MEMO_SIZE // 2, np.int64)
    return mk, mv, used, mstate, buf


@jit
def _rsym(words, off, ds, smask):
    if words[off] == ds:
        return words[off + 2] & smask
    return words[off] & smask


@jit
def _rparent(words, off, s, ds):
    w = words[off]
    if w == ds:
        w = words[off + 2]
    return (w >> s) - 1


@jit
def find_depth(words, off, s, ds, dp, tr, mk, mv, used, mstate, buf):
    if words[off] == ds:
        return words[off + 1]
    cnt = 0
    nb = 0
    cur = off
    base = 0
    while cur >= 0:
        got = _memo_get(mk, mv, cur)
        if got >= 0:
            base = got
            break
        w = words[cur]
        if w == ds:
            base = words[cur + 1]
            break
        if w == dp:
            return ERR_MALFORMED
        if nb < buf.shape[0]:
            buf[nb] = cur
            nb += 1
        nxt = (w >> s) - 1
        if nxt >= cur:
            return ERR_MALFORMED
        cur = nxt
        cnt += 1
        tr[T_PARENT] += 1
    d = base + cnt
    for i in range(nb):
        _memo_put(mk, mv, used, mstate, buf[i], d - i)
    return d


@jit
def _special_depth_at(words, link_off, ds, tr):
    # tree depth of a special node given by offset; root (-1) has depth 0
    if link_off < 0:
        return 0
    tr[T_READ] += 1
    return words[link_off + 1]


@jit
def find_node_by_depth(words, off, depth, d, s, L, ds, tr):
    """Offset of the ancestor at tree depth ``d`` of the node at ``off``.

    ``depth`` is the node's own depth.  Returns a negative status on a
    structural inconsistency.
    """
    cur = off
    cdepth = depth
    # 1: parent links up to the closest special node
    while cdepth > d and words[cur] != ds:
        nxt = _rparent(words, cur, s, ds)
        if nxt < 0 or nxt >= cur:
            return ERR_MALFORMED
        cur = nxt
        cdepth -= 1
        tr[T_PARENT] += 1
    if cdepth == d:
        return cur
    if words[cur + 1] != cdepth:
        return ERR_MALFORMED
    # 2: climb special parents up to the end of a spanner block, detected
    # where the special-ancestor target jumps back towards the root
    ta_u = _special_depth_at(words, words[cur + 4] - 1, ds, tr)
    climbs = 0
    while climbs < L:
        v = words[cur + 3] - 1
        if v < 0:
            break
        if v >= cur or words[v] != ds:
            return ERR_MALFORMED
        tr[T_READ] += 1
        vdepth = words[v + 1]
        if vdepth < d:
            break
        ta_v = _special_depth_at(words, words[v + 4] - 1, ds, tr)
        cur = v
        cdepth = vdepth
        climbs += 1
        tr[T_SPAN] += 1
        if ta_v < ta_u:
            break
        ta_u = ta_v
    # 3: spanner descent over special nodes, never passing depth d
    while True:
        a = words[cur + 4] - 1
        if a >= 0:
            if a >= cur or words[a] != ds:
                return ERR_MALFORMED
            if words[a + 1] >= d:
                cur = a
                tr[T_SPAN] += 1
                continue
            tr[T_READ] += 1
        q = words[cur + 3] - 1
        if q >= 0:
            if q >= cur or words[q] != ds:
                return ERR_MALFORMED
            if words[q + 1] >= d:
                cur = q
                tr[T_SPAN] += 1
                continue
            tr[T_READ] += 1
        break
    # 4: plain parent links for the remainder
    cdepth = words[cur + 1]
    while cdepth > d:
        nxt = _rparent(words, cur, s, ds)
        if nxt < 0 or nxt >= cur:
            return ERR_MALFORMED
        cur = nxt
        cdepth -= 1
        tr[T_PARENT] += 1
    return cur


@jit
def _rand_locate(words, ell, s, B, ds, dp, tr, mk, mv, used, mstate, buf, res):
    """Find the phrase containing ``ell``; fills ``res = (offset, start, depth)``."""
    nd = words.shape[0]
    lo = 0
    hi = (nd + B - 1) // B
    a_off = 0
    a_pos = 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        tr[T_READ] += 1
        po = _find_position(words, nd, mid * B, dp)
        if po >= 0 and po + 1 < nd and words[po + 1] <= ell:
            lo = mid
            a_off = po + 2
            a_pos = words[po + 1]
        else:
            hi = mid
    off = a_off
    p = a_pos
    while True:
        if off >= nd:
            return ERR_RANGE
        w0 = words[off]
        if w0 == dp:
            if off + 1 >= nd or words[off + 1] != p:
                return ERR_MALFORMED
            off += 2
            continue
        tr[T_READ] += 1
        if w0 == ds:
            d = words[off + 1]
            clen = 5
        else:
            d = find_depth(words, off, s, ds, dp, tr, mk, mv, used, mstate, buf)
            if d < 0:
                return d
            clen = 1
        if p + d > ell:
            res[0] = off
            res[1] = p
            res[2] = d
            return OK
        p += d
        off += clen


@jit
def rand_access_batch(words, ells, s, L, B, ds, dp, out, traces):
    smask = (1 << s) - 1
    mk, mv, used, mstate, buf = new_memo()
    res = np.zeros(3, np.int64)
    for q in range(ells.shape[0]):
        _memo_reset(mk, used, mstate)
        tr = traces[q]
        st = _rand_locate(words, ells[q], s, B, ds, dp, tr, mk, mv, used, mstate, buf, res)
        if st < 0:
            return st
        node = find_node_by_depth(words, res[0], res[2], ells[q] - res[1] + 1, s, L, ds, tr)
        if node < 0:
            return node
        out[q] = _rsym(words, node, ds, smask)
    return OK


@jit
def _prev_codeword(words, o, ds, dp, tr):
    while o > 0:
        if o >= 5 and words[o - 5] == ds:
            return o - 5
        if o >= 2 and words[o - 2] == dp:
            tr[T_READ] += 1
            o -= 2
            continue
        return o - 1
    return -1


@jit
def rand_extract(words, l1, l2, s, L, B, ds, dp, out, tr):
    smask = (1 << s) - 1
    mk, mv, used, mstate, buf = new_memo()
    res = np.zeros(3, np.int64)
    st = _rand_locate(words, l2, s, B, ds, dp, tr, mk, mv, used, mstate, buf, res)
    if st < 0:
        return st
    cur = find_node_by_depth(words, res[0], res[2], l2 - res[1] + 1, s, L, ds, tr)
    if cur < 0:
        return cur
    j = res[0]
    i = l2 - l1
    out[i] = _rsym(words, cur, ds, smask)
    while i > 0:
        i -= 1
        par = _rparent(words, cur, s, ds)
        if par >= cur:
            return ERR_MALFORMED
        if par < 0:
            j = _prev_codeword(words, j, ds, dp, tr)
            if j < 0:
                return ERR_MALFORMED
            cur = j
            tr[T_READ] += 1
        else:
            cur = par
            tr[T_PARENT] += 1
        out[i] = _rsym(words, cur, ds, smask)
    return OK


@jit
def rand_find_depth(words, off, s, ds, dp, tr):
    mk, mv, used, mstate, buf = new_memo()
    return find_depth(words, off, s, ds, dp, tr, mk, mv, used, mstate, buf)


# ---------------------------------------------------------------- plain LZ78

@jit
def lz78_sequential_access(words, ell, s, tr):
    """Symbol at ``ell`` by expanding phrase lengths from the stream start.

    Plain LZ78 keeps no positions, so the phrase containing ``ell`` is only
    found by walking every earlier codeword.
    """
    nd = words.shape[0]
    depth = np.zeros(nd + 1, np.int64)
    p = 1
    for j in range(1, nd + 1):
        tr[T_READ] += 1
        par = words[j - 1] >> s
        if par >= j:
            return ERR_MALFORMED
        depth[j] = depth[par] + 1
        if p + depth[j] > ell:
            cur = j
            for _ in range(p + depth[j] - 1 - ell):
                cur = words[cur - 1] >> s
                tr[T_PARENT] += 1
            return words[cur - 1] & ((1 << s) - 1)
        p += depth[j]
    return ERR_RANGE

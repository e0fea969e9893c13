"""Compiled inner loops over packed coverage bitmaps.

Bit ``r`` of a bitmap lives in ``bits[r >> 3]`` at position ``r & 7`` and
flags the t-subset of colex rank ``r``. Blocks passed in are sorted int64
arrays. ``table`` is the int64 binomial table from
:func:`coverings.combinatorics.binomial_table`.

All kernels release the GIL so independent trials can share a thread pool.
"""

import numba as nb
import numpy as np

_JIT = dict(nogil=True, cache=True)


@nb.njit(**_JIT)
def _rank_of(block, idx, t, table):
    r = 0
    for i in range(t):
        r += table[block[idx[i]], i + 1]
    return r


@nb.njit(**_JIT)
def _next_combination(idx, t, n):
    # advance idx (t increasing positions in range(n)) lexicographically
    i = t - 1
    while i >= 0 and idx[i] == n - t + i:
        i -= 1
    if i < 0:
        return False
    idx[i] += 1
    for j in range(i + 1, t):
        idx[j] = idx[j - 1] + 1
    return True


@nb.njit(**_JIT)
def test_bit(bits, r):
    return (bits[r >> 3] >> (r & 7)) & 1


@nb.njit(**_JIT)
def block_is_clean(bits, block, t, table):
    n = block.shape[0]
    idx = np.arange(t)
    while True:
        if test_bit(bits, _rank_of(block, idx, t, table)):
            return False
        if not _next_combination(idx, t, n):
            return True


@nb.njit(**_JIT)
def mark_block(bits, block, t, table):
    """Set every t-subset of ``block``; return how many bits went 0 -> 1."""
    n = block.shape[0]
    idx = np.arange(t)
    fresh = 0
    while True:
        r = _rank_of(block, idx, t, table)
        byte = r >> 3
        mask = np.uint8(1 << (r & 7))
        if not bits[byte] & mask:
            bits[byte] |= mask
            fresh += 1
        if not _next_combination(idx, t, n):
            return fresh


@nb.njit(**_JIT)
def mark_blocks(bits, blocks, t, table):
    fresh = 0
    for b in range(blocks.shape[0]):
        fresh += mark_block(bits, blocks[b], t, table)
    return fresh


@nb.njit(**_JIT)
def pack_draws(bits, covered, total, raw, v, t, table, accepted, n_accepted, trajectory, traj_offset):
    """Greedy packing over a chunk of random draws.

    Row ``i`` of ``raw`` holds the Floyd variates for draw ``i``: column ``j``
    is uniform on ``[0, v - k + j]``. Accepted blocks are appended to
    ``accepted`` starting at row ``n_accepted``. If ``trajectory`` is
    non-empty the covered count after draw ``i`` goes to
    ``trajectory[traj_offset + i]``.

    Returns ``(draws consumed, covered, n_accepted)``; stops early once all
    ``total`` t-subsets are covered.
    """
    m, k = raw.shape
    block = np.empty(k, dtype=np.int64)
    record = trajectory.shape[0] > 0
    for i in range(m):
        if covered == total:
            return i, covered, n_accepted
        # Floyd: distinct draws, then insertion sort
        for j in range(k):
            x = raw[i, j]
            top = v - k + j
            for q in range(j):
                if block[q] == x:
                    x = top
                    break
            block[j] = x
        for j in range(1, k):
            x = block[j]
            q = j - 1
            while q >= 0 and block[q] > x:
                block[q + 1] = block[q]
                q -= 1
            block[q + 1] = x
        if block_is_clean(bits, block, t, table):
            covered += mark_block(bits, block, t, table)
            accepted[n_accepted, :] = block
            n_accepted += 1
        if record:
            trajectory[traj_offset + i] = covered
    return m, covered, n_accepted


@nb.njit(**_JIT)
def clean_ksets(bits, v, k, t, table, out):
    """Enumerate every k-subset of range(v) none of whose t-subsets is set.

    Depth-first with pruning: a prefix is extended only while all of its
    t-subsets are clear. Writes up to ``out.shape[0]`` rows and returns the
    total count, so the caller can retry with a larger buffer.
    """
    cap = out.shape[0]
    count = 0
    a = np.empty(k, dtype=np.int64)
    sub = np.empty(t, dtype=np.int64)
    idx = np.empty(t, dtype=np.int64)
    depth = 0
    a[0] = 0
    while depth >= 0:
        if a[depth] > v - k + depth:
            depth -= 1
            if depth >= 0:
                a[depth] += 1
            continue
        ok = True
        if depth >= t - 1:
            # t-subsets using a[depth] plus t-1 earlier entries
            for i in range(t - 1):
                idx[i] = i
            while True:
                for i in range(t - 1):
                    sub[i] = a[idx[i]]
                sub[t - 1] = a[depth]
                r = 0
                for i in range(t):
                    r += table[sub[i], i + 1]
                if test_bit(bits, r):
                    ok = False
                    break
                if t - 1 == 0 or not _next_combination(idx, t - 1, depth):
                    break
        if not ok:
            a[depth] += 1
            continue
        if depth == k - 1:
            if count < cap:
                out[count, :] = a
            count += 1
            a[depth] += 1
        else:
            depth += 1
            a[depth] = a[depth - 1] + 1
    return count


@nb.njit(**_JIT)
def accept_in_order(bits, covered, candidates, order, t, table, accepted, n_accepted):
    for i in range(order.shape[0]):
        block = candidates[order[i]]
        if block_is_clean(bits, block, t, table):
            covered += mark_block(bits, block, t, table)
            accepted[n_accepted, :] = block
            n_accepted += 1
    return covered, n_accepted


@nb.njit(**_JIT)
def uncovered_ranks(bits, total):
    out = np.empty(total, dtype=np.int64)
    n = 0
    for r in range(total):
        if not test_bit(bits, r):
            out[n] = r
            n += 1
    return out[:n]


@nb.njit(**_JIT)
def popcount(bits):
    n = 0
    for i in range(bits.shape[0]):
        b = bits[i]
        while b:
            b &= b - 1
            n += 1
    return n


@nb.njit(**_JIT)
def unrank_into(rank, t, v, table, out):
    for i in range(t, 0, -1):
        c = i - 1
        while c + 1 < v and table[c + 1, i] <= rank:
            c += 1
        out[i - 1] = c
        rank -= table[c, i]


@nb.njit(**_JIT)
def complete_uncovered(bits, total, v, k, t, table, out):
    """One block per still-uncovered t-set, in colex order.

    The t-set is padded with the k - t smallest points outside it; t-sets
    covered by an earlier padded block are skipped. Returns
    ``(blocks written, newly covered)``.
    """
    tset = np.empty(t, dtype=np.int64)
    block = np.empty(k, dtype=np.int64)
    n = 0
    fresh = 0
    for r in range(total):
        if test_bit(bits, r):
            continue
        unrank_into(r, t, v, table, tset)
        # merge tset with the smallest outside points, keeping order
        i = 0
        x = 0
        j = 0
        while j < k:
            if i < t and tset[i] == x:
                block[j] = x
                i += 1
                j += 1
            elif j - i < k - t:
                block[j] = x
                j += 1
            elif i < t:
                block[j] = tset[i]
                i += 1
                j += 1
            x += 1
        fresh += mark_block(bits, block, t, table)
        out[n, :] = block
        n += 1
    return n, fresh

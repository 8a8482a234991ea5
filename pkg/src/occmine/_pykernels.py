"""Pure-Python occ-list join kernels.

Same signatures and results as the compiled ``_kernels`` extension; used when
the extension is not built or ``OCCMINE_PURE_PYTHON`` is set.

Inputs are an occ-list in structure-of-arrays form (``tid``, ``path``,
``rp``, ``mult``; ``path``/``rp`` are ``(n, width)``) and the vertex list of
one label (``vtid``, ``vl``, ``vu``) sorted by ``(tid, l)``.  The joins
return ``(tid, path, rp, mult, support, tree_support)``; the ``*_count``
variants return ``(entries, support, tree_support)`` of the same join
without building it.
"""
from bisect import bisect_right

import numpy as np

from .errors import CountOverflow

U64_MAX = 2**64 - 1


def _pack(out_tid, out_path, out_rp, out_mult, width, support):
    if support > U64_MAX:
        raise CountOverflow()
    tree_support = 0
    prev = None
    for t in out_tid:
        if t != prev:
            tree_support += 1
            prev = t
    n = len(out_tid)
    return (
        np.array(out_tid, dtype=np.int64),
        np.array(out_path, dtype=np.int64).reshape(n, width),
        np.array(out_rp, dtype=np.int64).reshape(n, width),
        np.array(out_mult, dtype=np.uint64),
        support,
        tree_support,
    )


class _Blocks:
    """Walks the tid blocks of a vertex list in increasing tid order."""

    def __init__(self, vtid):
        self.vt = vtid
        self.s = self.e = 0
        self.cur = None

    def block(self, t):
        if t != self.cur:
            vt, n = self.vt, len(self.vt)
            s = self.e if self.cur is not None and t > self.cur else 0
            while s < n and vt[s] < t:
                s += 1
            e = s
            while e < n and vt[e] == t:
                e += 1
            self.s, self.e, self.cur = s, e, t
        return self.s, self.e


def leaf_join(tid, path, rp, mult, vtid, vl, vu):
    tids = tid.tolist()
    paths = path.tolist()
    rps = rp.tolist()
    mults = [int(m) for m in mult.tolist()]
    vls, vus = vl.tolist(), vu.tolist()
    blocks = _Blocks(vtid.tolist())
    width = path.shape[1] + 1

    out_tid, out_path, out_rp, out_mult = [], [], [], []
    support = 0
    for i, t in enumerate(tids):
        s, e = blocks.block(t)
        if s == e:
            continue
        lo = bisect_right(vls, paths[i][-1], s, e)
        hi = bisect_right(vls, rps[i][-1], lo, e)
        m = mults[i]
        for k in range(lo, hi):
            out_tid.append(t)
            out_path.extend(paths[i])
            out_path.append(vls[k])
            out_rp.extend(rps[i])
            out_rp.append(vus[k])
            out_mult.append(m)
        support += m * (hi - lo)
    return _pack(out_tid, out_path, out_rp, out_mult, width, support)


def leaf_count(tid, path, rp, mult, vtid, vl, vu):
    tids = tid.tolist()
    last = path[:, -1].tolist()
    ends = rp[:, -1].tolist()
    mults = mult.tolist()
    vls = vl.tolist()
    blocks = _Blocks(vtid.tolist())
    entries = support = trees = 0
    hit = None
    for i, t in enumerate(tids):
        s, e = blocks.block(t)
        lo = bisect_right(vls, last[i], s, e)
        hi = bisect_right(vls, ends[i], lo, e)
        if hi > lo:
            entries += hi - lo
            support += int(mults[i]) * (hi - lo)
            if t != hit:
                trees += 1
                hit = t
    if support > U64_MAX:
        raise CountOverflow()
    return entries, support, trees


def _groups(tids, paths, rps, mults, blocks, vls, c):
    """Yield ``(tid, first row, sorted members, lo, hi)`` per maximal group."""
    n = len(tids)
    g0 = 0
    while g0 < n:
        t = tids[g0]
        head = paths[g0][: c + 1]
        g1 = g0 + 1
        while g1 < n and tids[g1] == t and paths[g1][: c + 1] == head:
            g1 += 1
        members = sorted((rps[k][c + 1], int(mults[k])) for k in range(g0, g1))
        s, e = blocks.block(t)
        lo = bisect_right(vls, members[0][0], s, e)
        hi = bisect_right(vls, rps[g0][c], lo, e)
        yield t, g0, members, lo, hi
        g0 = g1


def inner_count(tid, path, rp, mult, vtid, vl, vu, c):
    vls = vl.tolist()
    groups = _groups(tid.tolist(), path.tolist(), rp.tolist(), mult.tolist(), _Blocks(vtid.tolist()), vls, c)
    entries = support = trees = 0
    hit = None
    for t, _, members, lo, hi in groups:
        if hi == lo:
            continue
        entries += hi - lo
        if t != hit:
            trees += 1
            hit = t
        p = acc = 0
        for k in range(lo, hi):
            while p < len(members) and members[p][0] < vls[k]:
                acc += members[p][1]
                p += 1
            if acc > U64_MAX:
                raise CountOverflow()
            support += acc
    if support > U64_MAX:
        raise CountOverflow()
    return entries, support, trees


def inner_join(tid, path, rp, mult, vtid, vl, vu, c):
    paths = path.tolist()
    rps = rp.tolist()
    vls, vus = vl.tolist(), vu.tolist()
    groups = _groups(tid.tolist(), paths, rps, mult.tolist(), _Blocks(vtid.tolist()), vls, c)
    width = c + 2

    out_tid, out_path, out_rp, out_mult = [], [], [], []
    support = 0
    for t, g0, members, lo, hi in groups:
        head = paths[g0][: c + 1]
        rp_head = rps[g0][: c + 1]
        p = acc = 0
        for k in range(lo, hi):
            x = vls[k]
            while p < len(members) and members[p][0] < x:
                acc += members[p][1]
                p += 1
            if acc > U64_MAX:
                raise CountOverflow()
            out_tid.append(t)
            out_path.extend(head)
            out_path.append(x)
            out_rp.extend(rp_head)
            out_rp.append(vus[k])
            out_mult.append(acc)
            support += acc
    return _pack(out_tid, out_path, out_rp, out_mult, width, support)


def extension_counts(tid, path, rp, mult, c, tree_tids, offset, flat, n_labels):
    tids = tid.tolist()
    paths = path.tolist()
    rps = rp.tolist()
    mults = [int(m) for m in mult.tolist()]
    pos = {t: int(o) for t, o in zip(tree_tids.tolist(), offset.tolist())}
    flat = flat.tolist()
    entries = [0] * n_labels
    support = [0] * n_labels
    trees = [0] * n_labels
    last = [None] * n_labels
    n = len(tids)

    def hit(x, t):
        entries[x] += 1
        if last[x] != t:
            trees[x] += 1
            last[x] = t

    if c == path.shape[1] - 1:
        for i, t in enumerate(tids):
            base = pos[t]
            for v in range(paths[i][-1] + 1, rps[i][-1] + 1):
                x = flat[base + v]
                hit(x, t)
                support[x] += mults[i]
    else:
        g0 = 0
        while g0 < n:
            t = tids[g0]
            head = paths[g0][: c + 1]
            g1 = g0 + 1
            while g1 < n and tids[g1] == t and paths[g1][: c + 1] == head:
                g1 += 1
            base = pos[t]
            hi = rps[g0][c]
            for v in range(min(rps[k][c + 1] for k in range(g0, g1)) + 1, hi + 1):
                hit(flat[base + v], t)
            for k in range(g0, g1):
                for v in range(rps[k][c + 1] + 1, hi + 1):
                    support[flat[base + v]] += mults[k]
            g0 = g1
    over = np.array([s > U64_MAX for s in support], dtype=np.uint8)
    sup = np.array([min(s, U64_MAX) for s in support], dtype=np.uint64)
    return np.array(entries, dtype=np.int64), sup, np.array(trees, dtype=np.int64), over

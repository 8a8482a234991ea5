# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False
"""Compiled occ-list join kernels (see ``_pykernels`` for the contract)."""
import numpy as np

from libc.stdint cimport int64_t, uint8_t, uint64_t
from libc.stdlib cimport free, malloc, qsort

from occmine.errors import CountOverflow

cdef uint64_t U64_MAX = 0xFFFFFFFFFFFFFFFFULL

ctypedef struct member_t:
    int64_t key
    uint64_t mult


cdef int _cmp_member(const void* a, const void* b) noexcept nogil:
    cdef int64_t ka = (<const member_t*>a).key
    cdef int64_t kb = (<const member_t*>b).key
    return (ka > kb) - (ka < kb)


cdef inline Py_ssize_t _upper_bound(const int64_t[::1] a, Py_ssize_t lo, Py_ssize_t hi,
                                    int64_t x) noexcept nogil:
    # first index in [lo, hi) with a[i] > x
    cdef Py_ssize_t mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if a[mid] <= x:
            lo = mid + 1
        else:
            hi = mid
    return lo


cdef inline void _block(const int64_t[::1] vtid, int64_t t, Py_ssize_t* s,
                        Py_ssize_t* e) noexcept nogil:
    # caller visits tids in nondecreasing order; s/e keep the previous block
    cdef Py_ssize_t nv = vtid.shape[0]
    cdef Py_ssize_t i = s[0]
    while i < nv and vtid[i] < t:
        i += 1
    cdef Py_ssize_t j = i
    while j < nv and vtid[j] == t:
        j += 1
    s[0] = i
    e[0] = j


cdef Py_ssize_t _count_trees(const int64_t[::1] tid) noexcept nogil:
    cdef Py_ssize_t i, n = tid.shape[0], k = 0
    for i in range(n):
        if i == 0 or tid[i] != tid[i - 1]:
            k += 1
    return k


def leaf_join(const int64_t[::1] tid, const int64_t[:, ::1] path, const int64_t[:, ::1] rp,
              const uint64_t[::1] mult, const int64_t[::1] vtid, const int64_t[::1] vl,
              const int64_t[::1] vu):
    cdef Py_ssize_t n = tid.shape[0]
    cdef Py_ssize_t w = path.shape[1]
    cdef Py_ssize_t i, j, k, r, lo, hi, total = 0
    cdef Py_ssize_t s = 0, e = 0
    cdef int64_t cur = -1
    cdef uint64_t sup = 0, m

    los_a = np.empty(n, dtype=np.intp)
    his_a = np.empty(n, dtype=np.intp)
    cdef Py_ssize_t[::1] los = los_a
    cdef Py_ssize_t[::1] his = his_a

    with nogil:
        for i in range(n):
            if tid[i] != cur:
                cur = tid[i]
                _block(vtid, cur, &s, &e)
            lo = _upper_bound(vl, s, e, path[i, w - 1])
            hi = _upper_bound(vl, lo, e, rp[i, w - 1])
            los[i] = lo
            his[i] = hi
            total += hi - lo

    out_tid_a = np.empty(total, dtype=np.int64)
    out_path_a = np.empty((total, w + 1), dtype=np.int64)
    out_rp_a = np.empty((total, w + 1), dtype=np.int64)
    out_mult_a = np.empty(total, dtype=np.uint64)
    cdef int64_t[::1] out_tid = out_tid_a
    cdef int64_t[:, ::1] out_path = out_path_a
    cdef int64_t[:, ::1] out_rp = out_rp_a
    cdef uint64_t[::1] out_mult = out_mult_a
    cdef bint overflow = False

    with nogil:
        r = 0
        for i in range(n):
            m = mult[i]
            for k in range(los[i], his[i]):
                out_tid[r] = tid[i]
                for j in range(w):
                    out_path[r, j] = path[i, j]
                    out_rp[r, j] = rp[i, j]
                out_path[r, w] = vl[k]
                out_rp[r, w] = vu[k]
                out_mult[r] = m
                if sup > U64_MAX - m:
                    overflow = True
                sup += m
                r += 1
    if overflow:
        raise CountOverflow()
    return out_tid_a, out_path_a, out_rp_a, out_mult_a, int(sup), _count_trees(out_tid)


cdef Py_ssize_t _groups(const int64_t[::1] tid, const int64_t[:, ::1] path, const int64_t[:, ::1] rp,
                        const int64_t[::1] vtid, const int64_t[::1] vl, Py_ssize_t c,
                        Py_ssize_t[::1] g_start, Py_ssize_t[::1] g_lo, Py_ssize_t[::1] g_hi,
                        Py_ssize_t* total, Py_ssize_t* maxg) noexcept nogil:
    # maximal runs with equal (tid, path[0..c]) and their candidate vertex ranges
    cdef Py_ssize_t n = tid.shape[0]
    cdef Py_ssize_t g0 = 0, g1, j, lo, hi, ng = 0
    cdef Py_ssize_t s = 0, e = 0
    cdef int64_t cur = -1, zmin
    cdef bint same
    total[0] = 0
    maxg[0] = 0
    while g0 < n:
        g1 = g0 + 1
        zmin = rp[g0, c + 1]
        while g1 < n and tid[g1] == tid[g0]:
            same = True
            for j in range(c + 1):
                if path[g1, j] != path[g0, j]:
                    same = False
                    break
            if not same:
                break
            if rp[g1, c + 1] < zmin:
                zmin = rp[g1, c + 1]
            g1 += 1
        if tid[g0] != cur:
            cur = tid[g0]
            _block(vtid, cur, &s, &e)
        lo = _upper_bound(vl, s, e, zmin)
        hi = _upper_bound(vl, lo, e, rp[g0, c])
        g_start[ng] = g0
        g_lo[ng] = lo
        g_hi[ng] = hi
        ng += 1
        total[0] += hi - lo
        if g1 - g0 > maxg[0]:
            maxg[0] = g1 - g0
        g0 = g1
    g_start[ng] = n
    return ng


cdef void _load_group(const int64_t[:, ::1] rp, const uint64_t[::1] mult, Py_ssize_t g0, Py_ssize_t gsize,
                      Py_ssize_t c, member_t* members) noexcept nogil:
    cdef Py_ssize_t k
    for k in range(gsize):
        members[k].key = rp[g0 + k, c + 1]
        members[k].mult = mult[g0 + k]
    if gsize > 1:
        qsort(members, gsize, sizeof(member_t), _cmp_member)


def leaf_count(const int64_t[::1] tid, const int64_t[:, ::1] path, const int64_t[:, ::1] rp,
               const uint64_t[::1] mult, const int64_t[::1] vtid, const int64_t[::1] vl,
               const int64_t[::1] vu):
    """``(entries, support, tree_support)`` of :func:`leaf_join` without building it."""
    cdef Py_ssize_t n = tid.shape[0]
    cdef Py_ssize_t w = path.shape[1]
    cdef Py_ssize_t i, lo, hi, total = 0, trees = 0
    cdef Py_ssize_t s = 0, e = 0
    cdef int64_t cur = -1, last_hit = -1
    cdef uint64_t sup = 0, m, add
    cdef bint overflow = False
    with nogil:
        for i in range(n):
            if tid[i] != cur:
                cur = tid[i]
                _block(vtid, cur, &s, &e)
            lo = _upper_bound(vl, s, e, path[i, w - 1])
            hi = _upper_bound(vl, lo, e, rp[i, w - 1])
            if hi == lo:
                continue
            total += hi - lo
            if cur != last_hit:
                trees += 1
                last_hit = cur
            m = mult[i]
            if m > U64_MAX // <uint64_t>(hi - lo):
                overflow = True
                break
            add = m * <uint64_t>(hi - lo)
            if sup > U64_MAX - add:
                overflow = True
                break
            sup += add
    if overflow:
        raise CountOverflow()
    return total, int(sup), trees


def inner_count(const int64_t[::1] tid, const int64_t[:, ::1] path, const int64_t[:, ::1] rp,
                const uint64_t[::1] mult, const int64_t[::1] vtid, const int64_t[::1] vl,
                const int64_t[::1] vu, Py_ssize_t c):
    """``(entries, support, tree_support)`` of :func:`inner_join` without building it."""
    cdef Py_ssize_t n = tid.shape[0]
    cdef Py_ssize_t gi, ng, k, p, lo, hi, g0, gsize, total = 0, maxg = 0, trees = 0
    cdef int64_t last_hit = -1
    cdef uint64_t sup = 0, acc
    cdef bint overflow = False
    g_start_a = np.empty(n + 1, dtype=np.intp)
    g_lo_a = np.empty(n, dtype=np.intp)
    g_hi_a = np.empty(n, dtype=np.intp)
    cdef Py_ssize_t[::1] g_start = g_start_a
    cdef Py_ssize_t[::1] g_lo = g_lo_a
    cdef Py_ssize_t[::1] g_hi = g_hi_a
    with nogil:
        ng = _groups(tid, path, rp, vtid, vl, c, g_start, g_lo, g_hi, &total, &maxg)
    if total == 0:
        return 0, 0, 0
    cdef member_t* members = <member_t*>malloc(maxg * sizeof(member_t))
    if members == NULL:
        raise MemoryError()
    try:
        with nogil:
            for gi in range(ng):
                lo = g_lo[gi]
                hi = g_hi[gi]
                if lo >= hi:
                    continue
                g0 = g_start[gi]
                gsize = g_start[gi + 1] - g0
                if tid[g0] != last_hit:
                    trees += 1
                    last_hit = tid[g0]
                _load_group(rp, mult, g0, gsize, c, members)
                p = 0
                acc = 0
                for k in range(lo, hi):
                    while p < gsize and members[p].key < vl[k]:
                        if acc > U64_MAX - members[p].mult:
                            overflow = True
                        acc += members[p].mult
                        p += 1
                    if sup > U64_MAX - acc:
                        overflow = True
                    sup += acc
    finally:
        free(members)
    if overflow:
        raise CountOverflow()
    return total, int(sup), trees


def inner_join(const int64_t[::1] tid, const int64_t[:, ::1] path, const int64_t[:, ::1] rp,
               const uint64_t[::1] mult, const int64_t[::1] vtid, const int64_t[::1] vl,
               const int64_t[::1] vu, Py_ssize_t c):
    cdef Py_ssize_t n = tid.shape[0]
    cdef Py_ssize_t w = c + 2
    cdef Py_ssize_t g0, gi, ng, j, k, p, r, lo, hi, total = 0, gsize, maxg = 0
    cdef uint64_t sup = 0, acc
    cdef bint overflow = False

    g_start_a = np.empty(n + 1, dtype=np.intp)
    g_lo_a = np.empty(n, dtype=np.intp)
    g_hi_a = np.empty(n, dtype=np.intp)
    cdef Py_ssize_t[::1] g_start = g_start_a
    cdef Py_ssize_t[::1] g_lo = g_lo_a
    cdef Py_ssize_t[::1] g_hi = g_hi_a

    with nogil:
        ng = _groups(tid, path, rp, vtid, vl, c, g_start, g_lo, g_hi, &total, &maxg)

    out_tid_a = np.empty(total, dtype=np.int64)
    out_path_a = np.empty((total, w), dtype=np.int64)
    out_rp_a = np.empty((total, w), dtype=np.int64)
    out_mult_a = np.empty(total, dtype=np.uint64)
    cdef int64_t[::1] out_tid = out_tid_a
    cdef int64_t[:, ::1] out_path = out_path_a
    cdef int64_t[:, ::1] out_rp = out_rp_a
    cdef uint64_t[::1] out_mult = out_mult_a

    if total == 0:
        return out_tid_a, out_path_a, out_rp_a, out_mult_a, 0, 0

    cdef member_t* members = <member_t*>malloc(maxg * sizeof(member_t))
    if members == NULL:
        raise MemoryError()
    try:
        with nogil:
            r = 0
            for gi in range(ng):
                lo = g_lo[gi]
                hi = g_hi[gi]
                if lo >= hi:
                    continue
                g0 = g_start[gi]
                gsize = g_start[gi + 1] - g0
                _load_group(rp, mult, g0, gsize, c, members)
                p = 0
                acc = 0
                for k in range(lo, hi):
                    while p < gsize and members[p].key < vl[k]:
                        if acc > U64_MAX - members[p].mult:
                            overflow = True
                        acc += members[p].mult
                        p += 1
                    out_tid[r] = tid[g0]
                    for j in range(c + 1):
                        out_path[r, j] = path[g0, j]
                        out_rp[r, j] = rp[g0, j]
                    out_path[r, c + 1] = vl[k]
                    out_rp[r, c + 1] = vu[k]
                    out_mult[r] = acc
                    if sup > U64_MAX - acc:
                        overflow = True
                    sup += acc
                    r += 1
    finally:
        free(members)
    if overflow:
        raise CountOverflow()
    return out_tid_a, out_path_a, out_rp_a, out_mult_a, int(sup), _count_trees(out_tid)


def extension_counts(const int64_t[::1] tid, const int64_t[:, ::1] path, const int64_t[:, ::1] rp,
                     const uint64_t[::1] mult, Py_ssize_t c, const int64_t[::1] tree_tids,
                     const int64_t[::1] offset, const int64_t[::1] flat, Py_ssize_t n_labels):
    """Per-label ``(entries, support, tree_support, overflow)`` for every join at rdepth ``c``."""
    cdef Py_ssize_t n = tid.shape[0]
    cdef Py_ssize_t w = path.shape[1]
    cdef Py_ssize_t i, j, k, g0, g1, tp = 0
    cdef int64_t t, v, x, base, zmin, hi
    cdef uint64_t m
    cdef bint same

    entries_a = np.zeros(n_labels, dtype=np.int64)
    support_a = np.zeros(n_labels, dtype=np.uint64)
    trees_a = np.zeros(n_labels, dtype=np.int64)
    last_a = np.full(n_labels, -1, dtype=np.int64)
    over_a = np.zeros(n_labels, dtype=np.uint8)
    cdef int64_t[::1] entries = entries_a
    cdef uint64_t[::1] support = support_a
    cdef int64_t[::1] trees = trees_a
    cdef int64_t[::1] last = last_a
    cdef uint8_t[::1] over = over_a

    with nogil:
        if c == w - 1:
            for i in range(n):
                t = tid[i]
                while tree_tids[tp] < t:
                    tp += 1
                base = offset[tp]
                m = mult[i]
                for v in range(path[i, w - 1] + 1, rp[i, w - 1] + 1):
                    x = flat[base + v]
                    entries[x] += 1
                    if last[x] != t:
                        trees[x] += 1
                        last[x] = t
                    if support[x] > U64_MAX - m:
                        over[x] = 1
                    else:
                        support[x] += m
        else:
            g0 = 0
            while g0 < n:
                t = tid[g0]
                g1 = g0 + 1
                zmin = rp[g0, c + 1]
                while g1 < n and tid[g1] == t:
                    same = True
                    for j in range(c + 1):
                        if path[g1, j] != path[g0, j]:
                            same = False
                            break
                    if not same:
                        break
                    if rp[g1, c + 1] < zmin:
                        zmin = rp[g1, c + 1]
                    g1 += 1
                while tree_tids[tp] < t:
                    tp += 1
                base = offset[tp]
                hi = rp[g0, c]
                # one output entry per vertex right of the group's lowest member
                for v in range(zmin + 1, hi + 1):
                    x = flat[base + v]
                    entries[x] += 1
                    if last[x] != t:
                        trees[x] += 1
                        last[x] = t
                # each member counts toward every vertex right of its own subtree
                for k in range(g0, g1):
                    m = mult[k]
                    for v in range(rp[k, c + 1] + 1, hi + 1):
                        x = flat[base + v]
                        if support[x] > U64_MAX - m:
                            over[x] = 1
                        else:
                            support[x] += m
                g0 = g1
    return entries_a, support_a, trees_a, over_a

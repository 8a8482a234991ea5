"""Reference engines used to check the occ-list miner.

* :func:`enumerate_embeddings` / :func:`count_embeddings` - backtracking
  search for every subtree-homeomorphic mapping of a pattern into a tree,
  driven by ancestor sets built from parent links (no scopes involved).
* :func:`brute_force_embeddings` - filters all ``|V(T)|**|V(P)|`` mappings;
  only for tiny inputs, used to check the backtracking search itself.
* :func:`oracle_mine` - grows patterns by rightmost-path extension and counts
  each one from scratch with :func:`count_embeddings`.
* :func:`scopelist_mine` - a vertical miner that stores one scope-list
  element per embedding (match vector + scope of the rightmost vertex);
  the storage baseline the occ-list is measured against.

A mapping ``phi`` from pattern to tree vertices is an embedding iff labels
agree, ``u`` is an ancestor of ``v`` in the pattern exactly when ``phi(u)``
is an ancestor of ``phi(v)`` in the tree, and preorder is preserved.
"""
from __future__ import annotations

import itertools
from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional

import numpy as np

from .encoding import Dataset, encode_pattern
from .errors import ExplosionGuard
from .occindex import CountMode
from .miner import enumerate_extensions
from .treecore import DatabaseTree, Pattern, construction_steps, rextend

__all__ = [
    "DEFAULT_GUARD",
    "Embedding",
    "enumerate_embeddings",
    "count_embeddings",
    "brute_force_embeddings",
    "oracle_mine",
    "ScopeList",
    "ScopeListStats",
    "ScopeListIndex",
    "scopelist_join",
    "scopelist_count",
    "scopelist_extension_counts",
    "scopelist_of",
    "scopelist_mine",
]

DEFAULT_GUARD = 10**7


@dataclass(frozen=True)
class Embedding:
    tid: int
    map: tuple


def _ancestor_sets(parent: tuple) -> list:
    anc = []
    for v, p in enumerate(parent):
        anc.append(frozenset() if p is None else anc[p] | {p})
    return anc


class _TreeFacts:
    __slots__ = ("anc", "by_label")

    def __init__(self, t: DatabaseTree):
        self.anc = _ancestor_sets(t.parent)
        by_label: Dict[int, list] = {}
        for v, lab in enumerate(t.labels):
            by_label.setdefault(lab, []).append(v)
        self.by_label = by_label


class _PatternFacts:
    __slots__ = ("labels", "parent", "unrelated")

    def __init__(self, p: Pattern):
        anc = _ancestor_sets(p.parent)
        self.labels = p.labels
        self.parent = p.parent
        # earlier pattern vertices that are not ancestors of j
        self.unrelated = [tuple(w for w in range(j) if w not in anc[j]) for j in range(len(p.labels))]


def _search(pf: _PatternFacts, tf: _TreeFacts, on_match):
    k = len(pf.labels)
    phi = [0] * k

    def rec(j: int, prev: int):
        if j == k:
            on_match(phi)
            return
        cands = tf.by_label.get(pf.labels[j])
        if not cands:
            return
        par = pf.parent[j]
        for v in cands[bisect_right(cands, prev):]:
            anc_v = tf.anc[v]
            if par is not None and phi[par] not in anc_v:
                continue
            if any(phi[w] in anc_v for w in pf.unrelated[j]):
                continue
            phi[j] = v
            rec(j + 1, v)

    rec(0, -1)


def enumerate_embeddings(p: Pattern, t: DatabaseTree, cap: int = DEFAULT_GUARD) -> List[Embedding]:
    """All embeddings of ``p`` in ``t`` in lexicographic order of their maps."""
    out = []

    def keep(phi):
        if len(out) >= cap:
            raise ExplosionGuard(cap)
        out.append(Embedding(t.tid, tuple(phi)))

    _search(_PatternFacts(p), _TreeFacts(t), keep)
    return out


def count_embeddings(p: Pattern, t: DatabaseTree, cap: int = DEFAULT_GUARD, _facts=None) -> int:
    n = 0

    def bump(_):
        nonlocal n
        n += 1
        if n > cap:
            raise ExplosionGuard(cap)

    _search(_PatternFacts(p), _facts or _TreeFacts(t), bump)
    return n


def brute_force_embeddings(p: Pattern, t: DatabaseTree) -> List[Embedding]:
    """Check every mapping against the definition; exponential, tiny inputs only."""
    p_anc = _ancestor_sets(p.parent)
    t_anc = _ancestor_sets(t.parent)
    k, n = len(p.labels), len(t.labels)
    out = []
    for phi in itertools.product(range(n), repeat=k):
        if any(p.labels[j] != t.labels[phi[j]] for j in range(k)):
            continue
        ok = True
        for u in range(k):
            for v in range(k):
                if u == v:
                    continue
                if (u in p_anc[v]) != (phi[u] in t_anc[phi[v]]):
                    ok = False
                elif (u < v) != (phi[u] < phi[v]):
                    ok = False
                if not ok:
                    break
            if not ok:
                break
        if ok:
            out.append(Embedding(t.tid, phi))
    return out


def _count_all(p: Pattern, facts, mode: CountMode, cap: int):
    """Support of ``p`` over ``facts`` plus the trees where it occurs."""
    pf = _PatternFacts(p)
    hits = []
    total = 0
    for t, tf in facts:
        n = 0

        def bump(_):
            nonlocal n
            n += 1
            if n > cap:
                raise ExplosionGuard(cap)

        _search(pf, tf, bump)
        if n:
            hits.append((t, tf))
            total += n
            if mode is CountMode.PER_OCCURRENCE and total > cap:
                raise ExplosionGuard(cap)
    return (total if mode is CountMode.PER_OCCURRENCE else len(hits)), hits


def oracle_mine(d: Dataset, cfg, cap: int = DEFAULT_GUARD) -> Dict[tuple, int]:
    """Frequent patterns of ``d`` as ``{pattern tokens: support}``.

    Applies the recursive definition directly: a pattern qualifies when its
    support reaches ``cfg.minsup`` and its rightmost-vertex-deleted prefix
    qualifies.  Extension vertices are the qualifying single labels.
    ``cfg.class_merge`` is ignored.
    """
    mode = CountMode(cfg.count_mode)
    facts = [(t, _TreeFacts(t)) for t in d.trees]
    labels = sorted({lab for t in d.trees for lab in t.labels})
    out: Dict[tuple, int] = {}

    def grow(p: Pattern, sup: int, hits):
        out[encode_pattern(p)] = sup
        if cfg.max_pattern_size is not None and len(p) >= cfg.max_pattern_size:
            return
        for lab in frequent:
            for i in range(p.depth + 1):
                q = rextend(p, lab, i)
                # an embedding of q restricts to one of p, so only p's trees can hold q
                s, q_hits = _count_all(q, hits, mode, cap)
                if s >= cfg.minsup:
                    grow(q, s, q_hits)

    singles = {lab: _count_all(Pattern.single(lab), facts, mode, cap) for lab in labels}
    frequent = [lab for lab in labels if singles[lab][0] >= cfg.minsup]
    for lab in frequent:
        grow(Pattern.single(lab), *singles[lab])
    return out


# ---------------------------------------------------------------------------
# scope-list baseline


class ScopeListIndex:
    """Dataset-wide lookup tables for the vectorized scope-list join."""

    def __init__(self, d: Dataset):
        sizes = [len(t) for t in d.trees]
        self.stride = (max(sizes) if sizes else 0) + 1
        maxtid = max((t.tid for t in d.trees), default=0)
        self.offset = np.zeros(maxtid + 1, dtype=np.int64)
        upper = []
        pos = 0
        for t in d.trees:
            self.offset[t.tid] = pos
            upper.extend(t.upper)
            pos += len(t)
        self.upper = np.array(upper, dtype=np.int64)
        self.labels = np.array([x for t in d.trees for x in t.labels], dtype=np.int64)
        self.n_labels = len(d.labels.names)
        cols: Dict[int, tuple] = {}
        for t in d.trees:
            for v, lab in enumerate(t.labels):
                tids, ls, us = cols.setdefault(lab, ([], [], []))
                tids.append(t.tid)
                ls.append(v)
                us.append(t.upper[v])
        self.vertices = {}
        for lab, (tids, ls, us) in cols.items():
            tid = np.array(tids, dtype=np.int64)
            vl = np.array(ls, dtype=np.int64)
            self.vertices[lab] = (tid, vl, np.array(us, dtype=np.int64), tid * self.stride + vl)

    def single(self, label: int) -> "ScopeList":
        p = Pattern.single(label)
        if label not in self.vertices:
            z = np.empty(0, dtype=np.int64)
            return ScopeList(p, z, np.empty((0, 0), dtype=np.int64), z, z)
        tid, vl, vu, _ = self.vertices[label]
        return ScopeList(p, tid, np.empty((len(tid), 0), dtype=np.int64), vl, vu)


@dataclass
class ScopeList:
    """One element per embedding: tree id, images of all but the rightmost
    pattern vertex (``match``, in pattern preorder) and the rightmost image's scope."""

    pattern: Pattern
    tid: np.ndarray
    match: np.ndarray
    sl: np.ndarray
    su: np.ndarray

    def __len__(self) -> int:
        return len(self.tid)

    @property
    def support(self) -> int:
        return len(self.tid)

    @property
    def tree_support(self) -> int:
        return len(np.unique(self.tid))

    def images(self) -> list:
        """Full embedding maps, one tuple per element."""
        full = np.hstack([self.match, self.sl[:, None]])
        return [(int(t), tuple(row)) for t, row in zip(self.tid.tolist(), full.tolist())]


def _ranges(sc: ScopeList, label: int, attach_rdepth: int, idx: ScopeListIndex):
    """Per-element ``[lo, hi)`` ranges into the label's vertex list, or None."""
    p = sc.pattern
    k = len(p)
    if label not in idx.vertices or len(sc) == 0:
        return None
    vtid, vl, vu, vkey = idx.vertices[label]
    if attach_rdepth == p.depth:
        lower, upper = sc.sl, sc.su
    else:
        w = p.rightmost_path[attach_rdepth]
        z = p.rightmost_path[attach_rdepth + 1]
        base = idx.offset[sc.tid]
        z_img = sc.sl if z == k - 1 else sc.match[:, z]
        lower = idx.upper[base + z_img]
        upper = idx.upper[base + sc.match[:, w]]
    key0 = sc.tid * idx.stride
    lo = np.searchsorted(vkey, key0 + lower, side="right")
    hi = np.searchsorted(vkey, key0 + upper, side="right")
    return lo, np.maximum(hi - lo, 0)


def scopelist_extension_counts(sc: ScopeList, attach_rdepth: int, idx: ScopeListIndex) -> tuple:
    """Per-label ``(elements, tree_support)`` arrays for every join at ``attach_rdepth``.

    Each element contributes one new element per vertex in its candidate
    range, so the counts come from one pass over the expanded ranges.
    """
    p = sc.pattern
    k = len(p)
    zeros = np.zeros(idx.n_labels, dtype=np.int64)
    if len(sc) == 0:
        return zeros, zeros
    base = idx.offset[sc.tid]
    if attach_rdepth == p.depth:
        lower, upper = sc.sl, sc.su
    else:
        w = p.rightmost_path[attach_rdepth]
        z = p.rightmost_path[attach_rdepth + 1]
        z_img = sc.sl if z == k - 1 else sc.match[:, z]
        lower = idx.upper[base + z_img]
        upper = idx.upper[base + sc.match[:, w]]
    lengths = np.maximum(upper - lower, 0)
    total = int(lengths.sum())
    if total == 0:
        return zeros, zeros
    rows = np.repeat(np.arange(len(sc)), lengths)
    starts = np.cumsum(lengths) - lengths
    pos = base[rows] + lower[rows] + 1 + (np.arange(total) - starts[rows])
    labels = idx.labels[pos]
    elements = np.bincount(labels, minlength=idx.n_labels)
    pairs = np.unique(labels * (len(idx.labels) + 1) + base[rows])
    trees = np.bincount(pairs // (len(idx.labels) + 1), minlength=idx.n_labels)
    return elements, trees


def scopelist_count(sc: ScopeList, label: int, attach_rdepth: int, idx: ScopeListIndex) -> tuple:
    """``(elements, tree_support)`` of :func:`scopelist_join` without building it."""
    r = _ranges(sc, label, attach_rdepth, idx)
    if r is None:
        return 0, 0
    counts = r[1]
    hit = sc.tid[counts > 0]
    return int(counts.sum()), int(np.count_nonzero(np.diff(hit)) + 1) if len(hit) else 0


def scopelist_join(sc: ScopeList, label: int, attach_rdepth: int, idx: ScopeListIndex,
                   cap: Optional[int] = None) -> ScopeList:
    """Extend every embedding in ``sc`` by every vertex of ``label`` that fits."""
    new_pattern = rextend(sc.pattern, label, attach_rdepth)
    r = _ranges(sc, label, attach_rdepth, idx)
    if r is None:
        z = np.empty(0, dtype=np.int64)
        return ScopeList(new_pattern, z, np.empty((0, len(sc.pattern)), dtype=np.int64), z, z)
    lo, counts = r
    _, vl, vu, _ = idx.vertices[label]
    total = int(counts.sum())
    if cap is not None and total > cap:
        raise ExplosionGuard(cap, f"scope-list of {total} elements exceeds guard cap {cap}")
    rows = np.repeat(np.arange(len(sc)), counts)
    starts = np.cumsum(counts) - counts
    ov = lo[rows] + (np.arange(total) - starts[rows])
    match = np.hstack([sc.match[rows], sc.sl[rows][:, None]])
    return ScopeList(new_pattern, sc.tid[rows], match, vl[ov], vu[ov])


def scopelist_of(d: Dataset, pattern: Pattern, cap: Optional[int] = DEFAULT_GUARD) -> ScopeList:
    idx = ScopeListIndex(d)
    sc = idx.single(pattern.labels[0])
    for label, r in construction_steps(pattern):
        sc = scopelist_join(sc, label, r, idx, cap)
    return sc


@dataclass
class ScopeListStats:
    candidates_generated: int = 0
    candidates_frequent: int = 0
    total_elements: int = 0
    peak_elements: int = 0
    _live: int = field(default=0, repr=False)

    def _push(self, n: int) -> None:
        self._live += n
        self.peak_elements = max(self.peak_elements, self._live)

    def _pop(self, n: int) -> None:
        self._live -= n


def _iter_scopelist(d: Dataset, cfg, cap: int, stats: ScopeListStats) -> Iterator[tuple]:
    mode = CountMode(cfg.count_mode)
    idx = ScopeListIndex(d)

    def measure(sc):
        return sc.support if mode is CountMode.PER_OCCURRENCE else sc.tree_support

    labels = sorted(idx.vertices)
    singles = {lab: idx.single(lab) for lab in labels}
    stats.candidates_generated += len(labels)
    stats.total_elements += sum(len(s) for s in singles.values())
    frequent = [lab for lab in labels if measure(singles[lab]) >= cfg.minsup]
    base = sum(len(singles[lab]) for lab in frequent)

    def extend(sc, members=None):
        if cfg.max_pattern_size is not None and len(sc.pattern) >= cfg.max_pattern_size:
            return
        # same two sweeps and candidate filter as the occ-list miner
        occurring, hits = set(), []
        counts = {}
        for lab, i in enumerate_extensions(sc.pattern, frequent, members):
            stats.candidates_generated += 1
            if i not in counts:
                counts[i] = scopelist_extension_counts(sc, i, idx)
            n, trees = int(counts[i][0][lab]), int(counts[i][1][lab])
            if n:
                occurring.add((lab, i))
                if (n if mode is CountMode.PER_OCCURRENCE else trees) >= cfg.minsup:
                    hits.append((lab, i))
        for lab, i in hits:
            child = scopelist_join(sc, lab, i, idx, cap - stats._live)
            stats.total_elements += len(child)
            stats._push(len(child))
            stats.candidates_frequent += 1
            yield child
            yield from extend(child, occurring)
            stats._pop(len(child))

    if base > cap:
        raise ExplosionGuard(cap)
    stats._push(base)
    for lab in frequent:
        stats.candidates_frequent += 1
        yield singles[lab]
        yield from extend(singles[lab])
    stats._pop(base)


def scopelist_mine(d: Dataset, cfg, cap: int = DEFAULT_GUARD,
                   stats: Optional[ScopeListStats] = None) -> Dict[tuple, int]:
    """Frequent patterns as ``{pattern tokens: support}`` via per-embedding scope-lists.

    Candidate order and pruning follow :func:`occmine.miner.mine` in default
    mode.  Raises :class:`ExplosionGuard` once the scope-lists alive on the
    search spine would hold more than ``cap`` elements.
    """
    stats = stats if stats is not None else ScopeListStats()
    mode = CountMode(cfg.count_mode)
    out = {}
    for sc in _iter_scopelist(d, cfg, cap, stats):
        out[encode_pattern(sc.pattern)] = sc.support if mode is CountMode.PER_OCCURRENCE else sc.tree_support
    return out

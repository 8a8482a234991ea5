"""Compressed occurrence lists and the leaf/inner join operators.

An :class:`OccList` stores, for one pattern, one row per distinct rightmost
path of its occurrence trees: the tree id, the preorder numbers of the
rightmost-path images (``path``), the scope upper bounds of the same vertices
(``rp``) and the number of occurrences sharing that rightmost path
(``mult``).  The scope of the last rightmost-path vertex is
``(path[-1], rp[-1])``.  Rows are sorted by ``(tid, path)``, so rows agreeing
on a path prefix are contiguous and an inner join is a single scan.

Multiplicities are unsigned 64-bit counters; any sum that would wrap raises
:class:`~occmine.errors.CountOverflow`.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Dict, NamedTuple, Optional

import numpy as np

from . import _backend
from .encoding import Dataset
from .errors import CountOverflow, InvalidAttachPoint
from .treecore import Pattern, Scope, construction_steps, rextend

__all__ = [
    "CountMode",
    "Occ",
    "OccList",
    "label_occlists",
    "initial_occlists",
    "leaf_join",
    "inner_join",
    "join",
    "JoinCount",
    "count_join",
    "VertexTable",
    "ExtensionCounts",
    "extension_counts",
    "occlist_of",
    "support",
    "per_tree_support",
]

U64_MAX = 2**64 - 1


class CountMode(str, Enum):
    PER_OCCURRENCE = "per_occurrence"
    PER_TREE = "per_tree"


@dataclass(frozen=True)
class Occ:
    tid: int
    scope: Scope
    rp: tuple
    multiplicity: int
    path: tuple


def _frozen(a, dtype):
    a = np.ascontiguousarray(a, dtype=dtype)
    a.flags.writeable = False
    return a


class OccList:
    """Immutable occ-list of a single pattern."""

    __slots__ = ("pattern", "tid", "path", "rp", "mult", "support", "tree_support", "_vertex_view")

    def __init__(self, pattern: Pattern, tid, path, rp, mult, support=None, tree_support=None):
        self.pattern = pattern
        width = len(pattern.rightmost_path)
        self.tid = _frozen(tid, np.int64)
        self.path = _frozen(np.reshape(path, (len(self.tid), width)), np.int64)
        self.rp = _frozen(np.reshape(rp, (len(self.tid), width)), np.int64)
        self.mult = _frozen(mult, np.uint64)
        if support is None:
            support = sum(int(m) for m in self.mult.tolist())
            if support > U64_MAX:
                raise CountOverflow(pattern=pattern)
        if tree_support is None:
            tree_support = len(np.unique(self.tid))
        self.support = int(support)
        self.tree_support = int(tree_support)
        self._vertex_view = None

    @classmethod
    def from_entries(cls, pattern: Pattern, entries) -> "OccList":
        entries = sorted(entries, key=lambda o: (o.tid, o.path))
        width = len(pattern.rightmost_path)
        return cls(
            pattern,
            [o.tid for o in entries],
            np.array([o.path for o in entries], dtype=np.int64).reshape(len(entries), width),
            np.array([o.rp for o in entries], dtype=np.int64).reshape(len(entries), width),
            np.array([o.multiplicity for o in entries], dtype=np.uint64),
        )

    def __len__(self) -> int:
        return len(self.tid)

    def __repr__(self) -> str:
        return f"OccList(size={len(self.pattern)}, entries={len(self)}, support={self.support})"

    @property
    def entries(self) -> list:
        out = []
        for t, p, r, m in zip(self.tid.tolist(), self.path.tolist(), self.rp.tolist(), self.mult.tolist()):
            out.append(Occ(t, Scope(p[-1], r[-1]), tuple(r), int(m), tuple(p)))
        return out

    @property
    def max_multiplicity(self) -> int:
        return int(self.mult.max()) if len(self) else 0

    def vertex_view(self):
        """``(tid, l, u)`` arrays of a single-vertex occ-list, for use as join input."""
        if self._vertex_view is None:
            if self.path.shape[1] != 1:
                raise ValueError("vertex view requires a single-vertex pattern")
            self._vertex_view = (
                self.tid,
                np.ascontiguousarray(self.path[:, 0]),
                np.ascontiguousarray(self.rp[:, 0]),
            )
        return self._vertex_view

    def dump(self) -> str:
        """One ``tid l u mult rp0 rp1 ...`` line per entry."""
        lines = []
        for t, p, r, m in zip(self.tid.tolist(), self.path.tolist(), self.rp.tolist(), self.mult.tolist()):
            lines.append(" ".join(str(x) for x in (t, p[-1], r[-1], m, *r)))
        return "\n".join(lines) + ("\n" if lines else "")


def label_occlists(d: Dataset) -> Dict[int, OccList]:
    """Occ-lists of every single-vertex pattern, one entry per labeled vertex."""
    cols = {}
    for t in d.trees:
        for v, lab in enumerate(t.labels):
            tids, ls, us = cols.setdefault(lab, ([], [], []))
            tids.append(t.tid)
            ls.append(v)
            us.append(t.upper[v])
    out = {}
    for lab in sorted(cols):
        tids, ls, us = cols[lab]
        n = len(tids)
        out[lab] = OccList(
            Pattern.single(lab), tids, np.array(ls).reshape(n, 1), np.array(us).reshape(n, 1),
            np.ones(n, dtype=np.uint64), support=n,
        )
    return out


def initial_occlists(d: Dataset, minsup: int, count_mode=CountMode.PER_OCCURRENCE) -> Dict[int, OccList]:
    """Occ-lists of the frequent single-vertex patterns, keyed by label."""
    if minsup < 1:
        raise ValueError("minsup must be a positive integer")
    mode = CountMode(count_mode)
    return {
        lab: oc
        for lab, oc in label_occlists(d).items()
        if _measure(oc, mode) >= minsup
    }


def _measure(oc: OccList, mode: CountMode) -> int:
    return oc.support if mode is CountMode.PER_OCCURRENCE else oc.tree_support


def _vertex_label(ocv: OccList) -> int:
    if len(ocv.pattern) != 1:
        raise ValueError("the second join operand must be a single-vertex occ-list")
    return ocv.pattern.labels[0]


def _run(kernel, new_pattern, *args):
    try:
        tid, path, rp, mult, sup, ntrees = kernel(*args)
    except CountOverflow as exc:
        exc.pattern = new_pattern
        raise
    return OccList(new_pattern, tid, path, rp, mult, support=sup, tree_support=ntrees)


def leaf_join(ocp: OccList, ocv: OccList, backend=None) -> OccList:
    """Occ-list of ``ocp.pattern`` with ``ocv``'s label attached below its rightmost vertex."""
    label = _vertex_label(ocv)
    new_pattern = rextend(ocp.pattern, label, ocp.pattern.depth)
    k = _backend.get_backend(backend)
    return _run(k.leaf_join, new_pattern, ocp.tid, ocp.path, ocp.rp, ocp.mult, *ocv.vertex_view())


def inner_join(ocp: OccList, ocv: OccList, attach_rdepth: int, backend=None) -> OccList:
    """Occ-list of ``ocp.pattern`` with ``ocv``'s label attached at rdepth ``attach_rdepth``.

    The attachment point must lie strictly above the rightmost vertex.
    """
    if not isinstance(attach_rdepth, int) or not 0 <= attach_rdepth < ocp.pattern.depth:
        raise InvalidAttachPoint(
            f"inner join needs 0 <= rdepth < {ocp.pattern.depth}, got {attach_rdepth!r}"
        )
    label = _vertex_label(ocv)
    new_pattern = rextend(ocp.pattern, label, attach_rdepth)
    k = _backend.get_backend(backend)
    return _run(
        k.inner_join, new_pattern, ocp.tid, ocp.path, ocp.rp, ocp.mult, *ocv.vertex_view(), attach_rdepth
    )


def join(ocp: OccList, ocv: OccList, attach_rdepth: int, backend=None) -> OccList:
    if attach_rdepth == ocp.pattern.depth:
        return leaf_join(ocp, ocv, backend)
    return inner_join(ocp, ocv, attach_rdepth, backend)


class JoinCount(NamedTuple):
    entries: int
    support: int
    tree_support: int

    def measure(self, mode: CountMode) -> int:
        return self.support if mode is CountMode.PER_OCCURRENCE else self.tree_support


def count_join(ocp: OccList, ocv: OccList, attach_rdepth: int, backend=None) -> JoinCount:
    """Size and supports of ``join(ocp, ocv, attach_rdepth)`` without materialising it."""
    depth = ocp.pattern.depth
    if not isinstance(attach_rdepth, int) or not 0 <= attach_rdepth <= depth:
        raise InvalidAttachPoint(f"rdepth must lie in 0..{depth}, got {attach_rdepth!r}")
    label = _vertex_label(ocv)
    k = _backend.get_backend(backend)
    try:
        if attach_rdepth == depth:
            res = k.leaf_count(ocp.tid, ocp.path, ocp.rp, ocp.mult, *ocv.vertex_view())
        else:
            res = k.inner_count(ocp.tid, ocp.path, ocp.rp, ocp.mult, *ocv.vertex_view(), attach_rdepth)
    except CountOverflow as exc:
        exc.pattern = rextend(ocp.pattern, label, attach_rdepth)
        raise
    return JoinCount(*res)


@dataclass(frozen=True)
class VertexTable:
    """Labels of every database vertex, flattened tree after tree in tid order."""

    tids: np.ndarray
    offset: np.ndarray
    labels: np.ndarray
    n_labels: int

    @classmethod
    def from_dataset(cls, d: Dataset) -> "VertexTable":
        sizes = [len(t) for t in d.trees]
        offset = np.concatenate([[0], np.cumsum(sizes)[:-1]]) if sizes else np.empty(0)
        flat = [x for t in d.trees for x in t.labels]
        return cls(
            _frozen([t.tid for t in d.trees], np.int64),
            _frozen(offset, np.int64),
            _frozen(flat, np.int64),
            len(d.labels.names),
        )


class ExtensionCounts:
    """What :func:`count_join` would return for every label at one rdepth."""

    def __init__(self, ocp: OccList, attach_rdepth: int, entries, support, trees, overflow):
        self.ocp = ocp
        self.attach_rdepth = attach_rdepth
        self.entries = entries.tolist()
        self.support = support.tolist()
        self.trees = trees.tolist()
        self.overflow = overflow

    def get(self, label: int) -> JoinCount:
        if self.overflow[label]:
            raise CountOverflow(pattern=rextend(self.ocp.pattern, label, self.attach_rdepth))
        return JoinCount(self.entries[label], self.support[label], self.trees[label])


def extension_counts(ocp: OccList, attach_rdepth: int, table: VertexTable, backend=None) -> ExtensionCounts:
    """Counts of attaching each label at ``attach_rdepth``, from one scan of ``ocp``.

    A leaf join's support is the sum over entries of the multiplicity times
    the number of labeled vertices inside the rightmost vertex's scope; an
    inner join's is the same sum over the vertices lying right of each
    entry's rdepth ``c + 1`` image and inside its rdepth ``c`` image.
    """
    depth = ocp.pattern.depth
    if not isinstance(attach_rdepth, int) or not 0 <= attach_rdepth <= depth:
        raise InvalidAttachPoint(f"rdepth must lie in 0..{depth}, got {attach_rdepth!r}")
    k = _backend.get_backend(backend)
    res = k.extension_counts(ocp.tid, ocp.path, ocp.rp, ocp.mult, attach_rdepth,
                             table.tids, table.offset, table.labels, table.n_labels)
    return ExtensionCounts(ocp, attach_rdepth, *res)


def support(oc: Optional[OccList]) -> int:
    return 0 if oc is None else oc.support


def per_tree_support(oc: Optional[OccList]) -> int:
    return 0 if oc is None else oc.tree_support


def occlist_of(d: Dataset, pattern: Pattern, backend=None) -> OccList:
    """Occ-list of an arbitrary pattern, built by replaying its extension steps.

    No support threshold is applied along the way.
    """
    singles = label_occlists(d)

    def single(label):
        if label in singles:
            return singles[label]
        return OccList(Pattern.single(label), [], np.empty((0, 1)), np.empty((0, 1)), [])

    oc = single(pattern.labels[0])
    for label, r in construction_steps(pattern):
        oc = join(oc, single(label), r, backend)
    return oc

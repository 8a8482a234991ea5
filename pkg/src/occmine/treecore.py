"""Rooted ordered labeled trees, interval scopes and rightmost-path extension.

Vertices are identified by their preorder number and all per-vertex data is
kept in flat tuples indexed by that number.  Every vertex carries a scope
``(l, u)`` where ``l`` is its own preorder number and ``u`` the preorder
number of its rightmost descendant, so ancestry and left/right relations are
integer interval comparisons.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

from .errors import InvalidAttachPoint, InvalidVertex, MalformedTree

__all__ = [
    "Scope",
    "DatabaseTree",
    "Pattern",
    "build_tree",
    "is_ancestor",
    "is_right_relative",
    "rextend",
    "subtree_size",
    "construction_steps",
]


class Scope(NamedTuple):
    l: int
    u: int


def _check_preorder(parent: Sequence[Optional[int]]) -> None:
    n = len(parent)
    if n == 0:
        raise MalformedTree("a tree needs at least one vertex")
    if parent[0] is not None:
        raise MalformedTree("vertex 0 must be the root (parent None)")
    stack = [0]
    for v in range(1, n):
        p = parent[v]
        if p is None:
            raise MalformedTree(f"vertex {v} is a second root")
        if not isinstance(p, int) or p < 0 or p >= v:
            raise MalformedTree(f"vertex {v} has parent {p!r}; parents must precede children")
        # in preorder the parent of v is on the rightmost path of vertices 0..v-1
        while stack and stack[-1] != p:
            stack.pop()
        if not stack:
            raise MalformedTree(f"vertex {v} breaks preorder (parent {p} already closed)")
        stack.append(v)


def _upper_bounds(parent: Sequence[Optional[int]]) -> tuple:
    upper = list(range(len(parent)))
    for v in range(len(parent) - 1, 0, -1):
        p = parent[v]
        if upper[v] > upper[p]:
            upper[p] = upper[v]
    return tuple(upper)


@dataclass(frozen=True)
class DatabaseTree:
    """An immutable database tree.  Build instances with :func:`build_tree`."""

    tid: int
    labels: tuple
    parent: tuple
    upper: tuple

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def scope(self) -> tuple:
        return tuple(Scope(v, u) for v, u in enumerate(self.upper))

    def scope_of(self, v: int) -> Scope:
        self._check(v)
        return Scope(v, self.upper[v])

    def children(self, v: int) -> list:
        self._check(v)
        out = []
        c = v + 1
        while c <= self.upper[v]:
            out.append(c)
            c = self.upper[c] + 1
        return out

    def preorder(self) -> range:
        return range(len(self.labels))

    def depth(self, v: int) -> int:
        self._check(v)
        d = 0
        while self.parent[v] is not None:
            v = self.parent[v]
            d += 1
        return d

    def _check(self, v) -> None:
        if not isinstance(v, int) or not 0 <= v < len(self.labels):
            raise InvalidVertex(f"vertex {v!r} not in tree {self.tid} of size {len(self.labels)}")


def build_tree(tid: int, labels: Sequence[int], parent: Sequence[Optional[int]]) -> DatabaseTree:
    """Validate parent links given in preorder and compute all scopes."""
    if len(labels) != len(parent):
        raise MalformedTree(f"{len(labels)} labels but {len(parent)} parent links")
    parent = tuple(parent)
    _check_preorder(parent)
    return DatabaseTree(int(tid), tuple(int(x) for x in labels), parent, _upper_bounds(parent))


def is_ancestor(t: DatabaseTree, u: int, v: int) -> bool:
    """True iff ``u`` is a proper ancestor of ``v``."""
    t._check(u)
    t._check(v)
    return u < v and t.upper[v] <= t.upper[u]


def is_right_relative(t: DatabaseTree, u: int, v: int) -> bool:
    """True iff ``v`` lies entirely to the right of ``u``'s subtree."""
    t._check(u)
    t._check(v)
    return t.upper[u] < v


def subtree_size(t: DatabaseTree, v: int) -> int:
    t._check(v)
    return t.upper[v] - v + 1


@dataclass(frozen=True)
class Pattern:
    """A small ordered tree grown one rightmost vertex at a time."""

    labels: tuple
    parent: tuple
    rightmost_path: tuple

    @classmethod
    def single(cls, label: int) -> "Pattern":
        return cls((int(label),), (None,), (0,))

    @classmethod
    def from_parents(cls, labels: Sequence[int], parent: Sequence[Optional[int]]) -> "Pattern":
        parent = tuple(parent)
        _check_preorder(parent)
        return cls(tuple(int(x) for x in labels), parent, _path_to_last(parent))

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def depth(self) -> int:
        """rdepth of the rightmost vertex."""
        return len(self.rightmost_path) - 1

    def prefix(self) -> "Pattern":
        """The pattern with its rightmost vertex removed."""
        if len(self.labels) < 2:
            raise ValueError("a single-vertex pattern has no prefix")
        parent = self.parent[:-1]
        return Pattern(self.labels[:-1], parent, _path_to_last(parent))


def _path_to_last(parent: tuple) -> tuple:
    path = [len(parent) - 1]
    while parent[path[-1]] is not None:
        path.append(parent[path[-1]])
    return tuple(reversed(path))


def rextend(p: Pattern, label: int, attach_rdepth: int) -> Pattern:
    """Attach a new rightmost vertex under the rightmost-path vertex at ``attach_rdepth``."""
    if not isinstance(attach_rdepth, int) or not 0 <= attach_rdepth <= p.depth:
        raise InvalidAttachPoint(
            f"rdepth {attach_rdepth!r} outside rightmost path of length {p.depth + 1}"
        )
    new = len(p.labels)
    anchor = p.rightmost_path[attach_rdepth]
    return Pattern(
        p.labels + (int(label),),
        p.parent + (anchor,),
        p.rightmost_path[: attach_rdepth + 1] + (new,),
    )


def construction_steps(p: Pattern) -> list:
    """``(label, attach_rdepth)`` steps that rebuild ``p`` from its root by :func:`rextend`."""
    steps = []
    path = [0]
    for v in range(1, len(p.labels)):
        r = path.index(p.parent[v])
        steps.append((p.labels[v], r))
        del path[r + 1:]
        path.append(v)
    return steps

"""Synthetic browsing-tree datasets.

A master tree of ``master_size`` vertices is grown by repeatedly attaching a
new last child to a uniformly chosen vertex that still has room (depth below
``max_depth`` and fewer than ``max_fanout`` children).  Labels are uniform
over ``range(n_labels)``.  Each dataset tree is then sampled from the master:
starting at the master root, every child of a kept vertex is kept
independently with probability ``keep_prob``.  All randomness comes from one
``numpy.random.Generator`` (PCG64) seeded with ``seed``.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from typing import TextIO

import numpy as np

from .encoding import Dataset, LabelDictionary
from .errors import InfeasibleShape
from .treecore import DatabaseTree, build_tree

__all__ = ["GenParams", "RNG_ALGORITHM", "GENERATOR_VERSION", "capacity", "generate",
           "generate_master", "write_metadata"]

RNG_ALGORITHM = "numpy.random.Generator(PCG64)"
GENERATOR_VERSION = "1"


@dataclass(frozen=True)
class GenParams:
    n_labels: int = 100
    master_size: int = 10_000
    max_fanout: int = 10
    max_depth: int = 10
    n_trees: int = 100_000
    seed: int = 0
    keep_prob: float = 0.5

    def __post_init__(self):
        for name in ("n_labels", "master_size", "max_fanout", "max_depth", "n_trees"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if not 0.0 <= self.keep_prob <= 1.0:
            raise ValueError("keep_prob must lie in [0, 1]")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit value")


def capacity(max_fanout: int, max_depth: int) -> int:
    """Largest number of vertices a tree of the given fanout and depth can hold."""
    if max_fanout == 1:
        return max_depth + 1
    return (max_fanout ** (max_depth + 1) - 1) // (max_fanout - 1)


def _grow_master(params: GenParams, rng: np.random.Generator):
    m = params.master_size
    if m > capacity(params.max_fanout, params.max_depth):
        raise InfeasibleShape(
            f"{m} vertices do not fit in fanout {params.max_fanout} and depth {params.max_depth}"
        )
    children = [[]]
    depth = [0]
    open_ = [0] if params.max_depth > 0 else []
    while len(children) < m:
        k = int(rng.integers(len(open_)))
        v = open_[k]
        c = len(children)
        children.append([])
        depth.append(depth[v] + 1)
        children[v].append(c)
        if len(children[v]) >= params.max_fanout:
            open_[k] = open_[-1]
            open_.pop()
        if depth[c] < params.max_depth:
            open_.append(c)
    labels = rng.integers(params.n_labels, size=m).tolist()
    return children, labels


def _preorder(children, labels, keep=None):
    out_labels, out_parent = [], []
    stack = [(0, None)]
    while stack:
        v, par = stack.pop()
        me = len(out_labels)
        out_labels.append(labels[v])
        out_parent.append(par)
        kids = children[v] if keep is None else [c for c in children[v] if keep()]
        for c in reversed(kids):
            stack.append((c, me))
    return out_labels, out_parent


def generate_master(params: GenParams) -> DatabaseTree:
    """The master tree alone (tid 0), in preorder."""
    rng = np.random.default_rng(params.seed)
    children, labels = _grow_master(params, rng)
    return build_tree(0, *_preorder(children, labels))


def generate(params: GenParams) -> Dataset:
    """Dataset of ``n_trees`` root-anchored subtrees of a random master tree."""
    rng = np.random.default_rng(params.seed)
    children, labels = _grow_master(params, rng)
    p = params.keep_prob
    # one uniform draw per considered child, consumed in preorder
    keep = lambda: rng.random() < p  # noqa: E731
    raw = [_preorder(children, labels, keep) for _ in range(params.n_trees)]
    dictionary = LabelDictionary.from_integers(x for lab, _ in raw for x in lab)
    code = {int(name): i for i, name in enumerate(dictionary.names)}
    trees = tuple(
        build_tree(tid, [code[x] for x in lab], par) for tid, (lab, par) in enumerate(raw)
    )
    return Dataset(trees, dictionary)


def write_metadata(params: GenParams, stream: TextIO) -> None:
    json.dump(
        {"params": asdict(params), "rng": RNG_ALGORITHM, "generator_version": GENERATOR_VERSION},
        stream,
        indent=2,
        sort_keys=True,
    )
    stream.write("\n")

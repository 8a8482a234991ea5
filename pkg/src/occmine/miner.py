"""Depth-first frequent embedded pattern miner.

Patterns are grown by rightmost-path extension.  A pattern is reported when
its support reaches ``minsup`` and the pattern obtained by deleting its
rightmost vertex was itself reported; only reported patterns are extended.
Candidates of a child are restricted to extensions that occurred at least
once for its parent; a pattern absent there is absent for every child too,
since deleting a leaf from an embedding leaves an embedding.  Occ-lists are
computed by :func:`~occmine.occindex.leaf_join` when the new
vertex hangs under the rightmost vertex and by
:func:`~occmine.occindex.inner_join` otherwise.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator, List, Optional, Sequence

from .encoding import Dataset, encode_pattern
from .occindex import CountMode, OccList, VertexTable, extension_counts, join, label_occlists
from .treecore import Pattern

__all__ = [
    "MinerConfig",
    "MinedPattern",
    "MinerStats",
    "mine",
    "enumerate_extensions",
    "prefix_class_key",
    "support_map",
]


@dataclass(frozen=True)
class MinerConfig:
    minsup: int
    class_merge: bool = False
    max_pattern_size: Optional[int] = None
    count_mode: CountMode = CountMode.PER_OCCURRENCE

    def __post_init__(self):
        if not isinstance(self.minsup, int) or self.minsup < 1:
            raise ValueError(f"minsup must be a positive integer, got {self.minsup!r}")
        if self.max_pattern_size is not None and self.max_pattern_size < 1:
            raise ValueError("max_pattern_size must be positive")
        object.__setattr__(self, "count_mode", CountMode(self.count_mode))


@dataclass(frozen=True)
class MinedPattern:
    pattern: Pattern
    support: int
    per_tree_support: int
    occ_entries: int
    max_multiplicity: int

    @property
    def occ_stats(self) -> tuple:
        return (self.occ_entries, self.max_multiplicity)


@dataclass
class MinerStats:
    candidates_generated: int = 0
    candidates_frequent: int = 0
    peak_occ_entries: int = 0
    # entries of occ-lists on the current DFS spine
    _live: int = field(default=0, repr=False)

    def _push(self, n: int) -> None:
        self._live += n
        if self._live > self.peak_occ_entries:
            self.peak_occ_entries = self._live

    def _pop(self, n: int) -> None:
        self._live -= n

    def merge(self, other: "MinerStats", base_live: int = 0) -> None:
        self.candidates_generated += other.candidates_generated
        self.candidates_frequent += other.candidates_frequent
        self.peak_occ_entries = max(self.peak_occ_entries, base_live + other.peak_occ_entries)


def prefix_class_key(p: Pattern) -> tuple:
    """Encoding of ``p`` without its rightmost vertex; equal keys mean same class."""
    return encode_pattern(p.prefix())


def enumerate_extensions(p: Pattern, labels: Sequence[int], class_members=None) -> List[tuple]:
    """Candidate ``(label, attach_rdepth)`` pairs for extending ``p``.

    Without ``class_members`` this is every label crossed with every rdepth
    ``0..depth``, labels outermost.  With ``class_members`` (a set of
    ``(label, rdepth)`` extensions of ``p``'s prefix, e.g. the frequent or
    the occurring ones), a candidate is kept only if the pattern obtained by
    deleting ``p``'s rightmost vertex from it is in that set.
    """
    d = p.depth
    if class_members is None or len(p) == 1:
        return [(lab, i) for lab in labels for i in range(d + 1)]
    last = d - 1  # rdepth in the prefix where p's rightmost vertex hangs
    out = []
    for lab in labels:
        for i in range(d + 1):
            need = (lab, i) if i <= last else (lab, last)
            if need in class_members:
                out.append((lab, i))
    return out


class _Run:
    def __init__(self, cfg: MinerConfig, singles: dict, table: VertexTable, backend):
        self.cfg = cfg
        self.singles = singles
        self.labels = sorted(singles)
        self.backend = backend
        self.table = table
        self.stats = MinerStats()

    def record(self, oc: OccList) -> MinedPattern:
        self.stats.candidates_frequent += 1
        return MinedPattern(oc.pattern, oc.support, oc.tree_support, len(oc), oc.max_multiplicity)

    def can_grow(self, p: Pattern) -> bool:
        cap = self.cfg.max_pattern_size
        return cap is None or len(p) < cap

    def extend(self, oc: OccList, members=None) -> Iterator[MinedPattern]:
        """Frequent descendants of ``oc.pattern`` in depth-first order.

        ``members`` holds the extensions of the parent pattern that passed
        its first sweep: the occurring ones by default, the frequent ones
        in class-merge mode.  The first sweep only counts each candidate;
        frequent children are materialised one at a time while recursing.
        """
        if not self.can_grow(oc.pattern):
            return
        minsup, mode = self.cfg.minsup, self.cfg.count_mode
        occurring, frequent = set(), []
        counts = {}
        for label, i in enumerate_extensions(oc.pattern, self.labels, members):
            self.stats.candidates_generated += 1
            if i not in counts:
                counts[i] = extension_counts(oc, i, self.table, self.backend)
            res = counts[i].get(label)
            if res.entries:
                occurring.add((label, i))
                if res.measure(mode) >= minsup:
                    frequent.append((label, i))
        passed = set(frequent) if self.cfg.class_merge else occurring
        for label, i in frequent:
            child = join(oc, self.singles[label], i, self.backend)
            self.stats._push(len(child))
            yield self.record(child)
            yield from self.extend(child, passed)
            self.stats._pop(len(child))

    def root_branch(self, label: int) -> Iterator[MinedPattern]:
        oc = self.singles[label]
        yield self.record(oc)
        yield from self.extend(oc)


def _setup(d: Dataset, cfg: MinerConfig, backend, stats: MinerStats):
    all_singles = label_occlists(d)
    mode = cfg.count_mode
    singles = {
        lab: oc
        for lab, oc in all_singles.items()
        if (oc.support if mode is CountMode.PER_OCCURRENCE else oc.tree_support) >= cfg.minsup
    }
    stats.candidates_generated += len(all_singles)
    base_live = sum(len(oc) for oc in singles.values())
    return singles, base_live


def _branch_worker(args):
    d, cfg, backend, label = args
    singles, _ = _setup(d, cfg, backend, MinerStats())
    run = _Run(cfg, singles, VertexTable.from_dataset(d), backend)
    patterns = list(run.root_branch(label))
    return patterns, run.stats


def mine(d: Dataset, cfg: MinerConfig, stats: Optional[MinerStats] = None, backend=None,
         workers: int = 1) -> Iterator[MinedPattern]:
    """Yield every frequent pattern of ``d`` once, in depth-first discovery order.

    ``stats`` (if given) is updated with candidate counts and the peak number
    of occ entries alive on the search spine, the frequent single-vertex
    occ-lists included.  ``workers > 1`` mines each top-level label branch in
    a separate process and yields results in the sequential order.
    """
    stats = stats if stats is not None else MinerStats()
    singles, base_live = _setup(d, cfg, backend, stats)
    labels = sorted(singles)
    if workers > 1 and len(labels) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            jobs = [(d, cfg, backend, lab) for lab in labels]
            for patterns, sub in pool.map(_branch_worker, jobs):
                stats.merge(sub, base_live)
                yield from patterns
        return
    run = _Run(cfg, singles, VertexTable.from_dataset(d), backend)
    run.stats = stats
    stats._push(base_live)
    for lab in labels:
        yield from run.root_branch(lab)
    stats._pop(base_live)


def support_map(results, count_mode=CountMode.PER_OCCURRENCE) -> dict:
    """``{pattern tokens: support}`` for a stream of :class:`MinedPattern`."""
    mode = CountMode(count_mode)
    return {
        encode_pattern(r.pattern): (r.support if mode is CountMode.PER_OCCURRENCE else r.per_tree_support)
        for r in results
    }

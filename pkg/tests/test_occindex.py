import random
from collections import Counter
from itertools import combinations
from math import comb

import numpy as np
import pytest

from occmine.encoding import Dataset, LabelDictionary
from occmine.errors import CountOverflow, InvalidAttachPoint
from occmine.occindex import (
    CountMode,
    Occ,
    JoinCount,
    OccList,
    count_join,
    initial_occlists,
    inner_join,
    join,
    label_occlists,
    leaf_join,
    occlist_of,
    per_tree_support,
    support,
)
from occmine.oracle import enumerate_embeddings
from occmine.treecore import Pattern, Scope, build_tree, rextend

from conftest import dataset_from_strings, random_dataset

A, B, C = 0, 1, 2


def star(n):
    t = build_tree(0, [0] * n, [None] + [0] * (n - 1))
    return Dataset((t,), LabelDictionary(("a",)))


def path_tree(n):
    t = build_tree(0, [0] * n, [None] + list(range(n - 1)))
    return Dataset((t,), LabelDictionary(("a",)))


def star_pattern(k):
    return Pattern.from_parents([0] * k, [None] + [0] * (k - 1))


def path_pattern(k):
    return Pattern.from_parents([0] * k, [None] + list(range(k - 1)))


def test_initial_lists():
    d = dataset_from_strings("ab", "a b -1 b")
    lists = initial_occlists(d, 1)
    ob = lists[B]
    assert [o.multiplicity for o in ob.entries] == [1, 1]
    assert support(ob) == 2
    assert [o.rp for o in ob.entries] == [(1,), (2,)]
    assert initial_occlists(d, 3) == {}


def test_initial_lists_threshold_modes():
    d = dataset_from_strings("ab", "a b -1 b", "b")
    assert sorted(initial_occlists(d, 2)) == [B]
    assert sorted(initial_occlists(d, 2, CountMode.PER_TREE)) == [B]
    assert sorted(initial_occlists(d, 1, CountMode.PER_TREE)) == [A, B]
    with pytest.raises(ValueError):
        initial_occlists(d, 0)


@pytest.mark.parametrize("seed", range(10))
def test_initial_support_is_label_count(seed):
    d = random_dataset(seed)
    counts = Counter(x for t in d.trees for x in t.labels)
    lists = initial_occlists(d, 1)
    assert {lab: oc.support for lab, oc in lists.items()} == dict(counts)
    for oc in lists.values():
        assert all(o.multiplicity == 1 for o in oc.entries)


def test_leaf_join_single_edge(backend):
    d = dataset_from_strings("ab", "a b")
    s = label_occlists(d)
    oc = leaf_join(s[A], s[B], backend)
    assert oc.entries == [Occ(0, Scope(1, 1), (1, 1), 1, (0, 1))]
    assert oc.support == 1
    assert oc.pattern == Pattern.from_parents([A, B], [None, 0])


def test_leaf_join_star_has_no_depth_two(backend):
    s = label_occlists(star(5))
    aa = leaf_join(s[0], s[0], backend)
    assert aa.support == 4
    assert len(leaf_join(aa, s[0], backend)) == 0


def test_inner_join_forced(backend):
    d = dataset_from_strings("abc", "a b -1 c")
    s = label_occlists(d)
    ab = leaf_join(s[A], s[B], backend)
    assert ab.entries[0].rp == (2, 1)
    abc = inner_join(ab, s[C], 0, backend)
    assert abc.entries == [Occ(0, Scope(2, 2), (2, 2), 1, (0, 2))]


def test_inner_join_merges_group(backend):
    d = dataset_from_strings("abc", "a b -1 b -1 c")
    s = label_occlists(d)
    ab = leaf_join(s[A], s[B], backend)
    assert [o.rp for o in ab.entries] == [(3, 1), (3, 2)]
    abc = inner_join(ab, s[C], 0, backend)
    assert [(o.rp, o.multiplicity) for o in abc.entries] == [((3, 3), 2)]
    p = Pattern.from_parents([A, B, C], [None, 0, 0])
    assert len(enumerate_embeddings(p, d.trees[0])) == 2


def test_inner_join_sums_member_multiplicities(backend):
    # a(b,b) has occs rp=[4,2] (x1) and rp=[4,3] (x2); both share rp[0]
    d = dataset_from_strings("abc", "a b -1 b -1 b -1 c")
    s = label_occlists(d)
    abb = inner_join(leaf_join(s[A], s[B], backend), s[B], 0, backend)
    assert [(o.rp, o.multiplicity) for o in abb.entries] == [((4, 2), 1), ((4, 3), 2)]
    out = inner_join(abb, s[C], 0, backend)
    assert [(o.rp, o.multiplicity) for o in out.entries] == [((4, 4), 3)]
    assert out.support == len(enumerate_embeddings(out.pattern, d.trees[0])) == comb(3, 2)


def test_inner_join_bad_rdepth():
    s = label_occlists(dataset_from_strings("ab", "a b"))
    ab = leaf_join(s[A], s[B])
    with pytest.raises(InvalidAttachPoint):
        inner_join(ab, s[B], 1)
    with pytest.raises(InvalidAttachPoint):
        inner_join(s[A], s[B], 0)


def test_join_operand_must_be_single_vertex():
    s = label_occlists(dataset_from_strings("ab", "a b"))
    ab = leaf_join(s[A], s[B])
    with pytest.raises(ValueError):
        leaf_join(s[A], ab)


def test_empty_support():
    empty = OccList(Pattern.single(0), [], np.empty((0, 1)), np.empty((0, 1)), [])
    assert support(empty) == 0
    assert per_tree_support(empty) == 0
    assert empty.dump() == ""


def test_dump_format():
    s = label_occlists(dataset_from_strings("ab", "a b"))
    assert leaf_join(s[A], s[B]).dump() == "0 1 1 1 1 1\n"


@pytest.mark.parametrize("n,k", [(5, 3), (9, 5), (13, 7), (8, 3)])
def test_star_family(n, k, backend):
    oc = occlist_of(star(n), star_pattern(k), backend)
    expected = [Occ(0, Scope(i, i), (n - 1, i), comb(i - 1, k - 2), (0, i)) for i in range(k - 1, n)]
    assert oc.entries == expected
    assert support(oc) == comb(n - 1, k - 1)


@pytest.mark.parametrize("n,k", [(4, 2), (6, 3), (8, 4), (7, 7)])
def test_path_family(n, k, backend):
    oc = occlist_of(path_tree(n), path_pattern(k), backend)
    assert len(oc) == comb(n, k)
    assert all(o.multiplicity == 1 and o.rp == (n - 1,) * k for o in oc.entries)
    assert sorted(o.path for o in oc.entries) == list(combinations(range(n), k))


def fabricated(pattern, rows):
    return OccList.from_entries(pattern, [Occ(0, Scope(p[-1], r[-1]), r, m, p) for p, r, m in rows])


def test_inner_join_overflow(backend):
    # input sums to 2**64 - 1; two c vertices each receive the full group sum
    d = dataset_from_strings("abc", "a b -1 b -1 c -1 c")
    s = label_occlists(d)
    ab = Pattern.from_parents([A, B], [None, 0])
    oc = fabricated(ab, [((0, 1), (4, 1), 2**63), ((0, 2), (4, 2), 2**63 - 1)])
    with pytest.raises(CountOverflow) as info:
        inner_join(oc, s[C], 0, backend)
    assert info.value.pattern == rextend(ab, C, 0)


def test_leaf_join_support_overflow(backend):
    d = dataset_from_strings("ab", "a b -1 b")
    s = label_occlists(d)
    oc = fabricated(Pattern.single(A), [((0,), (2,), 2**63)])
    with pytest.raises(CountOverflow):
        leaf_join(oc, s[B], backend)


def test_max_counter_without_overflow(backend):
    d = dataset_from_strings("abc", "a b -1 b -1 c")
    s = label_occlists(d)
    ab = Pattern.from_parents([A, B], [None, 0])
    oc = fabricated(ab, [((0, 1), (3, 1), 2**64 - 2), ((0, 2), (3, 2), 1)])
    out = inner_join(oc, s[C], 0, backend)
    assert out.support == 2**64 - 1


def random_pattern(rng, max_size, n_labels):
    p = Pattern.single(rng.randrange(n_labels))
    for _ in range(rng.randint(0, max_size - 1)):
        p = rextend(p, rng.randrange(n_labels), rng.randint(0, p.depth))
    return p


def test_bridge_to_embeddings(backend):
    """Grouping oracle embeddings by rightmost-path image reproduces the occ-list."""
    rng = random.Random(7)
    checked = 0
    for seed in range(40):
        d = random_dataset(seed, n_trees=6, max_vertices=12, n_labels=2)
        for _ in range(15):
            p = random_pattern(rng, 5, 2)
            oc = occlist_of(d, p, backend)
            groups = Counter()
            for t in d.trees:
                for e in enumerate_embeddings(p, t):
                    groups[(t.tid, tuple(e.map[v] for v in p.rightmost_path))] += 1
            got = {(o.tid, o.path): o.multiplicity for o in oc.entries}
            assert got == dict(groups)
            assert oc.support == sum(groups.values())
            assert oc.tree_support == len({tid for tid, _ in groups})
            for o in oc.entries:
                t = d.trees[o.tid]
                assert o.rp == tuple(t.upper[v] for v in o.path)
                assert all(x >= y for x, y in zip(o.rp, o.rp[1:]))
                assert o.rp[-1] == o.scope.u and o.path[-1] == o.scope.l
            keys = [(o.tid, o.path) for o in oc.entries]
            assert keys == sorted(keys) and len(set(keys)) == len(keys)
            checked += oc.support > 0
    assert checked > 50


def test_backends_agree_on_random_joins():
    from occmine._backend import available_backends

    names = sorted(available_backends())
    if len(names) < 2:
        pytest.skip("compiled kernels not built")
    rng = random.Random(5)
    for seed in range(30):
        d = random_dataset(seed, n_trees=10, max_vertices=12, n_labels=2)
        for _ in range(10):
            p = random_pattern(rng, 6, 2)
            a, b = (occlist_of(d, p, name) for name in names)
            assert a.dump() == b.dump()
            assert (a.support, a.tree_support) == (b.support, b.tree_support)
            assert np.array_equal(a.path, b.path)


def test_inputs_not_mutated(backend):
    d = random_dataset(1, n_trees=5, max_vertices=10, n_labels=2)
    s = label_occlists(d)
    oc = leaf_join(s[0], s[1], backend)
    before = oc.dump()
    inner_join(oc, s[0], 0, backend)
    leaf_join(oc, s[1], backend)
    assert oc.dump() == before
    assert not oc.mult.flags.writeable


def test_count_join_matches_join(backend):
    rng = random.Random(13)
    for seed in range(25):
        d = random_dataset(seed, n_trees=8, max_vertices=12, n_labels=2)
        singles = label_occlists(d)
        for _ in range(10):
            oc = occlist_of(d, random_pattern(rng, 5, 2), backend)
            for lab, ocv in singles.items():
                for i in range(oc.pattern.depth + 1):
                    full = join(oc, ocv, i, backend)
                    assert count_join(oc, ocv, i, backend) == JoinCount(len(full), full.support, full.tree_support)


def test_count_join_overflow(backend):
    d = dataset_from_strings("abc", "a b -1 b -1 c -1 c")
    s = label_occlists(d)
    ab = Pattern.from_parents([A, B], [None, 0])
    oc = fabricated(ab, [((0, 1), (4, 1), 2**63), ((0, 2), (4, 2), 2**63 - 1)])
    with pytest.raises(CountOverflow) as info:
        count_join(oc, s[C], 0, backend)
    assert info.value.pattern == rextend(ab, C, 0)
    star = fabricated(Pattern.single(A), [((0,), (6,), 2**63)])
    with pytest.raises(CountOverflow):
        count_join(star, s[B], 0, backend)
    with pytest.raises(InvalidAttachPoint):
        count_join(star, s[B], 1, backend)

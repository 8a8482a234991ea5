import io
import json

import pytest

from occmine.encoding import write_dataset
from occmine.errors import InfeasibleShape
from occmine.synthgen import GENERATOR_VERSION, RNG_ALGORITHM, GenParams, capacity, generate, generate_master, \
    write_metadata

SMALL = GenParams(n_labels=5, master_size=60, max_fanout=4, max_depth=5, n_trees=40, seed=3)


def shape(t):
    depth = [0] * len(t)
    fanout = [0] * len(t)
    for v, p in enumerate(t.parent):
        if p is not None:
            depth[v] = depth[p] + 1
            fanout[p] += 1
    return max(depth), max(fanout)


def test_capacity():
    assert capacity(1, 4) == 5
    assert capacity(2, 2) == 7
    assert capacity(10, 10) == (10**11 - 1) // 9


def test_master_shape():
    m = generate_master(SMALL)
    assert len(m) == SMALL.master_size
    depth, fanout = shape(m)
    assert depth <= SMALL.max_depth and fanout <= SMALL.max_fanout
    assert all(0 <= x < SMALL.n_labels for x in m.labels)


def test_full_master_fits_exactly():
    m = generate_master(GenParams(master_size=15, max_fanout=2, max_depth=3, n_trees=1))
    assert shape(m) == (3, 2)


def test_infeasible_shape():
    with pytest.raises(InfeasibleShape):
        generate(GenParams(master_size=16, max_fanout=2, max_depth=3, n_trees=1))


@pytest.mark.parametrize("field, value", [("n_trees", 0), ("master_size", 0), ("keep_prob", 1.5), ("seed", -1)])
def test_param_validation(field, value):
    kwargs = {field: value}
    with pytest.raises(ValueError):
        GenParams(**kwargs)


def test_deterministic():
    a, b = generate(SMALL), generate(SMALL)
    assert write_dataset(a) == write_dataset(b)
    c = generate(GenParams(**{**SMALL.__dict__, "seed": 4}))
    assert write_dataset(c) != write_dataset(a)


def test_trees_bounded_by_master():
    d = generate(SMALL)
    assert len(d.trees) == SMALL.n_trees
    assert [t.tid for t in d.trees] == list(range(SMALL.n_trees))
    root_label = generate_master(SMALL).labels[0]
    root_name = str(root_label)
    for t in d.trees:
        assert 1 <= len(t) <= SMALL.master_size
        depth, fanout = shape(t)
        assert depth <= SMALL.max_depth and fanout <= SMALL.max_fanout
        assert d.labels.name_of(t.labels[0]) == root_name


def test_keep_prob_extremes():
    full = generate(GenParams(**{**SMALL.__dict__, "keep_prob": 1.0, "n_trees": 3}))
    master = generate_master(SMALL)
    for t in full.trees:
        assert t.parent == master.parent
        assert [int(full.labels.name_of(x)) for x in t.labels] == list(master.labels)
    bare = generate(GenParams(**{**SMALL.__dict__, "keep_prob": 0.0, "n_trees": 3}))
    assert all(len(t) == 1 for t in bare.trees)


def test_metadata():
    buf = io.StringIO()
    write_metadata(SMALL, buf)
    meta = json.loads(buf.getvalue())
    assert meta["params"]["seed"] == 3
    assert meta["rng"] == RNG_ALGORITHM
    assert meta["generator_version"] == GENERATOR_VERSION
    assert GenParams(**meta["params"]) == SMALL

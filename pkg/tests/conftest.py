import random

import pytest
from hypothesis import strategies as st

from occmine._backend import available_backends
from occmine.encoding import Dataset, LabelDictionary
from occmine.treecore import build_tree


def random_parents(rng: random.Random, n: int) -> list:
    """Parent links of a uniformly grown ordered tree, already in preorder."""
    parent = [None]
    stack = [0]
    for v in range(1, n):
        k = rng.randrange(len(stack))
        parent.append(stack[k])
        del stack[k + 1:]
        stack.append(v)
    return parent


def random_tree(rng: random.Random, tid: int, max_vertices: int, n_labels: int):
    n = rng.randint(1, max_vertices)
    return build_tree(tid, [rng.randrange(n_labels) for _ in range(n)], random_parents(rng, n))


def random_dataset(seed: int, n_trees: int = 20, max_vertices: int = 10, n_labels: int = 3) -> Dataset:
    rng = random.Random(seed)
    trees = tuple(random_tree(rng, tid, max_vertices, n_labels) for tid in range(n_trees))
    return Dataset(trees, LabelDictionary(tuple("abcdefghij"[:n_labels])))


def letters(*names) -> LabelDictionary:
    return LabelDictionary(tuple(names))


def tree_from_tokens(tid: int, text: str, dictionary: LabelDictionary):
    """Build a tree from a space-separated label/-1 string such as ``'a b -1 c'``."""
    labels, parent, stack = [], [], []
    for tok in text.split():
        if tok == "-1":
            stack.pop()
            continue
        parent.append(stack[-1] if stack else None)
        stack.append(len(labels))
        labels.append(dictionary.id_of(tok))
    return build_tree(tid, labels, parent)


def dataset_from_strings(names, *trees) -> Dataset:
    dictionary = letters(*names)
    return Dataset(tuple(tree_from_tokens(i, s, dictionary) for i, s in enumerate(trees)), dictionary)


@st.composite
def trees(draw, max_vertices=12, n_labels=3):
    n = draw(st.integers(1, max_vertices))
    parent = [None]
    depth_stack = [0]
    for v in range(1, n):
        k = draw(st.integers(0, len(depth_stack) - 1))
        parent.append(depth_stack[k])
        del depth_stack[k + 1:]
        depth_stack.append(v)
    labels = draw(st.lists(st.integers(0, n_labels - 1), min_size=n, max_size=n))
    return build_tree(0, labels, parent)


@pytest.fixture(params=sorted(available_backends()))
def backend(request):
    return request.param


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = mod.summary_lines() if mod is not None else []
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)

"""Line-oriented tree database format and pattern strings.

A dataset line is ``<tid> <tid> <n> <tok_1> ... <tok_n>``: the first token is
the root label, every further nonnegative token opens a child of the current
vertex and ``-1`` moves back to the parent.  External labels are integers;
internally they are re-coded to dense ids ``0..L-1`` in ascending numeric
order so that id order and external order agree.
"""
from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence, TextIO, Union

from .errors import BadToken, DuplicateTid, ParseError, UnbalancedBacktrack
from .treecore import DatabaseTree, Pattern, build_tree

UP = -1

__all__ = [
    "UP",
    "LabelDictionary",
    "Dataset",
    "parse_dataset",
    "write_dataset",
    "encode_pattern",
    "decode_pattern",
    "format_pattern",
    "parse_pattern",
    "load_label_names",
]


@dataclass(frozen=True)
class LabelDictionary:
    """Bijection between external label strings and dense internal ids."""

    names: tuple = ()
    _index: dict = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        index = {name: i for i, name in enumerate(self.names)}
        if len(index) != len(self.names):
            raise ValueError("label names must be distinct")
        object.__setattr__(self, "_index", index)

    @classmethod
    def from_integers(cls, values: Iterable[int]) -> "LabelDictionary":
        return cls(tuple(str(v) for v in sorted(set(int(v) for v in values))))

    def __len__(self) -> int:
        return len(self.names)

    def id_of(self, name) -> int:
        try:
            return self._index[str(name)]
        except KeyError:
            raise KeyError(f"unknown label {name!r}") from None

    def name_of(self, label: int) -> str:
        return self.names[label]


@dataclass(frozen=True)
class Dataset:
    trees: tuple = ()
    labels: LabelDictionary = LabelDictionary()

    def __post_init__(self):
        tids = [t.tid for t in self.trees]
        if len(set(tids)) != len(tids):
            raise DuplicateTid("tree ids must be unique")
        if tids != sorted(tids):
            object.__setattr__(self, "trees", tuple(sorted(self.trees, key=lambda t: t.tid)))
        n = len(self.labels)
        for t in self.trees:
            if any(not 0 <= x < n for x in t.labels):
                raise ValueError(f"tree {t.tid} uses a label outside the dictionary")

    def __len__(self) -> int:
        return len(self.trees)

    @property
    def vertex_count(self) -> int:
        return sum(len(t) for t in self.trees)


def _tokens_to_parents(tokens: Sequence[int], line=None):
    labels, parent = [], []
    stack = []
    for tok in tokens:
        if tok == UP:
            if len(stack) <= 1:
                raise UnbalancedBacktrack("backtrack above the root", line)
            stack.pop()
        elif tok < 0:
            raise BadToken(f"negative label {tok}", line)
        else:
            if stack:
                parent.append(stack[-1])
            elif labels:
                raise UnbalancedBacktrack("second root in one tree", line)
            else:
                parent.append(None)
            stack.append(len(labels))
            labels.append(tok)
    if not labels:
        raise BadToken("empty tree", line)
    return labels, parent


def _as_int(tok: str, line: int, what: str) -> int:
    try:
        return int(tok)
    except ValueError:
        raise BadToken(f"{what} {tok!r} is not an integer", line) from None


def parse_dataset(source: Union[TextIO, str, Iterable[str]], strict_tid: bool = True) -> Dataset:
    """Parse a dataset from a text stream, a string or an iterable of lines.

    With ``strict_tid`` the two leading integers of a line must agree;
    otherwise the first one is used as the tree id.
    """
    if isinstance(source, str):
        source = io.StringIO(source)
    raw = []
    seen = {}
    for lineno, text in enumerate(source, 1):
        parts = text.split()
        if not parts:
            continue
        if len(parts) < 4:
            raise BadToken("expected '<tid> <tid> <n> <tokens...>'", lineno)
        tid = _as_int(parts[0], lineno, "tid")
        tid2 = _as_int(parts[1], lineno, "tid")
        n = _as_int(parts[2], lineno, "token count")
        if tid < 0:
            raise BadToken(f"negative tid {tid}", lineno)
        if strict_tid and tid != tid2:
            raise BadToken(f"tid fields differ ({tid} != {tid2})", lineno)
        toks = [_as_int(t, lineno, "token") for t in parts[3:]]
        if n != len(toks):
            raise BadToken(f"token count {n} but {len(toks)} tokens present", lineno)
        if toks[0] == UP:
            raise UnbalancedBacktrack("first token must be a label", lineno)
        if tid in seen:
            raise DuplicateTid(f"tid {tid} already defined on line {seen[tid]}", lineno)
        seen[tid] = lineno
        labels, parent = _tokens_to_parents(toks, lineno)
        raw.append((tid, labels, parent))

    dictionary = LabelDictionary.from_integers(x for _, labels, _ in raw for x in labels)
    code = {int(name): i for i, name in enumerate(dictionary.names)}
    trees = [build_tree(tid, [code[x] for x in labels], parent) for tid, labels, parent in raw]
    return Dataset(tuple(sorted(trees, key=lambda t: t.tid)), dictionary)


def _tree_tokens(labels: Sequence, parent: Sequence) -> list:
    out = []
    stack = []
    for v, lab in enumerate(labels):
        if v:
            while stack[-1] != parent[v]:
                stack.pop()
                out.append(UP)
        out.append(lab)
        stack.append(v)
    return out


def write_dataset(d: Dataset, stream: Optional[TextIO] = None) -> str:
    """Write ``d`` in canonical form (trailing backtracks elided)."""
    lines = []
    for t in d.trees:
        toks = [x if x == UP else d.labels.name_of(x) for x in _tree_tokens(t.labels, t.parent)]
        lines.append(f"{t.tid} {t.tid} {len(toks)} " + " ".join(str(x) for x in toks) + "\n")
    text = "".join(lines)
    if stream is not None:
        stream.write(text)
    return text


def encode_pattern(p: Pattern) -> tuple:
    """Preorder label/``-1`` token stream of ``p`` with trailing ``-1``s dropped."""
    return tuple(_tree_tokens(p.labels, p.parent))


def decode_pattern(tokens: Sequence) -> Pattern:
    try:
        toks = [int(t) for t in tokens]
    except (TypeError, ValueError):
        raise BadToken(f"non-integer token in {list(tokens)!r}") from None
    if not toks:
        raise BadToken("empty pattern")
    if toks[0] == UP:
        raise UnbalancedBacktrack("pattern must start with a label")
    labels, parent = _tokens_to_parents(toks)
    return Pattern.from_parents(labels, parent)


def format_pattern(p: Pattern, labels: Optional[LabelDictionary] = None,
                   names: Optional[Mapping[str, str]] = None) -> str:
    """Space-separated pattern string using external labels when available."""
    out = []
    for tok in encode_pattern(p):
        if tok == UP:
            out.append("-1")
            continue
        s = labels.name_of(tok) if labels is not None else str(tok)
        out.append(names.get(s, s) if names else s)
    return " ".join(out)


def parse_pattern(text: str, labels: Optional[LabelDictionary] = None) -> Pattern:
    toks = []
    for tok in text.split():
        if tok == "-1":
            toks.append(UP)
        elif labels is not None:
            toks.append(labels.id_of(tok))
        else:
            toks.append(tok)
    return decode_pattern(toks)


def load_label_names(source: Union[TextIO, str]) -> dict:
    """Read ``<token>\\t<display name>`` lines into a mapping."""
    if isinstance(source, str):
        source = io.StringIO(source)
    names = {}
    for lineno, text in enumerate(source, 1):
        text = text.rstrip("\r\n")
        if not text.strip():
            continue
        tok, sep, name = text.partition("\t")
        if not sep:
            raise ParseError("expected '<token>\\t<name>'", lineno)
        names[tok.strip()] = name
    return names

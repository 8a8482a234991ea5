"""Frequent embedded tree pattern mining over compressed occurrence lists."""
from ._backend import BACKEND
from .encoding import Dataset, LabelDictionary, parse_dataset, write_dataset
from .errors import CountOverflow, ExplosionGuard, OccMineError
from .treecore import DatabaseTree, Pattern, Scope, build_tree, rextend

__version__ = "0.1.0"

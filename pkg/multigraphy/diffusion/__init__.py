from ._tree import IDENTITY
from ._tree import DiffusionTree
from ._tree import generate_pruned_tree
from ._tree import pruned_witness
from ._tree import split_homogeneous
from ._tree import verify_pruning_bound
from ._tree import word_from_str
from ._tree import word_operator
from ._tree import word_to_str

__all__ = [
    "IDENTITY",
    "DiffusionTree",
    "generate_pruned_tree",
    "pruned_witness",
    "split_homogeneous",
    "verify_pruning_bound",
    "word_from_str",
    "word_operator",
    "word_to_str",
]

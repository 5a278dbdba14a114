from ._filter import MimoFilter
from ._filter import MultigraphFilter
from ._filter import apply_filter
from ._filter import apply_mimo
from ._filter import compose_filters
from ._filter import diffuse
from ._filter import diffuse_adjoint
from ._filter import filter_matrix
from ._filter import is_shift_invariant
from ._filter import mimo_convolve
from ._io import filter_from_dict
from ._io import filter_to_dict
from ._io import load_filter
from ._io import save_filter

__all__ = [
    "MimoFilter",
    "MultigraphFilter",
    "apply_filter",
    "apply_mimo",
    "compose_filters",
    "diffuse",
    "diffuse_adjoint",
    "filter_from_dict",
    "filter_matrix",
    "filter_to_dict",
    "is_shift_invariant",
    "load_filter",
    "mimo_convolve",
    "save_filter",
]

from ._core import Multigraph
from ._core import Permutation
from ._core import ShiftOperator
from ._core import as_features
from ._core import as_signal
from ._core import build_shift_operator
from ._core import commutator_norm
from ._core import permute
from ._core import spectral_normalize
from ._linalg import spectral_norm

__all__ = [
    "Multigraph",
    "Permutation",
    "ShiftOperator",
    "as_features",
    "as_signal",
    "build_shift_operator",
    "commutator_norm",
    "permute",
    "spectral_norm",
    "spectral_normalize",
]

from ._jbd import JointBlockDecomposition
from ._jbd import commutant_basis
from ._jbd import filter_spectral_response
from ._jbd import fourier_transform
from ._jbd import inverse_fourier
from ._jbd import joint_block_diagonalize
from ._jbd import verify_filtering_spectral_theorem

__all__ = [
    "JointBlockDecomposition",
    "commutant_basis",
    "filter_spectral_response",
    "fourier_transform",
    "inverse_fourier",
    "joint_block_diagonalize",
    "verify_filtering_spectral_theorem",
]

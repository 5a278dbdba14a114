from .main import as_generator
from .main import first_non_finite
from .main import num_of_samples

__all__ = ["as_generator", "first_non_finite", "num_of_samples"]

import numbers

import numpy as np


def num_of_samples(X):
    if hasattr(X, "__len__"):
        return len(X)


def as_generator(seed):
    """Return a ``numpy.random.Generator`` for ``seed``.

    ``seed`` may be None, an integer or an existing Generator, which is
    returned as is so callers can thread one stream through several steps.
    """
    if isinstance(seed, np.random.Generator):
        return seed
    if seed is not None and not isinstance(seed, numbers.Integral):
        raise TypeError(
            f"seed should be an int or a numpy Generator. Received {seed} of"
            f" type {type(seed)}"
        )
    return np.random.default_rng(seed)


def first_non_finite(named_arrays):
    """Name of the first array in ``named_arrays`` holding a NaN or inf."""
    for name, value in named_arrays:
        if not np.all(np.isfinite(value)):
            return name
    return None

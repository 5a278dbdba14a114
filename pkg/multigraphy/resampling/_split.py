import numbers

import numpy as np

from ..utils import as_generator
from ..utils import num_of_samples


class Split:
    """Seeded train/test splitting of signal datasets.

    Private Methods
    ---------------

    __validate_input() : validates input received by train_test_split()

    Public Methods
    --------------

    train_test_split() : Splits input data into train and test sets

    """

    def __init__(self):
        self.X = None
        self.y = None
        self.test_size = None
        self.train_size = None
        self.random_state = 69

    def __validate_input(self):
        """Function to validate inputs received by train_test_split

        Parameters
        ----------

        X : ndarray of shape (n_samples, ...)
            Signals, one per sample along the first axis.

        y : ndarray of shape (n_samples,)
            Labels. May be None.

        test_size : float or int
            Fraction in (0, 1) or number of test samples. Complementary to
            train size.

        train_size : float or int
            Fraction in (0, 1) or number of train samples. Complementary to
            test size.

        random_state : int or numpy Generator
            Seeding to be provided for shuffling before splitting.

        """

        if self.X is None:
            raise ValueError("Signals should not be None")

        if not isinstance(self.X, np.ndarray):
            raise TypeError(
                "Signals are not a valid array.\nExpected object type:"
                f" numpy.ndarray, got {type(self.X)}"
            )

        n_samples = num_of_samples(self.X)

        if self.y is not None:
            if not isinstance(self.y, np.ndarray):
                raise TypeError(
                    "Labels are not a valid array.\nExpected object type:"
                    f" numpy.ndarray, got {type(self.y)}"
                )
            if n_samples != self.y.shape[0]:
                raise ValueError(
                    "Number of labels and signals unequal.\nSignals:"
                    f" {n_samples}\nLabels: {self.y.shape[0]}"
                )

        for name in ("test_size", "train_size"):
            value = getattr(self, name)
            if value is not None and (
                isinstance(value, bool) or not isinstance(value, numbers.Real)
            ):
                raise TypeError(f"{name} must be of type int or float")

        if self.test_size is not None and self.train_size is not None:
            if isinstance(self.test_size, float) != isinstance(
                self.train_size, float
            ):
                raise TypeError(
                    "Data types of test_size and train_size do not"
                    f" match.\ntest_size: {type(self.test_size)}.\ntrain_size:"
                    f" {type(self.train_size)}"
                )
            if (
                isinstance(self.test_size, float)
                and abs(self.test_size + self.train_size - 1) > 1e-12
            ):
                raise ValueError("test_size + train_size should be equal to 1")
            elif (
                not isinstance(self.test_size, float)
                and self.test_size + self.train_size != n_samples
            ):
                raise ValueError(
                    "test_size + train_size not equal to number of samples"
                )

        elif self.test_size is not None:
            self.__check_size("test_size", n_samples)

        elif self.train_size is not None:
            self.__check_size("train_size", n_samples)
            self.test_size = (
                1 - self.train_size
                if isinstance(self.train_size, float)
                else n_samples - self.train_size
            )

        else:
            self.test_size = 0.2

        if not isinstance(
            self.random_state, (numbers.Integral, np.random.Generator)
        ):
            raise TypeError(
                "random_state should be of type int or numpy Generator"
            )

    def __check_size(self, name, n_samples):
        value = getattr(self, name)
        if isinstance(value, float) and not 0 <= value <= 1:
            raise ValueError(f"{name} should be between 0 and 1")
        if not isinstance(value, float) and not 0 <= value <= n_samples:
            raise ValueError(f"{name} should be between 0 and {n_samples}")

    def train_test_split(self, params):
        """Performs train test split on the input data

        Reads ``X``, ``y``, ``test_size``, ``train_size`` and
        ``random_state`` from ``params`` and stores ``X_train``,
        ``X_test``, ``y_train`` and ``y_test`` back into it (labels are
        None without ``y``).

        Returns
        -------

        (train_idx, test_idx) : ndarray
            Sample indices of the two sets.

        """

        if "X" in params.keys():
            self.X = params["X"]
        if "y" in params.keys():
            self.y = params["y"]
        if "test_size" in params.keys():
            self.test_size = params["test_size"]
        if "train_size" in params.keys():
            self.train_size = params["train_size"]
        if "random_state" in params.keys():
            self.random_state = params["random_state"]

        self.__validate_input()

        n_samples = num_of_samples(self.X)
        order = as_generator(self.random_state).permutation(n_samples)
        if isinstance(self.test_size, float):
            index = int(self.test_size * n_samples)
        else:
            index = int(self.test_size)
        test_idx = order[:index]
        train_idx = order[index:]

        params["X_train"] = self.X[train_idx]
        params["X_test"] = self.X[test_idx]
        params["y_train"] = None if self.y is None else self.y[train_idx]
        params["y_test"] = None if self.y is None else self.y[test_idx]
        return train_idx, test_idx

import errno
import os

import numpy as np
import pandas as pd

from ..exceptions import ArgumentsError
from ..exceptions import ParseError
from ..multigraph import Multigraph
from ..multigraph import ShiftOperator
from ..multigraph import spectral_normalize

NORMALIZATIONS = ("none", "spectral")


def _check_path(file_path):
    if type(file_path) is not str:
        raise TypeError(
            f"Argument file_path should be of str type. Received"
            f" {type(file_path)}"
        )
    if not os.path.isfile(file_path):
        raise FileNotFoundError(
            errno.ENOENT, os.strerror(errno.ENOENT), file_path
        )


def _parse_int(token, line, what):
    try:
        return int(token)
    except ValueError:
        raise ParseError(f"{what} should be an integer, got {token!r}", line)


def load_multigraph(file_path, normalization="none"):
    """Read a multigraph from the edge-list format.

    The first non-empty, non-``#`` line is the header ``<N> <m>``; every
    following such line is ``<class> <src> <dst> <weight>`` with 0-based
    integer ids. Edges of one class accumulate.

    Parameters
    ----------

    file_path : str

    normalization : str, default="none"
        "spectral" divides each operator by its largest singular value.

    Returns
    -------

    multigraph : Multigraph with ``m`` adjacency operators.

    """
    _check_path(file_path)
    if normalization not in NORMALIZATIONS:
        raise ArgumentsError(
            f"Allowed values for normalization are {NORMALIZATIONS}, got"
            f" {normalization}"
        )

    n_nodes = n_classes = None
    matrices = None
    with open(file_path, encoding="utf-8") as f:
        for line_no, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            tokens = line.split()
            if matrices is None:
                if len(tokens) != 2:
                    raise ParseError(
                        f"header should be '<N> <m>', got {line!r}", line_no
                    )
                n_nodes = _parse_int(tokens[0], line_no, "N")
                n_classes = _parse_int(tokens[1], line_no, "m")
                if n_nodes < 1 or n_classes < 1:
                    raise ParseError(
                        "header values N and m must be positive", line_no
                    )
                matrices = np.zeros((n_classes, n_nodes, n_nodes))
                continue

            if len(tokens) != 4:
                raise ParseError(
                    "edge lines are '<class> <src> <dst> <weight>', got"
                    f" {line!r}",
                    line_no,
                )
            cls = _parse_int(tokens[0], line_no, "class id")
            src = _parse_int(tokens[1], line_no, "source id")
            dst = _parse_int(tokens[2], line_no, "destination id")
            try:
                weight = float(tokens[3])
            except ValueError:
                raise ParseError(
                    f"weight should be a number, got {tokens[3]!r}", line_no
                )
            if not 0 <= cls < n_classes:
                raise ParseError(
                    f"class id {cls} out of range for m={n_classes}", line_no
                )
            for node in (src, dst):
                if not 0 <= node < n_nodes:
                    raise ParseError(
                        f"node id {node} out of range for N={n_nodes}",
                        line_no,
                    )
            if not np.isfinite(weight):
                raise ParseError(f"non-finite weight {tokens[3]}", line_no)
            matrices[cls, dst, src] += weight

    if matrices is None:
        raise ParseError("missing '<N> <m>' header", 1)

    operators = [ShiftOperator(M, kind="adjacency") for M in matrices]
    if normalization == "spectral":
        operators = [spectral_normalize(op) for op in operators]
    return Multigraph(operators)


def save_multigraph(mg, file_path):
    """Write ``mg`` in the edge-list format read by ``load_multigraph``.

    Edges are written per class, ordered by source then destination, with
    weights in shortest round-trip float form.
    """
    lines = [f"{mg.n_nodes} {mg.n_classes}"]
    for cls, M in enumerate(mg.matrices):
        src, dst = np.nonzero(M.T)
        for s, d in zip(src, dst):
            lines.append(f"{cls} {s} {d} {repr(float(M[d, s]))}")
    with open(file_path, "w", encoding="utf-8") as f:
        f.write("\n".join(lines) + "\n")


def read_signal(file_path):
    """Read an N x F signal CSV (one row per node, no header)."""
    _check_path(file_path)
    df = pd.read_csv(file_path, header=None)
    values = df.to_numpy(dtype=float)
    if not np.all(np.isfinite(values)):
        raise ParseError(f"signal file {file_path} has non-finite values")
    return values


def write_signal(X, file_path):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    pd.DataFrame(X).to_csv(
        file_path, header=False, index=False, float_format="%.17g"
    )


def read_dataset(file_path):
    """Read a labelled single-feature dataset.

    Each row is ``label,v0,...,v{N-1}``; no header.

    Returns
    -------

    X : ndarray of shape (n_samples, N)

    y : ndarray of int of shape (n_samples,)

    """
    _check_path(file_path)
    df = pd.read_csv(file_path, header=None)
    if df.shape[1] < 2:
        raise ParseError(
            "dataset rows need a label followed by at least one node value"
        )
    values = df.to_numpy(dtype=float)
    labels = values[:, 0]
    if not np.all(labels == np.round(labels)):
        raise ParseError("dataset labels must be integers")
    return values[:, 1:], labels.astype(np.int64)


def write_dataset(X, y, file_path):
    X = np.asarray(X, dtype=float)
    df = pd.DataFrame(X)
    df.insert(0, "label", np.asarray(y, dtype=np.int64))
    df.to_csv(file_path, header=False, index=False, float_format="%.17g")


class ReadData:
    """Pipeline step loading the inputs named in ``params``.

    Reads ``params["multigraph_path"]`` (and ``params["dataset_path"]`` when
    present) into ``params["multigraph"]`` / ``params["X"]``,
    ``params["y"]``.
    """

    def __init__(self):
        self.file_name = None
        self.normalization = "spectral"

    def _validate_input(self, file_name):
        if type(file_name) is not str:
            raise TypeError(
                "Argument multigraph_path should be of str type. Received"
                f" {type(file_name)}"
            )
        self.file_name = file_name

    def read_file(self, params):
        """Read the multigraph (and optional dataset)"""

        self._validate_input(params.get("multigraph_path"))
        if "normalization" in params.keys():
            self.normalization = params["normalization"]

        params["multigraph"] = load_multigraph(
            self.file_name, normalization=self.normalization
        )
        if params.get("dataset_path"):
            params["X"], params["y"] = read_dataset(params["dataset_path"])

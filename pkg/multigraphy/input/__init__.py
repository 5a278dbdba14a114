from ._read import ReadData
from ._read import load_multigraph
from ._read import read_dataset
from ._read import read_signal
from ._read import save_multigraph
from ._read import write_dataset
from ._read import write_signal

__all__ = [
    "ReadData",
    "load_multigraph",
    "read_dataset",
    "read_signal",
    "save_multigraph",
    "write_dataset",
    "write_signal",
]

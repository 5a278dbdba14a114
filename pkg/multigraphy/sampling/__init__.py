from ._pooling import pool_backward
from ._pooling import pool_forward
from ._pooling import pool_signal
from ._selection import PoolConfig
from ._selection import SelectionPlan
from ._selection import layer_neighborhoods
from ._selection import multigraph_neighborhood
from ._selection import neighborhood
from ._selection import pooled_operators
from ._selection import sampling_matrices
from ._selection import select_nodes
from ._selection import stack_neighborhoods

__all__ = [
    "PoolConfig",
    "SelectionPlan",
    "layer_neighborhoods",
    "multigraph_neighborhood",
    "neighborhood",
    "pool_backward",
    "pool_forward",
    "pool_signal",
    "pooled_operators",
    "sampling_matrices",
    "select_nodes",
    "stack_neighborhoods",
]

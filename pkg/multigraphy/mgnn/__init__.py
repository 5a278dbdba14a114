from ._checkpoint import load_model
from ._checkpoint import save_model
from ._equivariance import check_permutation_equivariance
from ._forward import GradientSet
from ._forward import backward
from ._forward import forward
from ._forward import run_towers
from ._model import LayerSpec
from ._model import MGNNModel
from ._model import Readout
from ._model import build_baseline
from ._model import build_model
from ._model import count_parameters
from ._model import layer_parameter_count
from ._optim import Adam
from ._train import TrainConfig
from ._train import cross_entropy
from ._train import evaluate
from ._train import mse
from ._train import predict
from ._train import train
from ._train import train_primal_dual
from ._train import write_trace

__all__ = [
    "Adam",
    "GradientSet",
    "LayerSpec",
    "MGNNModel",
    "Readout",
    "TrainConfig",
    "backward",
    "build_baseline",
    "build_model",
    "check_permutation_equivariance",
    "count_parameters",
    "cross_entropy",
    "evaluate",
    "forward",
    "layer_parameter_count",
    "load_model",
    "mse",
    "predict",
    "run_towers",
    "save_model",
    "train",
    "train_primal_dual",
    "write_trace",
]

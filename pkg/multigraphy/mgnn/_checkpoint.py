import json

from ..exceptions import ParseError
from ..filters import filter_from_dict
from ..filters import filter_to_dict
from ..sampling import PoolConfig
from ..sampling import SelectionPlan
from ._model import LayerSpec
from ._model import MGNNModel
from ._model import Readout


def model_to_dict(model):
    towers = []
    for tower in model.towers:
        towers.append(
            [
                {
                    "filter": filter_to_dict(layer.filter),
                    "nonlinearity": layer.nonlinearity,
                    "pooling": (
                        None
                        if layer.pooling is None
                        else layer.pooling.to_dict()
                    ),
                    "selected_nodes": layer.selected_nodes,
                }
                for layer in tower
            ]
        )
    readout = None
    if model.readout is not None:
        readout = {
            "mode": model.readout.mode,
            "output_activation": model.readout.output_activation,
            "layers": [
                {"weight": W.tolist(), "bias": b.tolist()}
                for W, b in model.readout.layers
            ],
        }
    return {
        "variant": model.variant,
        "towers": towers,
        "readout": readout,
        "plan": None if model.plan is None else model.plan.to_dict(),
        "metadata": model.metadata,
    }


def model_from_dict(content):
    try:
        towers = [
            [
                LayerSpec(
                    filter_from_dict(layer["filter"]),
                    layer["nonlinearity"],
                    (
                        None
                        if layer["pooling"] is None
                        else PoolConfig(**layer["pooling"])
                    ),
                    layer["selected_nodes"],
                )
                for layer in tower
            ]
            for tower in content["towers"]
        ]
        readout = None
        entry = content["readout"]
        if entry is not None:
            readout = Readout(
                [(r["weight"], r["bias"]) for r in entry["layers"]],
                entry["mode"],
                entry["output_activation"],
            )
        plan = None
        if content["plan"] is not None:
            plan = SelectionPlan.from_dict(content["plan"])
        variant = content["variant"]
    except (KeyError, TypeError) as e:
        raise ParseError(f"Malformed model checkpoint: {e}")
    model = MGNNModel(towers, readout, variant, plan)
    model.metadata = dict(content.get("metadata") or {})
    return model


def save_model(model, file_path):
    """Write a JSON checkpoint: variant, layer specs with per-word
    coefficient matrices, readout, selection plan and metadata."""
    with open(file_path, "w") as f:
        json.dump(model_to_dict(model), f)


def load_model(file_path):
    try:
        with open(file_path) as f:
            content = json.load(f)
    except json.JSONDecodeError as e:
        raise ParseError(f"Checkpoint is not valid JSON: {e}", e.lineno)
    return model_from_dict(content)

import json

import numpy as np

from ..diffusion import DiffusionTree
from ..diffusion import word_from_str
from ..diffusion import word_to_str
from ..exceptions import ParseError
from ._filter import MimoFilter
from ._filter import MultigraphFilter


def filter_to_dict(h):
    """JSON-ready dict ``{"depth", "m", "coeffs"}``; MIMO filters add
    ``f_in``/``f_out`` and store row-major nested matrices."""
    content = {"depth": h.tree.depth, "m": h.tree.m}
    if isinstance(h, MimoFilter):
        content["f_in"] = h.f_in
        content["f_out"] = h.f_out
        content["coeffs"] = {
            word_to_str(w): h.coeffs[w].tolist()
            for w in h.tree.words
            if w in h.coeffs
        }
    else:
        content["coeffs"] = {
            word_to_str(w): h.coeffs[w] for w in h.tree.words if w in h.coeffs
        }
    return content


def filter_from_dict(content):
    try:
        depth = int(content["depth"])
        m = int(content["m"])
        coeffs = {
            word_from_str(k): v for k, v in content["coeffs"].items()
        }
    except (KeyError, TypeError, ValueError) as e:
        raise ParseError(f"Malformed filter description: {e}")

    tree = DiffusionTree.from_words(m, depth, coeffs.keys())
    if "f_in" in content:
        return MimoFilter(
            tree,
            {w: np.asarray(v, dtype=float) for w, v in coeffs.items()},
            content["f_in"],
            content["f_out"],
        )
    return MultigraphFilter(tree, {w: float(v) for w, v in coeffs.items()})


def save_filter(h, file_path):
    with open(file_path, "w") as f:
        json.dump(filter_to_dict(h), f, indent=2)


def load_filter(file_path):
    try:
        with open(file_path) as f:
            content = json.load(f)
    except json.JSONDecodeError as e:
        raise ParseError(f"Filter file is not valid JSON: {e}", e.lineno)
    return filter_from_dict(content)

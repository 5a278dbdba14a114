import copy
import json
import math
import numbers
import os.path

import numpy as np

from ..exceptions import ParseError


def __validate_config(file_path):
    if not (os.path.exists(file_path) and os.path.isfile(file_path)):
        raise FileNotFoundError(
            "Please make sure you to provide a valid config file that exists"
            f" at {file_path}"
        )


def parse_value(text):
    """``key=value`` scalar: int, float, ``inf``, ``true``/``false``, a
    comma-separated list of those, else the stripped string."""
    text = text.strip()
    if "," in text:
        return [parse_value(t) for t in text.split(",") if t.strip()]
    lowered = text.lower()
    if lowered in ("true", "false"):
        return lowered == "true"
    if lowered in ("inf", "+inf"):
        return math.inf
    if lowered == "-inf":
        return -math.inf
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def parse_assignment(text, line=None):
    if "=" not in text:
        raise ParseError(f"Expected 'key=value', got {text.strip()!r}", line)
    key, value = text.split("=", 1)
    key = key.strip()
    if not key:
        raise ParseError(f"Missing key in {text.strip()!r}", line)
    return key, parse_value(value)


def _read_key_value(f):
    content = {}
    for number, raw in enumerate(f, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, value = parse_assignment(line, number)
        content[key] = value
    return content


# return a dict of all the params read from the config
def read_config(file_path):
    __validate_config(file_path)

    with open(file_path) as f:
        if file_path.endswith(".json"):
            try:
                return json.load(f)
            except json.JSONDecodeError as e:
                raise ParseError(
                    f"Config file is not valid JSON: {e.msg}", e.lineno
                )
        return _read_key_value(f)


def _format_value(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (list, tuple)):
        return ",".join(_format_value(v) for v in value)
    if isinstance(value, float) and math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return str(value)


def _serializable(value):
    if isinstance(value, (bool, str, numbers.Number)) and not isinstance(
        value, np.ndarray
    ):
        return True
    if isinstance(value, (list, tuple)):
        return all(_serializable(v) for v in value)
    return False


# save the params to a file, dropping entries such as arrays and models
def save_config(file_path, params):
    params_copy = {
        k: copy.deepcopy(v) for k, v in params.items() if _serializable(v)
    }
    with open(file_path, "w") as f:
        if file_path.endswith(".json"):
            json.dump(params_copy, f, indent=2)
            return
        for key, value in params_copy.items():
            f.write(f"{key}={_format_value(value)}\n")

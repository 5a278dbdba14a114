import warnings

from ..exceptions import ArgumentsError
from ..input import ReadData
from .config import read_config


class Pipeline:
    """Ordered steps sharing one ``params`` dict.

    When ``params`` names a ``multigraph_path`` and no ``reader`` is given,
    ``ReadData().read_file`` runs first.
    """

    def __init__(
        self,
        steps=None,
        params=None,
        config_file=None,
        reader=None,
    ):

        self.params = params
        self.config_file = config_file
        self.steps = steps
        self.reader = reader
        self.__validate_input()

        if self.config_file and not self.params:
            self.params = read_config(self.config_file)

        if self.steps is None:
            self.steps = []

        if self.reader is None and "multigraph_path" in self.params:
            self.reader = ReadData().read_file

        if self.reader is not None:
            self.add(self.reader, {}, index=0)

    def __validate_input(self):

        if self.params and self.config_file:
            self.config_file = None
            warnings.warn(
                "'params' and 'config_file' both were provided. Using 'params'"
                " to construct the pipeline."
            )

        if not self.params and not self.config_file:
            raise ArgumentsError(
                "Both 'params' and 'config_file' cannot be null. Please"
                " provide either a params dict or path to a config file."
            )

        if self.steps and not isinstance(self.steps, list):
            raise TypeError(
                f"'steps' should be of type 'list'. Received {self.steps} of"
                f" type {type(self.steps)}"
            )

        if self.steps:
            for step in self.steps:
                if not callable(step):
                    raise TypeError(
                        "All steps of the pipeline must be callable. Received"
                        f" {step} of type {type(step)}"
                    )

        if self.params and not isinstance(self.params, dict):
            raise TypeError(
                f"'params' should be of type dict. Received {self.params} of"
                f" type {type(self.params)}"
            )

        if self.config_file and not isinstance(self.config_file, str):
            raise TypeError(
                "'config_file' should be of type str. Received"
                f" {self.config_file} of type: {type(self.config_file)}"
            )

        if self.reader and not callable(self.reader):
            raise TypeError(
                "'reader' should be a callable. Received"
                f" {self.reader} of type {type(self.reader)}"
            )

    def process(self):
        for step in self.steps:
            step(self.params)
        return self.params

    def __insert(self, index, func, params):
        self.steps.insert(index, func)
        for k, v in (params or {}).items():
            if k in self.params:
                warnings.warn(
                    f"Parameter '{k}' is already set; {func.__name__}"
                    " overrides it."
                )
            self.params[k] = v

    def __position(self, name):
        for i, step in enumerate(self.steps):
            if step.__name__ == name:
                return i
        raise ValueError(f"Function {name} is not a part of the pipeline.")

    def add(self, func=None, params=None, **kwargs):

        if not callable(func):
            raise TypeError(
                f"'func' should be a callable. Received {func} of type"
                f" {type(func)}"
            )

        if params and not isinstance(params, dict):
            raise TypeError(
                f"'params' should be of type dict. Received {params} of type"
                f" {type(params)}"
            )

        if "index" in kwargs.keys():
            self.__insert(kwargs.get("index"), func, params)
        elif "after" in kwargs.keys():
            index = self.__position(kwargs.get("after")) + 1
            self.__insert(index, func, params)
        elif "before" in kwargs.keys():
            self.__insert(self.__position(kwargs.get("before")), func, params)
        else:
            raise ArgumentsError(
                "No position was provided to insert the function into the"
                " pipeline"
            )

    def remove(self, func_name=None):
        if not isinstance(func_name, str):
            raise TypeError(
                f"'func_name' should be of type str. Received {func_name} of"
                f" type {type(func_name)}"
            )
        self.steps.pop(self.__position(func_name))

    def info(self):
        """Step names followed by the scalar params, one per line."""
        lines = [" -> ".join(step.__name__ for step in self.steps)]
        for k, v in self.params.items():
            if isinstance(v, (bool, int, float, str, list, tuple)):
                lines.append(f"{k}: {v}")
        text = "\n".join(lines)
        print(text)
        return text

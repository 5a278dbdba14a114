from ._base import Pipeline
from .config import read_config
from .config import save_config

__all__ = ["Pipeline", "read_config", "save_config"]

from ._split import Split

__all__ = ["Split"]

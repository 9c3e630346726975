from . import core, parsing

__all__ = ["parsing", "core"]

__version__ = "0.1.0"

"""Figure renderers for the echo-quadrature simulator's CSV outputs.

One stateless script per figure family; every script reads only the
documented delimited formats and never recomputes physics.
"""

__version__ = "0.1.0"

from .io import SchemaError
from .spec import FIGURE_IDS, FigureSpec, render

__all__ = ["FIGURE_IDS", "FigureSpec", "SchemaError", "render"]

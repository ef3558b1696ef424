"""Figure rendering for causal-bandit regret CSVs."""

from .figures import FigureError, FigureSpec, Series, build_figure, curve_series, render, scan_series

__version__ = "0.1.0"

__all__ = [
    "FigureError",
    "FigureSpec",
    "Series",
    "build_figure",
    "curve_series",
    "render",
    "scan_series",
]

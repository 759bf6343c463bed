"""Chart rendering for presim runner CSV output."""

from .spec import FigureError, FigureSpec, Series, extract_series, load_rows

__version__ = "0.1.0"

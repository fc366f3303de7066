"""Offline figure regeneration from benchmark CSVs.

Consumes the delimited outputs of the flow-equation benchmark runs
(campaign tables, trajectory files, spectrum files) and renders the
standard comparison figures.  No physics is recomputed here.
"""

from .io import (SchemaError, read_campaign, read_matrix_json, read_spectrum,
                 read_trajectory)
from .render import FIGURE_IDS, FigureSpec, build, render

__version__ = "0.1.0"

"""Figure scripts for the level set benchmark CSV artifacts.

This package only reads the harness's CSV files (schema_version = 1) and the
replayable environment JSON documents; it never recomputes metrics or calls
into the estimation library.
"""

from .allocation import plot_allocation_heatmap
from .f1_curves import plot_f1_curves
from .io import PlotDataError, read_allocation_csv, read_summary_csv

__all__ = [
    "PlotDataError",
    "plot_allocation_heatmap",
    "plot_f1_curves",
    "read_allocation_csv",
    "read_summary_csv",
]

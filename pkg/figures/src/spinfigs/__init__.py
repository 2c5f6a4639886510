"""Figure renderer for the CSV artifacts written by the spinlab CLI.

This package never imports spinlab; it consumes only the delimited files
and their JSON sidecars, so the simulation library runs without it and
vice versa.
"""

from spinfigs.plots import PlotSpec, RenderError, render

__all__ = ["PlotSpec", "RenderError", "render"]

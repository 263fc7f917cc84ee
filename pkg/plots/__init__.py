"""Figure generation from simulator result CSVs.

This package is deliberately decoupled from the simulator: it consumes only
the versioned CSV contract (schema line, documented columns) and never
imports fdiab.
"""

from .render import KINDS, PlotSpec, SchemaError, load_results, render

__all__ = ["KINDS", "PlotSpec", "SchemaError", "load_results", "render"]

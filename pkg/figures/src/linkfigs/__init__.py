from .render import FIGURES, render_figure
from .schema import SchemaError, read_latency, read_results, read_tau_table

__all__ = [
    "FIGURES",
    "SchemaError",
    "read_latency",
    "read_results",
    "read_tau_table",
    "render_figure",
]

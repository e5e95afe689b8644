"""Static diagnostic figures for sigmaflow run-log CSV files."""

__version__ = "0.1.0"

from .render import SchemaError, load_runlog, render_run  # noqa: F401

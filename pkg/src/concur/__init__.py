"""A workbench for four formal treatments of concurrency."""

__version__ = "0.1.0"

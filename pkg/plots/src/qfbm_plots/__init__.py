"""Plotting scripts for qfbm CLI output files.

Read-only consumers of the documented CSV and binary formats; nothing here
recomputes simulation results.
"""

__version__ = "0.1.0"

"""Publication-style figures from slprobust sweep CSVs.

Reads the delimited sweep output through its documented schema and renders
transmit power (dBW), average symbol error rate (log scale), and power
efficiency, one curve per precoder.
"""

from .csvio import SchemaError, SweepTable, read_sweep_csv
from .figures import FigureSpec, render

__version__ = "0.1.0"

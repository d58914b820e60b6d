"""Simulation and verification tools for TASEP and last-passage percolation."""

import importlib.util
import os

import numba

__version__ = "0.1.0"

# Pick the OpenMP pool when present; numba's default probe of an old TBB warns.
if "NUMBA_THREADING_LAYER" not in os.environ and importlib.util.find_spec("numba.np.ufunc.omppool"):
    numba.config.THREADING_LAYER = "omp"

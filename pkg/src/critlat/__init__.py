"""critlat: verified interval toolkit for the Minkowski critical-determinant
conjecture, critical lattices, and their elliptic dynamics."""

__version__ = "0.1.0"

from .interval import EMPTY, Box, Interval  # noqa: F401

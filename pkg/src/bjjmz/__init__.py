"""Adiabatic Mach-Zehnder interferometry on a quantized Bose-Josephson junction."""

from .backend import BACKEND

__version__ = "0.1.0"
__all__ = ["BACKEND", "__version__"]

"""Quantized cellular automata: lattice path integrals for reversible rules."""

from .errors import QCAError
from .lattice import ComplexAmp, LatticeShape

__all__ = ["QCAError", "ComplexAmp", "LatticeShape"]
__version__ = "0.1.0"

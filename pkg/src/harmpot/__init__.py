"""Asymptotic expansions and exact values of the discrete harmonic potential."""
from .scalar import (ExactComplex, FieldElement, PiGraded, Rational, SymbolicConstant,
                     numeric_eval, rational_reconstruct)
from .walk import WalkSpec, load_walk, validate_walk

__version__ = "0.1.0"

__all__ = ["ExactComplex", "FieldElement", "PiGraded", "Rational", "SymbolicConstant",
           "numeric_eval", "rational_reconstruct", "WalkSpec", "load_walk", "validate_walk"]

"""Entropy-coordinate algebra and exact Fourier-Motzkin elimination."""

from .expr import (GROUND, ConstraintSystem, EntropyForm, I, IdentityReducer, InfoExpr, InfoTerm,
                   LinearInfoInequality, canonicalize, info_term)
from .fme import fm_eliminate
from .theorem1 import (build_theorem1_system, derive_and_compare, dump_steps, numeric_crosscheck,
                       binning_simplifications, theorem1_target)

__all__ = [
    "GROUND", "ConstraintSystem", "EntropyForm", "I", "IdentityReducer", "InfoExpr", "InfoTerm",
    "LinearInfoInequality", "canonicalize", "info_term", "fm_eliminate", "build_theorem1_system",
    "derive_and_compare", "dump_steps", "numeric_crosscheck", "binning_simplifications",
    "theorem1_target",
]

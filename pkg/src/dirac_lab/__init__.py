"""Forward and inverse solver for discrete Dirac systems."""
from .errors import InadmissibleDataError, NumericalError, ValidationError
from .jalgebra import Signature
from .potential import DiracPotential, SchurSequence, dirac_to_schur, random_schur, schur_to_dirac
from .taylor import TaylorData, taylor_algebraic, taylor_numeric
from .inverse import recover_potential

__all__ = [
    "DiracPotential",
    "InadmissibleDataError",
    "NumericalError",
    "SchurSequence",
    "Signature",
    "TaylorData",
    "ValidationError",
    "dirac_to_schur",
    "random_schur",
    "recover_potential",
    "schur_to_dirac",
    "taylor_algebraic",
    "taylor_numeric",
]

"""Restore N-representability of approximate two-electron reduced density matrices."""
from .errors import DimensionError, DomainError, NumericalError
from .fixer import FixConfig, FixReport, cost_doci, cost_regular, fix_doci, fix_regular, violation_measure
from .rdm import Doci2RDM, Spin2RDM, validate

__version__ = "0.1.0"

__all__ = [
    "DimensionError",
    "Doci2RDM",
    "DomainError",
    "FixConfig",
    "FixReport",
    "NumericalError",
    "Spin2RDM",
    "cost_doci",
    "cost_regular",
    "fix_doci",
    "fix_regular",
    "validate",
    "violation_measure",
]

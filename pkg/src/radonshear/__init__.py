"""Shearlet transforms through the affine Radon transform."""

from .errors import (
    AdmissibilityError,
    AliasingError,
    CoverageError,
    DomainError,
    ParseError,
    RadonShearError,
    ShapeError,
    SizeError,
    StageError,
    UnsupportedFormatError,
)

__version__ = "0.1.0"

__all__ = [
    "AdmissibilityError",
    "AliasingError",
    "CoverageError",
    "DomainError",
    "ParseError",
    "RadonShearError",
    "ShapeError",
    "SizeError",
    "StageError",
    "UnsupportedFormatError",
]

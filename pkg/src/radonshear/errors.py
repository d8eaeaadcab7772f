"""Exception hierarchy shared by all modules.

Every error carries the name of the subsystem that raised it so CLI reports
can say which module and which invariant failed.
"""


class RadonShearError(Exception):
    """Base class for all library errors."""

    def __init__(self, message: str, *, module: str = "radonshear"):
        super().__init__(message)
        self.module = module

    def __str__(self) -> str:
        return f"[{self.module}] {super().__str__()}"


class DomainError(RadonShearError, ValueError):
    """A parameter lies outside the mathematical domain (e.g. a = 0)."""


class ShapeError(RadonShearError, ValueError):
    """Array or vector dimensions do not match."""


class SizeError(RadonShearError, ValueError):
    """Sample count is not a supported FFT size."""


class CoverageError(RadonShearError, ValueError):
    """A requested evaluation leaves the sampled grid."""


class StageError(RadonShearError, ValueError):
    """A sinogram is in the wrong processing stage."""


class AdmissibilityError(RadonShearError, ValueError):
    """A wavelet or mother shearlet fails an admissibility quadrature."""


class AliasingError(RadonShearError, ValueError):
    """An atom's spectrum does not fit inside the image Nyquist box."""


class ParseError(RadonShearError, ValueError):
    """Malformed input file; ``offset`` is the byte position of the fault."""

    def __init__(self, message: str, offset: int | None = None, *, module: str = "cli"):
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message, module=module)
        self.offset = offset


class UnsupportedFormatError(RadonShearError, ValueError):
    """File is well formed but uses an unsupported variant."""

"""Exception types shared across the package."""


class AdathreshError(Exception):
    """Base class for all errors raised by this package."""


class InputContractError(AdathreshError, ValueError):
    """An argument or input file violates a documented precondition."""


class DimensionMismatchError(InputContractError):
    """Vector length differs from the expected dimension."""


class ZeroVectorError(InputContractError):
    """A zero-norm vector was supplied where a direction is required."""


class EmptyGalleryError(InputContractError):
    """The operation needs a non-empty gallery."""


class GalleryFormatError(InputContractError):
    """A persisted gallery file is malformed or internally inconsistent."""


class DegenerateDataError(AdathreshError):
    """Similarity data too degenerate to support adaptation.

    Raised for zero-variance sample sets, statistically identical auto and
    cross distributions, or sample sets too small to fit a Gaussian.
    """

"""Exception hierarchy shared by all modules."""


class DsThinError(Exception):
    """Base class for every error raised by the package."""


class DegenerateLattice(DsThinError):
    pass


class NotADifferenceSet(DsThinError):
    def __init__(self, message, offending=None):
        super().__init__(message)
        self.offending = offending


class NotTwinPrimes(DsThinError):
    pass


class NonPrimitivePolynomial(DsThinError):
    pass


class NotCoprime(DsThinError):
    pass


class SizeMismatch(DsThinError):
    pass


class SearchSpaceTooLarge(DsThinError):
    pass


class TabulatedOutOfRange(DsThinError):
    pass


class EmptySidelobeRegion(DsThinError):
    pass


class BeamNotResolved(DsThinError):
    pass


class InvisibleDirection(DsThinError):
    pass


class InvalidDescriptors(DsThinError):
    pass


class NoVisibleSamples(DsThinError):
    pass


class ApertureTooSmall(DsThinError):
    pass


class ElementInadmissible(DsThinError):
    pass


class NoFeasibleLattice(DsThinError):
    pass


class Infeasible(DsThinError):
    """Raised when the synthesis pipeline exhausts every candidate.

    ``trace`` holds one dict per attempted step so callers can report why.
    """

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = list(trace or [])

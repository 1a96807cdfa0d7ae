"""Exception hierarchy shared by every lowrank_hdx module."""


class HdxError(Exception):
    """Base class for errors raised by lowrank_hdx."""


class FieldError(HdxError, ValueError):
    """Invalid field parameters or arithmetic on elements outside the field."""


class DimensionError(HdxError, ValueError):
    """Operands with incompatible shapes or ambient dimensions."""


class SizeCapError(HdxError):
    """A projected enumeration exceeds the configured cap."""

    def __init__(self, message, projected=None, cap=None):
        super().__init__(message)
        self.projected = projected
        self.cap = cap


class AmbiguousMeetError(HdxError):
    """Two matrices have no unique maximal common dominated element."""

    def __init__(self, message, maxima=()):
        super().__init__(message)
        self.maxima = tuple(maxima)


class MembershipError(HdxError):
    """A subspace or face is not a member of the complex it was checked against."""


class PurityError(HdxError):
    """A face is not dominated by any top-rank face."""

    def __init__(self, message, face=None):
        super().__init__(message)
        self.face = face


class ZeroWeightError(HdxError):
    """A walk was requested through a face of zero mass."""


class ConvergenceError(HdxError):
    """An iterative eigensolver did not converge."""

    def __init__(self, message, bracket=None):
        super().__init__(message)
        self.bracket = bracket


class DisconnectedError(HdxError):
    """An operation needs a connected graph and did not get one."""


class HypothesisError(HdxError):
    """The counting hypothesis of the quotient step does not hold."""

    def __init__(self, message, lhs=None, rhs=None):
        super().__init__(message)
        self.lhs = lhs
        self.rhs = rhs


class DegenerateCoverError(HdxError):
    """The kernel of H forces a vertex of the cover to zero or onto another vertex."""

    def __init__(self, message, vertex=None):
        super().__init__(message)
        self.vertex = vertex

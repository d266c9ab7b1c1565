"""Exception hierarchy.

Two families matter to callers: hypothesis violations (the input does not
satisfy what a theorem needs) and numerical failures (the input was fine but
the computation could not certify its answer). The CLI maps them to exit
codes 2 and 3.
"""


class JordanTriError(Exception):
    """Base class for every error raised by this package."""


class DimensionMismatch(JordanTriError, ValueError):
    """Operands live in different ambient dimensions."""


class HypothesisViolation(JordanTriError):
    """The input breaks a hypothesis the requested computation relies on."""


class NotNilpotent(HypothesisViolation):
    """A generator that was required to be nilpotent is not."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class ChainStall(HypothesisViolation):
    """Every generator is nilpotent but the generated algebra is not.

    ``link`` holds an orthonormal basis of the subspace on which the
    descending chain stopped shrinking.
    """

    def __init__(self, message, link=None):
        super().__init__(message)
        self.link = link


class NumericalFailure(JordanTriError):
    """A computation could not certify its result at the given tolerances."""


class AmbiguousVerdict(NumericalFailure):
    """Independent numerical tests disagree."""


class ClusterAmbiguity(NumericalFailure):
    """Eigenvalue clusters are too close to separate."""


class NotInSpectrum(JordanTriError, ValueError):
    """The requested spectral point matches no eigenvalue cluster."""


class InvarianceViolation(NumericalFailure):
    """A subspace expected to be invariant is not, beyond tolerance."""


class ClosureFailure(NumericalFailure):
    """An algebra closure did not stabilize or failed its closure audit."""


class ResidualExceeded(NumericalFailure):
    """A certificate was built but its residual is above tolerance."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual

"""Exception hierarchy shared by every module of the package."""


class FiniteGapError(Exception):
    """Base class for computational failures raised by finitegap."""


class DegenerateLattice(FiniteGapError):
    pass


class PoleProximity(FiniteGapError):
    pass


class FieldMismatch(FiniteGapError):
    pass


class DependentBasis(FiniteGapError):
    pass


class ReductionFailure(FiniteGapError):
    pass


class NotQuasiSolvable(FiniteGapError):
    pass


class ClosureFailure(FiniteGapError):
    pass


class IntertwineFailure(FiniteGapError):
    pass


class AnsatzFailure(FiniteGapError):
    pass


class RelationFailure(FiniteGapError):
    """Raised when an operator identity fails; ``diff`` holds the residual."""

    def __init__(self, message, diff=None):
        super().__init__(message)
        self.diff = diff


class NonRectangular(FiniteGapError):
    pass


class ComplexRoots(FiniteGapError):
    def __init__(self, message, roots=None):
        super().__init__(message)
        self.roots = roots


class EdgeEnergy(FiniteGapError):
    pass


class PathPole(FiniteGapError):
    pass


class BranchAmbiguity(FiniteGapError):
    pass


class BadBasepoint(FiniteGapError):
    pass


class NonConvergence(FiniteGapError):
    pass


class Collision(FiniteGapError):
    pass


class Divergence(FiniteGapError):
    def __init__(self, message, best_residual=None):
        super().__init__(message)
        self.best_residual = best_residual


class SingularP2(FiniteGapError):
    pass


class IdentityValidationFailed(FiniteGapError):
    pass


class MismatchFailure(FiniteGapError):
    pass


class SamplePole(FiniteGapError):
    pass


class UnsupportedFormat(FiniteGapError):
    pass

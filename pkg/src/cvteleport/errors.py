"""Exception hierarchy shared by all cvteleport modules."""


class CVTeleportError(Exception):
    """Base class for every error raised by the package."""


class InvalidParameter(CVTeleportError, ValueError):
    pass


class InvalidModePair(CVTeleportError, ValueError):
    pass


class InvalidModeCount(CVTeleportError, ValueError):
    pass


class NonGaussianInput(CVTeleportError, ValueError):
    """A Fock input was handed to a routine that only handles Gaussian states."""


class DegenerateMarginal(CVTeleportError, ArithmeticError):
    pass


class DegenerateGain(CVTeleportError, ValueError):
    """PA gain R = 0 gives k = g/G = 0, which has no teleportation channel."""


class InvalidDensityMatrix(CVTeleportError, ValueError):
    pass


class ConvergenceFailure(CVTeleportError, ArithmeticError):
    pass


class UseEntanglementMetrics(CVTeleportError, ValueError):
    """EPR inputs are characterised by inseparability, not by a characteristic-function fidelity."""


class NoClosedForm(CVTeleportError, ValueError):
    pass


class RequiresFiniteSqueezing(CVTeleportError, ValueError):
    """Homodyne outcomes have an improper distribution when the resource squeezing is infinite."""

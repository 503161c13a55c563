"""Exception types raised across gammalab."""


class GammaLabError(Exception):
    """Base class for all gammalab failures."""


class ConvergenceError(GammaLabError):
    """QR iteration ran out of budget.

    The partially reduced matrix and accumulated unitary are kept so callers
    can inspect how far the iteration got.
    """

    def __init__(self, message, partial=None, unitary=None, iterations=0):
        super().__init__(message)
        self.partial = partial
        self.unitary = unitary
        self.iterations = iterations


class NotPSDError(GammaLabError):
    def __init__(self, message, eigenvalue):
        super().__init__(message)
        self.eigenvalue = eigenvalue


class BoundaryRegimeError(GammaLabError):
    """Raised when the canonical witness is requested with |p| too close to 1."""


class CommutationError(GammaLabError):
    def __init__(self, message, worst=0.0):
        super().__init__(message)
        self.worst = worst


class JointSpectrumError(GammaLabError):
    def __init__(self, message, worst_residual=float("inf")):
        super().__init__(message)
        self.worst_residual = worst_residual


class IsometryDefectError(GammaLabError):
    """D_P vanishes numerically while S_i - S_{n-i}^* P does not."""


class HypothesesNotMet(GammaLabError):
    def __init__(self, message, gate=None):
        super().__init__(message)
        self.gate = gate or {}

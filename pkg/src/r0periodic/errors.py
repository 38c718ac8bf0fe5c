"""Exception taxonomy.

``NumericalError`` subclasses signal failures of the numerical machinery
(singular systems, missed convergence); plain ``ValueError`` subclasses
signal structurally invalid inputs (bad meshes, incompatible model/mesh
pairs).  The CLI maps the former to exit code 3 and configuration problems
to exit code 2.
"""

from __future__ import annotations


class NumericalError(Exception):
    """Base class for runtime numerical failures."""


class SingularMatrixError(NumericalError):
    """A pivot fell below the singularity tolerance during LU factorization."""


class NoConvergenceError(NumericalError):
    """An iterative solver exhausted its budget without meeting its tolerance."""


class SingularCollocationMatrixError(NumericalError):
    """The assembled transition matrix of the discrete pencil is singular.

    Usually means the mesh is too coarse for the pencil reduction to a
    standard eigenproblem; retry with a larger N.
    """


class NoRealDominantError(NumericalError):
    """No real nonnegative eigenvalue inside the dominance band.

    Carries the band contents so callers can inspect (or, for diagnostic
    studies, fall back to) the dominant complex pair.
    """

    def __init__(self, message, band):
        super().__init__(message)
        self.band = band


class SingularAveragedMatrixError(NumericalError):
    """The period-averaged transition matrix is singular."""


class StepSizeUnderflowError(NumericalError):
    """The adaptive integrator drove the step size below machine resolution."""


class BracketFailureError(NumericalError):
    """Bracket expansion found no sign change for the scalar root solve.

    Carries the scan history as a list of (lambda_lo, lambda_hi, g_lo, g_hi)
    tuples.
    """

    def __init__(self, message, history):
        super().__init__(message)
        self.history = history


class EvenNodeCountError(ValueError):
    """Even N requested for the trigonometric mesh without the override flag."""


class MeshModelMismatchError(ValueError):
    """Mesh and model disagree on the period or the breakpoint grid."""

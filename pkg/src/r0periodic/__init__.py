"""Reproduction numbers of time-periodic compartmental models.

The package computes basic and type reproduction numbers of linear(ized)
periodic ODE systems u' = B(t) u - M(t) u by pseudospectral collocation of
the generalized eigenvalue problem B*phi = lambda*(phi' + M*phi), with a
monodromy-based baseline for cross-validation.

Layout:

* :mod:`r0periodic.linalg` - dense LU / eigenvalue / power-iteration kernels;
* :mod:`r0periodic.collocation` - meshes, differentiation matrices,
  barycentric evaluation (trigonometric and algebraic, single or piecewise);
* :mod:`r0periodic.models` - benchmark model factories (multi-group SIR,
  vector-host with type-reproduction splittings, sampled custom models);
* :mod:`r0periodic.pencil` - pencil assembly, dominant-eigenpair solve,
  eigenfunction interpolation, period averaging;
* :mod:`r0periodic.mom` - monodromy baseline (adaptive integration plus
  Brent root finding);
* :mod:`r0periodic.studies` - convergence studies, reference values, sweeps;
* :mod:`r0periodic.cli` - JSON-config command line with CSV/JSON emission.
"""

__version__ = "0.1.0"

from .collocation import (
    DiffMatrix,
    Mesh,
    barycentric_eval,
    chebyshev_diff_matrix,
    chebyshev_mesh,
    fold_periodic,
    fourier_diff_matrix,
    fourier_mesh,
    periodic_diff_matrix,
    piecewise_chebyshev_mesh,
)
from .errors import (
    BracketFailureError,
    EvenNodeCountError,
    MeshModelMismatchError,
    NoConvergenceError,
    NoRealDominantError,
    NumericalError,
    SingularAveragedMatrixError,
    SingularCollocationMatrixError,
    SingularMatrixError,
    StepSizeUnderflowError,
)
from .models import (
    Contact,
    PeriodicModel,
    SirParams,
    VectorHostParams,
    contact_rate,
    sampled_model,
    sir_eigenfunction_exact,
    sir_model,
    sir_r0_exact,
    vector_host_model,
)
from .mom import MomSolveReport, MonodromyResult, mom_solve, monodromy, propagate
from .pencil import (
    DiscretePencil,
    SpectralSolution,
    assemble,
    averaged_r0,
    eigenfunction_at,
    period_average,
    rescale_to_unit_period,
    solve_r0,
)
from .studies import (
    ConvergenceReport,
    ConvergenceRow,
    DecayFit,
    convergence_study,
    fit_decay,
    reference_value,
    sir_sweep,
    solve_on_mesh,
    vector_host_sweep,
)

__all__ = [
    "__version__",
    # collocation
    "Mesh", "DiffMatrix", "fourier_mesh", "fourier_diff_matrix",
    "chebyshev_mesh", "chebyshev_diff_matrix", "fold_periodic",
    "piecewise_chebyshev_mesh", "periodic_diff_matrix", "barycentric_eval",
    # models
    "PeriodicModel", "Contact", "SirParams", "VectorHostParams",
    "contact_rate", "sir_model", "sir_r0_exact", "sir_eigenfunction_exact",
    "vector_host_model", "sampled_model",
    # pencil
    "DiscretePencil", "SpectralSolution", "assemble", "solve_r0",
    "eigenfunction_at", "period_average", "averaged_r0",
    "rescale_to_unit_period",
    # mom
    "MonodromyResult", "MomSolveReport", "monodromy", "propagate", "mom_solve",
    # studies
    "ConvergenceRow", "ConvergenceReport", "DecayFit", "convergence_study",
    "fit_decay", "reference_value", "solve_on_mesh", "vector_host_sweep",
    "sir_sweep",
    # errors
    "NumericalError", "SingularMatrixError", "NoConvergenceError",
    "SingularCollocationMatrixError", "NoRealDominantError",
    "SingularAveragedMatrixError", "StepSizeUnderflowError",
    "BracketFailureError", "EvenNodeCountError", "MeshModelMismatchError",
]

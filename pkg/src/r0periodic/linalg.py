"""Dense linear-algebra kernels used by the collocation and monodromy solvers.

Matrices are plain 2-D numpy arrays (row-major, float64 or complex128).
Factorizations and eigensolves delegate to LAPACK via scipy/numpy; these
wrappers add what the rest of the package relies on: singularity detection
with an explicit tolerance, pivot-growth reporting, a uniform error
taxonomy, and a dominant-eigenvalue iteration with a conservative stopping
rule.  All functions are pure and never mutate their arguments.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
import scipy.linalg

from .errors import NoConvergenceError, SingularMatrixError

__all__ = [
    "LUFactorization",
    "EigenList",
    "lu_factor",
    "lu_solve",
    "lu_solve_transposed",
    "eigenvalues_dense",
    "inverse_iteration",
    "power_iteration",
]


def _square(a, name="matrix"):
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be square, got shape {a.shape}")
    if a.size and not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite entries")
    return a


@dataclass(frozen=True)
class LUFactorization:
    """P A = L U with partial (row) pivoting.

    ``factors`` holds L strictly below the unit diagonal and U on and above
    it (LAPACK packed layout); ``piv`` are the LAPACK successive row
    interchanges, ``permutation`` the equivalent one-shot row permutation
    (row i of P A is row permutation[i] of A).  ``pivot_growth`` is
    max|U| / max|A|, a cheap stability indicator.
    """

    factors: np.ndarray
    piv: np.ndarray
    permutation: np.ndarray
    pivot_growth: float

    @property
    def n(self) -> int:
        return self.factors.shape[0]


@dataclass(frozen=True)
class EigenList:
    """Eigenvalues of a square matrix; complex, conjugate-closed for real input.

    ``vectors`` is filled only when eigenvectors were explicitly requested
    (columns match ``values`` entries).
    """

    values: np.ndarray
    vectors: Optional[np.ndarray] = None

    def spectral_radius(self) -> float:
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0


def lu_factor(a, singular_tol: float = 1e-12) -> LUFactorization:
    """Factor a square matrix as P A = L U with partial pivoting.

    Raises ``SingularMatrixError`` when any pivot magnitude is at or below
    ``singular_tol * norm(A, inf)``; pass ``singular_tol=0.0`` to accept any
    nonzero pivot (used by inverse iteration on nearly singular shifts).
    """
    a = _square(a)
    n = a.shape[0]
    if n == 0:
        raise ValueError("cannot factor an empty matrix")
    anorm = float(np.max(np.abs(a))) if a.size else 0.0
    with np.errstate(invalid="ignore"), warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        factors, piv = scipy.linalg.lu_factor(a, check_finite=False)
    diag = np.abs(np.diag(factors))
    threshold = singular_tol * float(np.linalg.norm(a, np.inf))
    if np.any(diag <= threshold):
        k = int(np.argmin(diag))
        raise SingularMatrixError(
            f"pivot {diag[k]:.3e} at position {k} is within the singularity "
            f"tolerance {threshold:.3e} (n={n})"
        )
    permutation = np.arange(n)
    for i, p in enumerate(piv):
        if p != i:
            permutation[[i, p]] = permutation[[p, i]]
    growth = float(np.max(np.abs(np.triu(factors)))) / anorm if anorm > 0 else 0.0
    return LUFactorization(factors=factors, piv=piv, permutation=permutation,
                           pivot_growth=growth)


def lu_solve(factorization: LUFactorization, b):
    """Solve A x = b (vector or matrix right-hand side) from a factorization."""
    b = np.asarray(b)
    n = factorization.n
    if b.shape[0] != n:
        raise ValueError(f"right-hand side has {b.shape[0]} rows, expected {n}")
    return scipy.linalg.lu_solve((factorization.factors, factorization.piv), b,
                                 check_finite=False)


def lu_solve_transposed(factorization: LUFactorization, b):
    """Solve A^T x = b from a factorization of A."""
    b = np.asarray(b)
    if b.shape[0] != factorization.n:
        raise ValueError(f"right-hand side has {b.shape[0]} rows, expected "
                         f"{factorization.n}")
    return scipy.linalg.lu_solve((factorization.factors, factorization.piv), b,
                                 trans=1, check_finite=False)


def eigenvalues_dense(a, tol: float = 1e-10, max_sweeps: int = 30) -> EigenList:
    """All eigenvalues of a dense square matrix.

    Backed by LAPACK's balanced Hessenberg + shifted-QR driver, whose
    internal deflation criteria are tighter than ``tol``; the parameters are
    kept so callers can express their accuracy budget and so the failure
    path (``NoConvergenceError``) has a uniform signature.  For real input
    the returned values are exactly closed under conjugation.
    """
    a = _square(a)
    if a.shape[0] == 0:
        return EigenList(values=np.zeros(0, dtype=complex))
    del tol, max_sweeps  # LAPACK governs its own deflation; see docstring
    try:
        values = np.linalg.eigvals(a)
    except np.linalg.LinAlgError as exc:
        raise NoConvergenceError(f"QR iteration failed to deflate: {exc}") from exc
    return EigenList(values=np.asarray(values, dtype=complex))


def inverse_iteration(a, eigenvalue, tol: float = 1e-10, max_iter: int = 50):
    """Eigenvector for a known (approximate) eigenvalue of ``a``.

    One LU of (A - lambda I), then repeated solves from the all-ones start
    vector.  Returns a vector with unit infinity norm whose largest entry is
    real-positive oriented.  ``tol`` bounds the relative residual
    ``|A v - lambda v| <= tol * |A| * |v|``.
    """
    a = _square(a)
    n = a.shape[0]
    lam = complex(eigenvalue) if np.iscomplexobj(a) or np.imag(eigenvalue) else float(np.real(eigenvalue))
    anorm = float(np.linalg.norm(a, np.inf))
    shift = lam
    for bump in range(4):
        shifted = a - shift * np.eye(n, dtype=np.result_type(a.dtype, type(shift)))
        try:
            fac = lu_factor(shifted, singular_tol=0.0)
        except SingularMatrixError:
            shift = lam * (1.0 + 1e-13 * 10.0 ** bump) if lam != 0 else 1e-13 * 10.0 ** bump
            continue
        x = np.ones(n, dtype=shifted.dtype)
        best = None
        for _ in range(max_iter):
            y = lu_solve(fac, x)
            ninf = float(np.max(np.abs(y)))
            if not np.isfinite(ninf) or ninf == 0.0:
                break
            x = y / ninf
            residual = float(np.max(np.abs(a @ x - lam * x)))
            if best is None or residual < best[0]:
                best = (residual, x.copy())
            if residual <= tol * anorm:
                return _orient(x)
        if best is not None and best[0] <= tol * anorm:
            return _orient(best[1])
        shift = lam * (1.0 + 1e-13 * 10.0 ** bump) if lam != 0 else 1e-13 * 10.0 ** bump
    raise NoConvergenceError(
        f"inverse iteration stalled for eigenvalue {eigenvalue!r}"
        + (f" (best residual {best[0]:.3e})" if best else "")
    )


def _orient(x):
    """Scale to unit infinity norm with the largest entry oriented positive."""
    k = int(np.argmax(np.abs(x)))
    pivot = x[k]
    if pivot == 0:
        return x
    x = x / pivot if np.iscomplexobj(x) else x / abs(pivot) * (1.0 if pivot > 0 else -1.0)
    return x


def power_iteration(apply_map: Callable[[np.ndarray], np.ndarray], n: int,
                    tol: float = 1e-10, max_iter: int = 10000):
    """Dominant eigenvalue modulus of a black-box linear map on R^n.

    Returns ``(modulus, vector)`` where ``vector`` has unit infinity norm
    and its largest entry is positive.  The stopping rule tracks the
    Rayleigh-quotient modulus over a trailing window, estimates the
    geometric decay of its increments, and accepts only when the projected
    remaining error is below ``tol`` AND the iterate direction has settled
    (up to sign).  Maps without a dominance gap (e.g. a dominant complex
    pair, or two eigenvalues of equal modulus) therefore fail with
    ``NoConvergenceError`` instead of returning a bogus fixed point; callers
    fall back to the dense solver.
    """
    if n <= 0:
        raise ValueError("dimension must be positive")
    window = 12
    dir_tol = max(np.sqrt(tol), 1e-8)
    x = np.ones(n)
    mod_prev = None
    mod = 0.0
    diffs: list[float] = []
    for _ in range(max_iter):
        y = np.asarray(apply_map(x), dtype=float)
        if y.shape != (n,):
            raise ValueError("map changed the vector dimension")
        ninf = float(np.max(np.abs(y)))
        if ninf == 0.0:
            return 0.0, _orient(x)
        mod = abs(float(x @ y) / float(x @ x))
        x_next = y / ninf
        direction_delta = min(float(np.max(np.abs(x_next - x))),
                              float(np.max(np.abs(x_next + x))))
        x = x_next
        if mod_prev is not None:
            diffs.append(abs(mod - mod_prev))
        mod_prev = mod
        if len(diffs) < 2 * window:
            continue
        d_now = max(diffs[-window:])
        d_old = max(diffs[-2 * window:-window])
        scale = max(1.0, mod)
        if d_now == 0.0 and d_old == 0.0:
            if direction_delta <= dir_tol:
                return mod, _orient(x)
            continue
        if d_old == 0.0 or d_now >= d_old:
            continue
        rho = (d_now / d_old) ** (1.0 / window)
        projected = d_now * rho / (1.0 - rho) + d_now
        if projected <= tol * scale and direction_delta <= dir_tol:
            return mod, _orient(x)
    raise NoConvergenceError(
        f"power iteration: Rayleigh-quotient modulus still moving by more than "
        f"{tol:.1e} (relative) after {max_iter} iterations (last modulus {mod:.6e})"
    )

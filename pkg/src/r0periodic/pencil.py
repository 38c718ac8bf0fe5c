"""Discrete generalized eigenvalue pencil: assembly, solve, eigenfunctions.

Collocating the generalized eigenvalue problem B*phi = lambda*(phi' + M*phi)
on a periodic mesh yields the matrix pencil

    B_N = blkdiag(B(t_1), ..., B(t_n)),
    M_N = (D (x) I_d) + blkdiag(M(t_1), ..., M(t_n)),

where D is the periodic differentiation matrix of the scheme (folded for
the algebraic schemes) and t_i runs over the unknown nodes.  The
approximate reproduction number is the dominant eigenvalue of the pencil,
computed by reducing to the standard eigenproblem for inv(M_N)*B_N through
one LU factorization of M_N; no QZ iteration is used.  The dominant
eigenpair is then polished by inverse iteration on the pencil with a
Rayleigh-quotient update, which removes the O(n*eps) roundoff floor of the
dense eigensolver from the reported value (the raw spectrum is reported
unchanged).

Also here: the period-averaged problem (trapezoid quadrature per piece) and
the rescaling of an arbitrary-period model to the unit period.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import collocation, linalg
from .errors import (
    MeshModelMismatchError,
    NoConvergenceError,
    NoRealDominantError,
    SingularAveragedMatrixError,
    SingularCollocationMatrixError,
    SingularMatrixError,
)
from .models import PeriodicModel

__all__ = [
    "DiscretePencil",
    "SpectralSolution",
    "rescale_to_unit_period",
    "assemble",
    "solve_r0",
    "eigenfunction_at",
    "period_average",
    "averaged_r0",
]

FULL_SPECTRUM = "full-spectrum"
POWER_FAST_PATH = "power-fast-path"

# Eigenvalues within this relative distance of the maximum modulus form the
# dominance band; the dominant eigenvalue must be a real nonnegative member.
DOMINANCE_RTOL = 1e-8
# Residual contract: |B_N phi - r0 M_N phi| <= RESIDUAL_RTOL * scale.
RESIDUAL_RTOL = 1e-9

_QUADRATURE_INTERVALS = 4096  # trapezoid resolution per piece for averages


@dataclass(frozen=True)
class DiscretePencil:
    """The pair (B_N, M_N) with its mesh and provenance."""

    B_N: np.ndarray
    M_N: np.ndarray
    mesh: collocation.Mesh
    d: int
    model: PeriodicModel

    @property
    def n(self) -> int:
        return self.B_N.shape[0]


@dataclass(frozen=True)
class SpectralSolution:
    """Dominant eigenpair of a discrete pencil plus diagnostics.

    ``phi`` holds the generalized eigenfunction's nodal values, one row of d
    components per unknown node, normalized to unit infinity norm with the
    largest entry positive and entries below 1e-12 clamped to zero.  ``psi``
    are the corresponding next-generation eigenfunction values
    B(t_i) phi_i / r0.  ``spectrum`` is the full raw eigenvalue list of
    inv(M_N) B_N (None on the power fast path).  ``dominance_gap`` is
    1 - |lambda_2|/|lambda_1| with lambda_2 the largest modulus outside the
    dominance band (None on the power path).
    """

    r0: float
    spectrum: Optional[linalg.EigenList]
    phi: np.ndarray
    psi: np.ndarray
    mesh: collocation.Mesh
    model: PeriodicModel
    residual: float
    dominance_gap: Optional[float]
    strategy: str


def rescale_to_unit_period(model: PeriodicModel) -> PeriodicModel:
    """Equivalent model on the unit period: coefficients tau*B(tau*t), tau*M(tau*t).

    The pencil eigenvalues of the rescaled model coincide with the
    original's, so reproduction numbers are unchanged.
    """
    tau = model.period
    if tau == 1.0:
        return model
    birth, transition = model.birth, model.transition

    def birth_scaled(t, piece=None):
        return tau * birth(tau * t, piece)

    def transition_scaled(t, piece=None):
        return tau * transition(tau * t, piece)

    return PeriodicModel(
        d=model.d, period=1.0, birth=birth_scaled, transition=transition_scaled,
        breakpoints=tuple(b / tau for b in model.breakpoints),
        smoothness=model.smoothness,
        label=(model.label + "-unit-period") if model.label else "unit-period",
        r0_closed_form=model.r0_closed_form,
    )


def _collocation_points(model: PeriodicModel, mesh: collocation.Mesh):
    """Unknown nodes paired with the model piece to evaluate them in.

    Trigonometric meshes require a breakpoint-free model.  Piecewise
    algebraic meshes must refine the model's breakpoint grid so every mesh
    piece sits inside one model piece (one-sided evaluation at shared
    breakpoints).  A single algebraic piece is allowed over any model;
    coefficients are then evaluated pointwise, which is exactly the
    "discontinuity penalty" experiment.
    """
    if abs(mesh.period - model.period) > 1e-12 * max(1.0, model.period):
        raise MeshModelMismatchError(
            f"mesh period {mesh.period} != model period {model.period}"
        )
    nodes = mesh.unknown_nodes()
    if mesh.scheme == collocation.FOURIER:
        if model.n_pieces > 1:
            raise MeshModelMismatchError(
                "trigonometric collocation needs breakpoint-free coefficients; "
                f"model has interior breakpoints {model.breakpoints[1:-1]}"
            )
        return nodes, [None] * len(nodes)
    if mesh.scheme == collocation.CHEBYSHEV:
        return nodes, [None] * len(nodes)
    pieces = []
    tol = 1e-9 * model.period
    for interior in model.breakpoints[1:-1]:
        if min(abs(interior - b) for b in mesh.piece_breaks) > tol:
            raise MeshModelMismatchError(
                f"model breakpoint {interior} is not a mesh breakpoint"
            )
    n = mesh.degree
    for k in range(mesh.n_pieces):
        a, b = mesh.piece_breaks[k], mesh.piece_breaks[k + 1]
        owner = model.piece_of(0.5 * (a + b))
        pieces.extend([owner] * n)
    return nodes, pieces


def assemble(model: PeriodicModel, mesh: collocation.Mesh) -> DiscretePencil:
    """Assemble the discrete pencil (B_N, M_N) of a model on a mesh."""
    nodes, piece_ids = _collocation_points(model, mesh)
    d = model.d
    n = len(nodes) * d
    big_b = np.zeros((n, n))
    big_m = np.kron(collocation.periodic_diff_matrix(mesh), np.eye(d))
    for i, (t, piece) in enumerate(zip(nodes, piece_ids)):
        rows = slice(i * d, (i + 1) * d)
        big_b[rows, rows] = model.eval_B(t, piece)
        big_m[rows, rows] += model.eval_M(t, piece)
    return DiscretePencil(B_N=big_b, M_N=big_m, mesh=mesh, d=d, model=model)


def _polish_eigenpair(big_b, big_m, lam, residual_budget):
    """Inverse iteration on the pencil plus Rayleigh-quotient refinement.

    Solves (B - lambda M) y = M x repeatedly from the all-ones vector; the
    factorization tolerates the nearly singular shift (that is the point of
    inverse iteration), bumping the shift marginally if a pivot is exactly
    zero.  Returns (phi, lambda_refined, residual).
    """
    n = big_b.shape[0]
    shift = lam
    best = None
    for bump in range(4):
        try:
            fac = linalg.lu_factor(big_b - shift * big_m, singular_tol=0.0)
        except SingularMatrixError:
            shift = lam * (1.0 + 1e-13 * 10.0 ** bump) if lam != 0 else 1e-13
            continue
        x = np.ones(n)
        lam_rq = lam
        previous = np.inf
        for sweep in range(30):
            y = linalg.lu_solve(fac, big_m @ x)
            ninf = float(np.max(np.abs(y)))
            if not np.isfinite(ninf) or ninf == 0.0:
                break
            x = y / ninf
            bx, mx = big_b @ x, big_m @ x
            denom = float(x @ mx)
            if denom == 0.0:
                break
            lam_rq = float(x @ bx) / denom
            residual = float(np.max(np.abs(bx - lam_rq * mx)))
            if best is None or residual < best[2]:
                best = (x.copy(), lam_rq, residual)
            # iterate at least 3 times, then stop once progress stalls
            if sweep >= 2 and residual >= 0.5 * previous:
                break
            previous = residual
        if best is not None and best[2] <= residual_budget:
            return best
        shift = lam * (1.0 + 1e-13 * 10.0 ** bump) if lam != 0 else 1e-13
    if best is None:
        raise NoConvergenceError(
            f"inverse iteration on the pencil failed near lambda={lam!r}"
        )
    return best


def _finalize(pencil, lam, phi_flat, residual, spectrum, gap, strategy):
    phi_flat = np.real(phi_flat).astype(float).copy()
    k = int(np.argmax(np.abs(phi_flat)))
    if phi_flat[k] < 0:
        phi_flat = -phi_flat
    phi_flat /= np.max(np.abs(phi_flat))
    phi_flat[np.abs(phi_flat) < 1e-12] = 0.0  # floating-point dust
    n_nodes = pencil.n // pencil.d
    phi = phi_flat.reshape(n_nodes, pencil.d)
    nodes, piece_ids = _collocation_points(pencil.model, pencil.mesh)
    psi = np.zeros_like(phi)
    if lam > 0:
        for i, (t, piece) in enumerate(zip(nodes, piece_ids)):
            psi[i] = pencil.model.eval_B(t, piece) @ phi[i] / lam
    return SpectralSolution(
        r0=float(lam), spectrum=spectrum, phi=phi, psi=psi, mesh=pencil.mesh,
        model=pencil.model, residual=float(residual), dominance_gap=gap,
        strategy=strategy,
    )


def solve_r0(pencil: DiscretePencil, strategy: str = FULL_SPECTRUM,
             power_tol: float = 1e-10, power_max_iter: int = 10000) -> SpectralSolution:
    """Dominant eigenpair of the discrete pencil.

    ``full-spectrum`` computes all eigenvalues of inv(M_N)*B_N densely and
    requires a real nonnegative eigenvalue inside the dominance band
    (relative width 1e-8 around the maximum modulus), raising
    ``NoRealDominantError`` with the band contents otherwise.
    ``power-fast-path`` runs power iteration on x -> inv(M_N)(B_N x) using
    a single LU of M_N and returns only the dominant pair (it raises
    ``NoConvergenceError`` when there is no usable dominance gap, e.g. for
    splittings whose spectrum is symmetric under sign flip; callers then
    retry with the full spectrum).

    Both paths finish by polishing the pair on the pencil (inverse
    iteration + Rayleigh quotient) and enforcing the residual contract
    |B_N phi - r0 M_N phi| <= 1e-9 * (|B_N| + r0 |M_N|).
    """
    if strategy not in (FULL_SPECTRUM, POWER_FAST_PATH):
        raise ValueError(f"unknown strategy {strategy!r}")
    big_b, big_m = pencil.B_N, pencil.M_N
    try:
        m_fac = linalg.lu_factor(big_m, singular_tol=1e-12)
    except SingularMatrixError as exc:
        raise SingularCollocationMatrixError(
            f"assembled transition matrix is singular ({exc}); increase N"
        ) from exc

    if strategy == POWER_FAST_PATH:
        modulus, _ = linalg.power_iteration(
            lambda v: linalg.lu_solve(m_fac, big_b @ v), pencil.n,
            tol=power_tol, max_iter=power_max_iter,
        )
        if modulus == 0.0:
            return _finalize(pencil, 0.0, np.ones(pencil.n), 0.0, None, None,
                             strategy)
        phi, lam, residual = _polish_eigenpair(big_b, big_m, modulus,
                                               budget_for(modulus, big_b, big_m))
        _check_residual(residual, lam, big_b, big_m)
        return _finalize(pencil, lam, phi, residual, None, None, strategy)

    spectrum = linalg.eigenvalues_dense(linalg.lu_solve(m_fac, big_b))
    values = spectrum.values
    max_modulus = float(np.max(np.abs(values)))
    if max_modulus == 0.0:
        return _finalize(pencil, 0.0, np.ones(pencil.n), 0.0, spectrum, 1.0,
                         strategy)
    in_band = np.abs(values) >= max_modulus * (1.0 - DOMINANCE_RTOL)
    band = values[in_band]
    real_members = band[(np.abs(band.imag) <= DOMINANCE_RTOL * max_modulus)
                        & (band.real >= 0.0)]
    if real_members.size == 0:
        raise NoRealDominantError(
            "dominance band has no real nonnegative eigenvalue; band = "
            + np.array2string(np.sort_complex(band), precision=12),
            band=np.sort_complex(band),
        )
    lam0 = float(np.max(real_members.real))
    outside = np.abs(values[~in_band])
    gap = 1.0 - float(np.max(outside)) / max_modulus if outside.size else 1.0
    phi, lam, residual = _polish_eigenpair(big_b, big_m, lam0,
                                           budget_for(lam0, big_b, big_m))
    _check_residual(residual, lam, big_b, big_m)
    return _finalize(pencil, lam, phi, residual, spectrum, gap, strategy)


def budget_for(lam, big_b, big_m) -> float:
    """Residual budget of the eigenpair contract at eigenvalue lam."""
    return RESIDUAL_RTOL * (float(np.linalg.norm(big_b, np.inf))
                            + abs(lam) * float(np.linalg.norm(big_m, np.inf)))


def _check_residual(residual, lam, big_b, big_m):
    budget = budget_for(lam, big_b, big_m)
    if residual > budget:
        raise NoConvergenceError(
            f"pencil eigenpair residual {residual:.3e} exceeds budget {budget:.3e}"
        )


def eigenfunction_at(solution: SpectralSolution, t: float):
    """Interpolate (phi(t), psi(t)) from a spectral solution.

    phi is the barycentric interpolant of the nodal eigenfunction values;
    psi(t) = B(t) phi(t) / r0 (zero when r0 = 0).  At a node this returns
    the stored values exactly.
    """
    mesh = solution.mesh
    if mesh.scheme == collocation.FOURIER:
        full = solution.phi
    else:
        # value at t=0 equals the last unknown (the node at the period)
        full = np.vstack([solution.phi[-1], solution.phi])
    phi_t = np.atleast_1d(collocation.barycentric_eval(mesh, full, t))
    if solution.r0 > 0:
        psi_t = solution.model.eval_B(t) @ phi_t / solution.r0
    else:
        psi_t = np.zeros_like(phi_t)
    return phi_t, psi_t


def period_average(model: PeriodicModel):
    """Entrywise period averages (Bbar, Mbar) by per-piece trapezoid quadrature.

    4096 intervals per piece; for a full smooth period the trapezoid rule is
    spectrally accurate, and piecewise models are integrated piece by piece
    with one-sided endpoint evaluation.
    """
    d = model.d
    b_total = np.zeros((d, d))
    m_total = np.zeros((d, d))
    for k in range(model.n_pieces):
        a, b = model.breakpoints[k], model.breakpoints[k + 1]
        ts = np.linspace(a, b, _QUADRATURE_INTERVALS + 1)
        h = (b - a) / _QUADRATURE_INTERVALS
        bsum = np.zeros((d, d))
        msum = np.zeros((d, d))
        for j, t in enumerate(ts):
            w = 0.5 if j in (0, len(ts) - 1) else 1.0
            bsum += w * model.eval_B(t, k)
            msum += w * model.eval_M(t, k)
        b_total += h * bsum
        m_total += h * msum
    return b_total / model.period, m_total / model.period


def averaged_r0(model: PeriodicModel) -> float:
    """Reproduction number of the time-averaged (autonomous) problem.

    Spectral radius of Bbar * inv(Mbar).  Generally differs from the
    periodic reproduction number; the two coincide for constant
    coefficients.
    """
    b_bar, m_bar = period_average(model)
    try:
        fac = linalg.lu_factor(m_bar, singular_tol=1e-12)
    except SingularMatrixError as exc:
        raise SingularAveragedMatrixError(
            f"period-averaged transition matrix is singular ({exc})"
        ) from exc
    # Bbar inv(Mbar) = solve(Mbar^T, Bbar^T)^T
    kernel = linalg.lu_solve_transposed(fac, b_bar.T).T
    return linalg.eigenvalues_dense(kernel).spectral_radius()

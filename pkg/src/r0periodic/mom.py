"""Monodromy baseline: reproduction numbers from one-period flow maps.

The reproduction number is the unique positive root of

    g(lambda) = rho(U_lambda(period, 0)) - 1,

where U_lambda is the principal matrix solution (the flow over one period)
of u' = (B(t)/lambda - M(t)) u.  This module integrates the matrix ODE with
an embedded Dormand-Prince 5(4) adaptive scheme (scipy's RK45), forcing the
model breakpoints as hard integration boundaries so discontinuous
coefficients never straddle a step, and solves g(lambda) = 0 by geometric
bracket expansion around the averaged-problem reproduction number followed
by Brent's method.

This path is the cross-validation baseline for the collocation solver: it
costs one full ODE integration per root-finder evaluation and yields only
the reproduction number, not the spectrum or the eigenfunctions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.integrate
import scipy.optimize

from . import linalg
from .errors import BracketFailureError, StepSizeUnderflowError
from .models import PeriodicModel
from .pencil import averaged_r0

__all__ = [
    "MonodromyResult",
    "MomSolveReport",
    "propagate",
    "monodromy",
    "mom_solve",
]

_BRACKET_HALF_WIDTH = 1.5   # initial bracket [r/1.5, r*1.5] around the averaged value
_MAX_EXPANSIONS = 60        # geometric bracket expansions (factor 2) before giving up
_RK_STAGES = 6              # new evaluations per Dormand-Prince step (FSAL reuse)


@dataclass(frozen=True)
class IntegratorStats:
    steps: int
    rejected_steps: int  # estimated from the evaluation count (FSAL accounting)
    n_evals: int
    rtol: float
    atol: float


@dataclass(frozen=True)
class MonodromyResult:
    """One-period flow map U_lambda(period, 0) and its spectral radius."""

    lam: float
    matrix: np.ndarray
    spectral_radius: float
    stats: IntegratorStats


@dataclass(frozen=True)
class MomSolveReport:
    """Root-solve outcome: reproduction number, bracket trace, effort."""

    r0: float
    bracket_history: tuple
    evaluations: int
    residual: float
    rtol_ode: float
    atol_ode: float
    tol_root: float


def propagate(model: PeriodicModel, lam: float, t_start: float, t_end: float,
              rtol: float = 1e-10, atol: float = 1e-12):
    """Flow map U_lambda(t_end, t_start) of u' = (B/lambda - M) u.

    The d columns are integrated as one matrix-valued system so they share
    a single step-size sequence.  Model breakpoints inside the window are
    hard step boundaries.  Returns (U, IntegratorStats).
    """
    if lam <= 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    if t_end < t_start:
        raise ValueError("t_end must be >= t_start")
    d = model.d
    u = np.eye(d)
    cuts = [t_start]
    for b in model.breakpoints:
        if t_start < b < t_end:
            cuts.append(b)
    cuts.append(t_end)
    steps = rejected = n_evals = 0
    for a, b in zip(cuts, cuts[1:]):
        piece = model.piece_of(0.5 * (a + b))

        def rhs(t, y, piece=piece):
            coeff = model.eval_B(t, piece) / lam - model.eval_M(t, piece)
            return (coeff @ y.reshape(d, d)).ravel()

        sol = scipy.integrate.solve_ivp(rhs, (a, b), u.ravel(), method="RK45",
                                        rtol=rtol, atol=atol)
        if not sol.success:
            raise StepSizeUnderflowError(
                f"integration failed on [{a}, {b}] at lambda={lam!r}: {sol.message}"
            )
        accepted = len(sol.t) - 1
        steps += accepted
        n_evals += sol.nfev
        rejected += max(0, (sol.nfev - 2) // _RK_STAGES - accepted)
        u = sol.y[:, -1].reshape(d, d)
    stats = IntegratorStats(steps=steps, rejected_steps=rejected,
                            n_evals=n_evals, rtol=rtol, atol=atol)
    return u, stats


def monodromy(model: PeriodicModel, lam: float, rtol: float = 1e-10,
              atol: float = 1e-12) -> MonodromyResult:
    """One-period flow map at the given lambda, with its spectral radius."""
    u, stats = propagate(model, lam, 0.0, model.period, rtol=rtol, atol=atol)
    radius = linalg.eigenvalues_dense(u).spectral_radius()
    return MonodromyResult(lam=float(lam), matrix=u, spectral_radius=radius,
                           stats=stats)


def mom_solve(model: PeriodicModel, rtol_ode: float = 1e-10,
              tol_root: float = 1e-8,
              atol_ode: Optional[float] = None) -> MomSolveReport:
    """Reproduction number by root finding on the monodromy spectral radius.

    The initial bracket is [r/1.5, 1.5*r] around the averaged-problem
    reproduction number; whichever endpoint fails to straddle the root is
    pushed outward by factors of 2 (at most 60 expansions, relying on the
    monotone decrease of the spectral radius in lambda), then Brent's
    method finishes with xtol = rtol = tol_root.  Raises
    ``BracketFailureError`` with the scan history when no sign change is
    found.
    """
    if atol_ode is None:
        atol_ode = max(1e-14, 1e-2 * rtol_ode)
    evals = 0

    def g(lam: float) -> float:
        nonlocal evals
        evals += 1
        return monodromy(model, lam, rtol=rtol_ode, atol=atol_ode).spectral_radius - 1.0

    center = averaged_r0(model)
    if center <= 0:
        center = 1.0
    lo, hi = center / _BRACKET_HALF_WIDTH, center * _BRACKET_HALF_WIDTH
    g_lo, g_hi = g(lo), g(hi)
    history = [(lo, hi, g_lo, g_hi)]
    expansions = 0
    while g_lo * g_hi > 0:
        if expansions >= _MAX_EXPANSIONS:
            raise BracketFailureError(
                f"no sign change of rho(U) - 1 after {_MAX_EXPANSIONS} bracket "
                f"expansions starting at the averaged value {center!r}",
                history=tuple(history),
            )
        if g_lo > 0:        # spectral radius > 1 on the whole bracket: root above
            hi *= 2.0
            g_hi = g(hi)
        else:               # spectral radius < 1 on the whole bracket: root below
            lo /= 2.0
            g_lo = g(lo)
        history.append((lo, hi, g_lo, g_hi))
        expansions += 1

    root = scipy.optimize.brentq(g, lo, hi, xtol=tol_root,
                                 rtol=max(4.0 * np.finfo(float).eps, tol_root))
    residual = abs(g(root))
    return MomSolveReport(
        r0=float(root), bracket_history=tuple(history), evaluations=evals,
        residual=float(residual), rtol_ode=rtol_ode, atol_ode=atol_ode,
        tol_root=tol_root,
    )

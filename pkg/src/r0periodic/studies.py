"""Convergence studies, reference values and parameter sweeps.

A convergence study solves the same model across a list of mesh sizes,
measures absolute errors against a reference value and classifies the decay
(geometric rate from a semilog fit, or algebraic order from a log-log fit,
whichever correlates better).  The reference is the model's closed form
when it has one, otherwise a trigonometric solve at N = 151 (the
self-reference protocol used for models without a closed form).

Mesh sizes fan out over a thread pool; results are assembled in input
order, so reports are deterministic.  The pool width is capped by the
``R0_NUM_THREADS`` environment variable (default: logical cores).  Runtimes
per solve are recorded for information only, after one discarded warm-up
solve at the smallest size.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from . import collocation, pencil
from .errors import NoRealDominantError
from .models import (
    PeriodicModel,
    SirParams,
    VectorHostParams,
    sir_model,
    vector_host_model,
)

__all__ = [
    "ConvergenceRow",
    "DecayFit",
    "ConvergenceReport",
    "SweepRow",
    "reference_value",
    "build_mesh",
    "solve_on_mesh",
    "convergence_study",
    "fit_decay",
    "vector_host_sweep",
    "sir_sweep",
    "worker_count",
]

REFERENCE_CLOSED_FORM = "closed-form"
REFERENCE_SELF = "fourier-n151"
_SELF_REFERENCE_N = 151


def worker_count() -> int:
    """Thread-pool width: R0_NUM_THREADS when set and valid, else logical cores."""
    raw = os.environ.get("R0_NUM_THREADS", "")
    try:
        n = int(raw)
        if n >= 1:
            return n
    except ValueError:
        pass
    return os.cpu_count() or 1


@dataclass(frozen=True)
class ConvergenceRow:
    n: int
    r0: float
    abs_error: float
    runtime: float
    dominant_real: bool  # False when the dominant pair was complex (max-modulus fallback)


@dataclass(frozen=True)
class DecayFit:
    """Classification of an error sequence's decay.

    ``kind`` is "geometric" when log(err) vs N correlates better than
    log(err) vs log(N), else "algebraic".  ``geometric_rate`` is the per-N
    contraction factor p in err ~ p^(-N); ``algebraic_order`` the exponent
    in err ~ N^(-order).  Both fits are reported with their correlations;
    rows with error zero (or at rounding level) are excluded from fitting.
    """

    kind: str
    geometric_rate: float
    geometric_correlation: float
    algebraic_order: float
    algebraic_correlation: float


@dataclass(frozen=True)
class ConvergenceReport:
    rows: tuple
    reference: float
    reference_source: str
    fit: Optional[DecayFit]


@dataclass(frozen=True)
class SweepRow:
    value: float
    results: dict


def build_mesh(method: str, n: int, model: PeriodicModel,
               breakpoints: Optional[Sequence[float]] = None,
               allow_even: bool = False) -> collocation.Mesh:
    """Mesh factory shared by the harness and the CLI.

    ``chebyshev-piecewise`` defaults its breakpoint grid to the model's own
    breakpoints.
    """
    if method == "fourier":
        return collocation.fourier_mesh(n, model.period, allow_even=allow_even)
    if method == "chebyshev":
        return collocation.chebyshev_mesh(n, model.period)
    if method == "chebyshev-piecewise":
        breaks = tuple(breakpoints) if breakpoints is not None else model.breakpoints
        return collocation.piecewise_chebyshev_mesh(breaks, n)
    raise ValueError(f"unknown method {method!r}")


def solve_on_mesh(model: PeriodicModel, method: str, n: int,
                  strategy: str = pencil.FULL_SPECTRUM,
                  breakpoints: Optional[Sequence[float]] = None,
                  allow_even: bool = False) -> pencil.SpectralSolution:
    mesh = build_mesh(method, n, model, breakpoints, allow_even)
    return pencil.solve_r0(pencil.assemble(model, mesh), strategy=strategy)


def reference_value(model: PeriodicModel):
    """Reference reproduction number for error measurement.

    Returns (value, source): the model's closed form when available,
    otherwise a trigonometric solve at N = 151 (requires breakpoint-free
    coefficients; models with interior breakpoints must provide a closed
    form to be used in convergence studies).
    """
    if model.r0_closed_form is not None:
        return float(model.r0_closed_form), REFERENCE_CLOSED_FORM
    solution = solve_on_mesh(model, "fourier", _SELF_REFERENCE_N)
    return solution.r0, REFERENCE_SELF


def _r0_for_error_row(model, method, n, strategy, breakpoints):
    """Reproduction-number approximation for an error table row.

    Preasymptotic meshes can put a spurious complex-conjugate pair at the
    top of the spectrum, which the strict solver refuses; error tables fall
    back to the dominant modulus (the quantity the approximation actually
    controls) and flag the row.
    """
    try:
        solution = solve_on_mesh(model, method, n, strategy, breakpoints)
        return solution.r0, True
    except NoRealDominantError as exc:
        return float(np.max(np.abs(exc.band))), False


def convergence_study(model: PeriodicModel, method: str, n_values: Sequence[int],
                      strategy: str = pencil.FULL_SPECTRUM,
                      breakpoints: Optional[Sequence[float]] = None,
                      reference: Optional[float] = None) -> ConvergenceReport:
    """Error table over mesh sizes, with decay classification."""
    n_values = list(n_values)
    if sorted(set(n_values)) != n_values:
        raise ValueError("mesh sizes must be strictly increasing")
    if reference is None:
        ref, source = reference_value(model)
    else:
        ref, source = float(reference), "caller-supplied"

    # warm-up at the smallest size; its timing is discarded
    _r0_for_error_row(model, method, n_values[0], strategy, breakpoints)

    def one(n: int) -> ConvergenceRow:
        start = time.perf_counter()
        r0, dominant_real = _r0_for_error_row(model, method, n, strategy,
                                              breakpoints)
        elapsed = time.perf_counter() - start
        return ConvergenceRow(n=n, r0=r0, abs_error=abs(r0 - ref),
                              runtime=elapsed, dominant_real=dominant_real)

    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        rows = tuple(pool.map(one, n_values))
    return ConvergenceReport(rows=rows, reference=ref, reference_source=source,
                             fit=fit_decay([(r.n, r.abs_error) for r in rows]))


def fit_decay(points) -> Optional[DecayFit]:
    """Least-squares decay classification of an (N, error) table."""
    clean = [(n, e) for n, e in points if e > 0 and math.isfinite(e)]
    if len(clean) < 3:
        return None
    ns = np.array([n for n, _ in clean], dtype=float)
    log_err = np.log([e for _, e in clean])

    def line_fit(x):
        slope, _ = np.polyfit(x, log_err, 1)
        corr = float(np.corrcoef(x, log_err)[0, 1])
        return slope, corr

    slope_geo, corr_geo = line_fit(ns)
    slope_alg, corr_alg = line_fit(np.log(ns))
    kind = "geometric" if abs(corr_geo) >= abs(corr_alg) else "algebraic"
    return DecayFit(
        kind=kind,
        geometric_rate=float(np.exp(-slope_geo)),
        geometric_correlation=corr_geo,
        algebraic_order=float(-slope_alg),
        algebraic_correlation=corr_alg,
    )


def vector_host_sweep(params: VectorHostParams, values: Sequence[float], n: int,
                      strategy: str = pencil.FULL_SPECTRUM) -> tuple:
    """Seasonality sweep of the vector-host family.

    For each amplitude the basic reproduction number and both
    type-reproduction numbers are solved on the same mesh size, together
    with their averaged-problem counterparts.
    """
    def one(delta: float) -> SweepRow:
        results = {}
        for splitting, key in (("r0", "r0"), ("host-type", "t_h"),
                               ("vector-type", "t_v")):
            model = vector_host_model(replace(params, seasonality=delta,
                                              splitting=splitting))
            results[key] = solve_on_mesh(model, "fourier", n, strategy).r0
            results["averaged_" + key] = pencil.averaged_r0(model)
        results["r0_squared"] = results["r0"] ** 2
        results["averaged_r0_squared"] = results["averaged_r0"] ** 2
        return SweepRow(value=float(delta), results=results)

    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        return tuple(pool.map(one, values))


_SIR_SWEEPABLE = ("amplitude", "phase", "q")


def sir_sweep(params: SirParams, parameter: str, values: Sequence[float],
              n: int, method: str = "fourier",
              strategy: str = pencil.FULL_SPECTRUM) -> tuple:
    """Parameter sweep of the SIR family: periodic vs averaged reproduction number."""
    if parameter not in _SIR_SWEEPABLE:
        raise ValueError(f"cannot sweep {parameter!r}; choose one of {_SIR_SWEEPABLE}")

    def one(value: float) -> SweepRow:
        if parameter == "q":
            swept = replace(params, q=float(value))
        else:
            swept = replace(params, contact=replace(params.contact,
                                                    **{parameter: float(value)}))
        model = sir_model(swept)
        solution = solve_on_mesh(model, method, n, strategy)
        return SweepRow(value=float(value), results={
            "r0": solution.r0,
            "averaged_r0": pencil.averaged_r0(model),
            "closed_form": model.r0_closed_form,
        })

    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        return tuple(pool.map(one, values))

"""Benchmark model factories: periodic linear(ized) infection dynamics.

Every model describes u'(t) = B(t) u(t) - M(t) u(t) over one period, with
B(t) entrywise nonnegative (new infections) and -M(t) Metzler with
nonpositive diagonal (transitions, recovery, mortality), so the transition
flow is dissipative and the reproduction number is well defined.

The canonical time unit is YEARS.  Factories whose literature parameters
are quoted per day (the vector-host family) multiply them by 365 on
construction; that conversion lives here and nowhere else.

Two families are provided:

* a multi-group SIR linearization with seasonal contact rate, which has a
  closed-form reproduction number and generalized eigenfunction and is the
  main convergence benchmark;
* a five-compartment vector-host linearization (exposed/asymptomatic/
  symptomatic humans, exposed/infectious vectors) with seasonal vector
  recruitment, supporting three birth/transition splittings that yield the
  basic reproduction number and the host/vector type-reproduction numbers.

A third factory wraps user-supplied sampled coefficients for custom models.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.integrate

__all__ = [
    "PeriodicModel",
    "Contact",
    "SirParams",
    "VectorHostParams",
    "contact_rate",
    "sir_model",
    "sir_r0_exact",
    "sir_eigenfunction_exact",
    "vector_host_model",
    "sampled_model",
    "DAYS_PER_YEAR",
]

DAYS_PER_YEAR = 365.0

# Normalizes the period average of the skewed rational contact rate to 1.
_F2_KAPPA = 1.0 / (2.5 - 123.0 * math.sqrt(5.0) / 250.0)

SPLITTING_R0 = "r0"
SPLITTING_HOST = "host-type"
SPLITTING_VECTOR = "vector-type"


@dataclass(frozen=True)
class PeriodicModel:
    """Periodic coefficient pair (B, M) with breakpoint and smoothness metadata.

    ``birth`` and ``transition`` are evaluators ``f(t, piece) -> (d, d)``
    array.  ``piece`` is the index into the model's own breakpoint grid, or
    None for pointwise evaluation; factories with jump discontinuities use
    the piece index to return the one-sided limit, so collocation schemes
    aligned with the breakpoints never sample across a jump.  Evaluators are
    only queried on [0, period]; periodicity is by construction.

    ``smoothness`` is one of "analytic", "smooth", "piecewise-analytic" or
    "lipschitz-<s>" and is used by reporting only.  ``r0_closed_form`` is
    set by factories that have one; convergence studies use it as the
    reference value.
    """

    d: int
    period: float
    birth: Callable[[float, Optional[int]], np.ndarray]
    transition: Callable[[float, Optional[int]], np.ndarray]
    breakpoints: tuple = ()
    smoothness: str = "smooth"
    label: str = ""
    r0_closed_form: Optional[float] = None

    def __post_init__(self):
        if self.d < 1:
            raise ValueError(f"dimension must be >= 1, got {self.d}")
        if not self.period > 0:
            raise ValueError(f"period must be positive, got {self.period}")
        breaks = self.breakpoints or (0.0, self.period)
        breaks = tuple(float(b) for b in breaks)
        if breaks[0] != 0.0 or abs(breaks[-1] - self.period) > 1e-12 * self.period:
            raise ValueError(f"breakpoints must span [0, {self.period}], got {breaks}")
        if any(a >= b for a, b in zip(breaks, breaks[1:])):
            raise ValueError("breakpoints must be strictly increasing")
        object.__setattr__(self, "breakpoints", breaks)

    @property
    def n_pieces(self) -> int:
        return len(self.breakpoints) - 1

    def piece_of(self, t: float) -> int:
        """Index of the piece containing t (right-continuous at breakpoints)."""
        k = bisect.bisect_right(self.breakpoints, t) - 1
        return min(max(k, 0), self.n_pieces - 1)

    def eval_B(self, t: float, piece: Optional[int] = None) -> np.ndarray:
        return self.birth(t, piece)

    def eval_M(self, t: float, piece: Optional[int] = None) -> np.ndarray:
        return self.transition(t, piece)


@dataclass(frozen=True)
class Contact:
    """Seasonal contact-rate choice for the SIR family.

    kind "F1": sinusoidal, 1 + amplitude*sin(2*pi*t/period - phase);
    kind "F2": skewed rational with unit period average (no parameters);
    kind "F3": two-level on/off square wave, 1.2 on [0, 0.4] and [0.6, 1]
    of the scaled period and 0.2 in between (closed intervals at the jumps).
    """

    kind: str = "F1"
    amplitude: float = 0.6
    phase: float = 0.2

    def __post_init__(self):
        if self.kind not in ("F1", "F2", "F3"):
            raise ValueError(f"unknown contact kind {self.kind!r}")
        if self.kind == "F1" and not (0.0 <= self.amplitude < 1.0):
            raise ValueError(f"amplitude must be in [0, 1), got {self.amplitude}")
        if self.kind == "F1" and not (0.0 <= self.phase < 1.0):
            raise ValueError(f"phase must be in [0, 1), got {self.phase}")


def contact_rate(contact: Contact, t: float, period: float = 1.0,
                 piece: Optional[int] = None) -> float:
    """Evaluate the contact multiplier f(t) > 0.

    For the square wave ("F3") the optional ``piece`` (0, 1 or 2 on the
    breakpoint grid {0, 0.4, 0.6, 1}*period) selects the one-sided constant;
    pointwise evaluation follows the closed-interval definition, so the
    value AT the jumps 0.4*period and 0.6*period is the high level.
    """
    x = t / period
    if contact.kind == "F1":
        return 1.0 + contact.amplitude * math.sin(2.0 * math.pi * x - contact.phase)
    if contact.kind == "F2":
        s = math.sin(2.0 * math.pi * x)
        return _F2_KAPPA + _F2_KAPPA * (0.68 + s) / (1.0 + (2.0 / 3.0) * s)
    if piece is not None:
        return 0.2 + (0.0 if piece == 1 else 1.0)
    x %= 1.0
    return 0.2 + (1.0 if (x <= 0.4 or x >= 0.6) else 0.0)


@dataclass(frozen=True)
class SirParams:
    """Multi-group SIR linearization parameters (rates per year).

    Defaults are the measles-inspired benchmark set: q = 60% infection
    probability per contact, mean infectious period 7 days (gamma =
    365/7 per year), mean life span 82 years, equal group sizes P = 1000,
    one-year period.
    """

    d: int = 1
    q: float = 0.6                  # probability of infection per contact
    gamma: float = DAYS_PER_YEAR / 7.0   # recovery rate, 1/years
    mu: float = 1.0 / 82.0          # mortality rate, 1/years
    population: float = 1000.0      # group size, equal among groups
    contact: Contact = field(default_factory=Contact)
    period: float = 1.0             # years

    def __post_init__(self):
        if self.d < 1:
            raise ValueError(f"need at least one group, got d={self.d}")
        if not (0.0 <= self.q < 1.0):
            raise ValueError(f"q must be in [0, 1), got {self.q}")
        for name in ("gamma", "mu", "population", "period"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


def sir_model(params: SirParams) -> PeriodicModel:
    """Linearization of the seasonal multi-group SIR model at its infection-free state.

    With equal group sizes and a common contact multiplier f, every entry of
    the infection matrix is q*P*f(t)/d and the transition matrix is the
    constant diagonal gamma + mu.  The square-wave contact choice
    contributes breakpoints at 0.4 and 0.6 of the period.
    """
    d, tau = params.d, params.period
    amplitude = params.q * params.population / d
    loss = params.gamma + params.mu
    block = np.ones((d, d))
    m_const = loss * np.eye(d)
    contact = params.contact

    def birth(t, piece=None):
        return (amplitude * contact_rate(contact, t, tau, piece)) * block

    def transition(t, piece=None):
        return m_const

    if contact.kind == "F3":
        breaks = (0.0, 0.4 * tau, 0.6 * tau, tau)
        smoothness = "piecewise-analytic"
    else:
        breaks = (0.0, tau)
        smoothness = "analytic"
    return PeriodicModel(
        d=d, period=tau, birth=birth, transition=transition,
        breakpoints=breaks, smoothness=smoothness,
        label=f"sir-{contact.kind.lower()}-d{d}",
        r0_closed_form=sir_r0_exact(params),
    )


def _contact_average(contact: Contact, period: float) -> float:
    """Period average of f by composite trapezoid, piece by piece."""
    if contact.kind == "F3":
        # constant on each piece, so the average is exact
        return 0.4 * 1.2 + 0.2 * 0.2 + 0.4 * 1.2
    t = np.linspace(0.0, period, 4097)
    f = np.array([contact_rate(contact, x, period) for x in t])
    return float(np.trapezoid(f, t)) / period


def sir_r0_exact(params: SirParams) -> float:
    """Closed-form reproduction number of the SIR benchmark.

    The period average of the infection matrix diagonal, summed over
    groups, divided by the per-capita loss rate:
    q*P*avg(f) / (gamma + mu).  Independent of the number of groups.
    """
    avg_f = _contact_average(params.contact, params.period)
    return params.q * params.population * avg_f / (params.gamma + params.mu)


def _contact_integral(contact: Contact, period: float, t: float) -> float:
    """Integral of f over [0, t], split at the square-wave jumps."""
    if contact.kind == "F3":
        total = 0.0
        for a, b, level in ((0.0, 0.4, 1.2), (0.4, 0.6, 0.2), (0.6, 1.0, 1.2)):
            lo, hi = a * period, b * period
            if t <= lo:
                break
            total += level * (min(t, hi) - lo)
        return total
    value, _ = scipy.integrate.quad(
        lambda s: contact_rate(contact, s, period), 0.0, t,
        epsabs=1e-13, epsrel=1e-13, limit=200,
    )
    return value


def sir_eigenfunction_exact(params: SirParams, t: float) -> np.ndarray:
    """Closed-form generalized eigenfunction of the SIR benchmark (unnormalized).

    Component j equals P * exp(q*P*F(t)/R0 - (gamma+mu)*t) with F the
    running integral of the contact multiplier; it is periodic because the
    full-period integral identity q*P*avg(f)*period = R0*(gamma+mu)*period
    closes the orbit.  Used as the oracle for interpolated eigenfunctions.
    """
    r0 = sir_r0_exact(params)
    intf = _contact_integral(params.contact, params.period, t)
    exponent = (params.q * params.population * intf) / r0 \
        - (params.gamma + params.mu) * t
    return params.population * math.exp(exponent) * np.ones(params.d)


@dataclass(frozen=True)
class VectorHostParams:
    """Vector-host linearization parameters (rates per day, Chikungunya-like).

    All rates are per day as usually quoted and are converted to years by
    the factory.  ``seasonality`` is the amplitude delta in the vector
    recruitment factor f(t) = exp(delta*sin(2*pi*t/period)); delta < 1.
    ``recovery`` defaults to 1/3.5 per day (mean infectious period 3.5
    days), the value consistent with the benchmark reproduction numbers;
    override it to explore other infectious periods.
    """

    biting_rate: float = 0.09           # mosquito bites per day
    q_host_from_vector: float = 0.65    # transmission probability per bite, V -> H
    q_vector_from_host: float = 0.85    # transmission probability per bite, H -> V
    latency_exit_host: float = 1.0 / 2.5    # 1/days (mean human latency 2.5 d)
    latency_exit_vector: float = 1.0 / 1.5  # 1/days (mean mosquito latency 1.5 d)
    symptomatic_fraction: float = 0.82
    recovery: float = 1.0 / 3.5         # 1/days (mean human infectious period)
    vector_mortality: float = 1.0 / 20.0    # 1/days (mean mosquito life span 20 d)
    vector_host_ratio: float = 10.0     # initial mosquito / human population ratio
    seasonality: float = 0.8            # delta, amplitude of the recruitment factor
    period: float = 1.0                 # years
    splitting: str = SPLITTING_R0

    def __post_init__(self):
        for name in ("biting_rate", "latency_exit_host", "latency_exit_vector",
                     "recovery", "vector_mortality", "vector_host_ratio", "period"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        for name in ("q_host_from_vector", "q_vector_from_host",
                     "symptomatic_fraction"):
            if not (0.0 <= getattr(self, name) <= 1.0):
                raise ValueError(f"{name} must be in [0, 1]")
        if not (0.0 <= self.seasonality < 1.0):
            raise ValueError(f"seasonality must be in [0, 1), got {self.seasonality}")
        if self.splitting not in (SPLITTING_R0, SPLITTING_HOST, SPLITTING_VECTOR):
            raise ValueError(f"unknown splitting {self.splitting!r}")


def vector_host_model(params: VectorHostParams) -> PeriodicModel:
    """Vector-host linearization at the infection-free periodic state.

    State ordering: (E_H, A_H, I_H, E_V, I_V).  Infections enter at two
    points: vectors infect susceptible humans (entry (1, 5) of the host
    infection matrix) and both infectious human classes infect susceptible
    vectors (entries (4, 2) and (4, 3), scaled by the seasonal vector
    population r*f(t)).  The baseline transition matrix collects latency
    exits (split between the asymptomatic and symptomatic branch by the
    symptomatic fraction), recovery and vector mortality.

    The ``splitting`` selects which infection route counts as birth:

    * "r0": both routes are births, transition is the baseline; the
      dominant eigenvalue is the basic reproduction number.
    * "host-type": only vector-to-host infections are births; the
      vector-infection route moves into the transition part.  Dominant
      eigenvalue: host type-reproduction number.
    * "vector-type": the mirror image, giving the vector type-reproduction
      number.
    """
    y = DAYS_PER_YEAR
    b = params.biting_rate * y
    nu_h = params.latency_exit_host * y
    nu_v = params.latency_exit_vector * y
    gamma = params.recovery * y
    mu = params.vector_mortality * y
    omega = params.symptomatic_fraction
    delta = params.seasonality
    tau = params.period

    host_infection = np.zeros((5, 5))
    host_infection[0, 4] = b * params.q_host_from_vector
    vector_infection = np.zeros((5, 5))
    rate_vh = b * params.q_vector_from_host * params.vector_host_ratio
    vector_infection[3, 1] = vector_infection[3, 2] = rate_vh
    baseline = np.array([
        [nu_h, 0.0, 0.0, 0.0, 0.0],
        [-(1.0 - omega) * nu_h, gamma, 0.0, 0.0, 0.0],
        [-omega * nu_h, 0.0, gamma, 0.0, 0.0],
        [0.0, 0.0, 0.0, nu_v + mu, 0.0],
        [0.0, 0.0, 0.0, -nu_v, mu],
    ])

    def season(t):
        return math.exp(delta * math.sin(2.0 * math.pi * t / tau))

    splitting = params.splitting
    if splitting == SPLITTING_R0:
        def birth(t, piece=None):
            return host_infection + season(t) * vector_infection

        def transition(t, piece=None):
            return baseline
    elif splitting == SPLITTING_HOST:
        def birth(t, piece=None):
            return host_infection

        def transition(t, piece=None):
            return baseline - season(t) * vector_infection
    else:
        def birth(t, piece=None):
            return season(t) * vector_infection

        def transition(t, piece=None):
            return baseline - host_infection

    return PeriodicModel(
        d=5, period=tau, birth=birth, transition=transition,
        breakpoints=(0.0, tau), smoothness="analytic",
        label=f"vector-host-{splitting}-delta{delta:g}",
    )


def sampled_model(d: int, period: float, pieces, smoothness: str = "smooth",
                  label: str = "custom-samples") -> PeriodicModel:
    """Model defined by sampled coefficients, interpolated per piece.

    ``pieces`` is a sequence of (start, end, samples) covering [0, period]
    contiguously, where samples is a nonempty list of (t, B, M) with
    distinct times inside [start, end] and (d, d) coefficient arrays.
    Within each piece the coefficients are interpolated entrywise by the
    barycentric Lagrange polynomial through the piece's sample times (a
    constant for a single sample).  This is an escape hatch for models not
    covered by the built-in factories; accuracy is the caller's business.
    """
    starts, ends, tables = [], [], []
    for start, end, samples in pieces:
        start, end = float(start), float(end)
        if not samples:
            raise ValueError("each piece needs at least one sample")
        times = np.array([float(t) for t, _, _ in samples])
        if np.unique(times).size != times.size:
            raise ValueError("sample times within a piece must be distinct")
        if np.any(times < start - 1e-12) or np.any(times > end + 1e-12):
            raise ValueError(f"sample times must lie in [{start}, {end}]")
        order = np.argsort(times)
        times = times[order]
        b_values = np.array([np.asarray(samples[i][1], dtype=float) for i in order])
        m_values = np.array([np.asarray(samples[i][2], dtype=float) for i in order])
        for name, arr in (("B", b_values), ("M", m_values)):
            if arr.shape[1:] != (d, d):
                raise ValueError(f"{name} samples must be {d}x{d}, got {arr.shape[1:]}")
        if times.size == 1:
            weights = np.ones(1)
        else:
            gaps = times[:, None] - times[None, :]
            np.fill_diagonal(gaps, 1.0)
            weights = 1.0 / np.prod(gaps / np.max(np.abs(gaps)), axis=1)
        starts.append(start)
        ends.append(end)
        tables.append((times, weights, b_values, m_values))

    breaks = tuple(starts) + (ends[-1],)
    if any(abs(e - s) > 1e-9 for e, s in zip(ends[:-1], starts[1:])):
        raise ValueError("pieces must tile the period contiguously")

    def interpolate(table, t):
        times, weights, b_values, m_values = table
        if times.size == 1:
            return b_values[0], m_values[0]
        gaps = t - times
        hit = np.abs(gaps) < 1e-14 * max(1.0, abs(t))
        if np.any(hit):
            i = int(np.argmax(hit))
            return b_values[i], m_values[i]
        kernel = weights / gaps
        denom = kernel.sum()
        return (np.tensordot(kernel, b_values, axes=1) / denom,
                np.tensordot(kernel, m_values, axes=1) / denom)

    def resolve(t, piece):
        if piece is None:
            piece = min(max(bisect.bisect_right(breaks, t) - 1, 0), len(tables) - 1)
        return tables[piece]

    def birth(t, piece=None):
        return interpolate(resolve(t, piece), t)[0]

    def transition(t, piece=None):
        return interpolate(resolve(t, piece), t)[1]

    return PeriodicModel(d=d, period=period, birth=birth, transition=transition,
                         breakpoints=breaks, smoothness=smoothness, label=label)

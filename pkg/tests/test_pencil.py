"""Pencil assembly, dominant-eigenpair solve, eigenfunctions, averaging."""

import math

import numpy as np
import pytest

from r0periodic.collocation import (
    chebyshev_mesh,
    fourier_diff_matrix,
    fourier_mesh,
    piecewise_chebyshev_mesh,
)
from r0periodic.errors import (
    MeshModelMismatchError,
    NoConvergenceError,
    NoRealDominantError,
    SingularAveragedMatrixError,
    SingularCollocationMatrixError,
)
from r0periodic.models import (
    Contact,
    PeriodicModel,
    SirParams,
    VectorHostParams,
    sir_eigenfunction_exact,
    sir_model,
    vector_host_model,
)
from r0periodic.pencil import (
    DiscretePencil,
    assemble,
    averaged_r0,
    eigenfunction_at,
    period_average,
    rescale_to_unit_period,
    solve_r0,
)
from r0periodic.studies import convergence_study, fit_decay, solve_on_mesh

SIR_R0 = 11.504158733340011
VH_R0_N25 = 1.785206757378213   # benchmark table value at N=25, delta=0.8


def constant_model(b0, m0, period=1.0):
    b0 = np.atleast_2d(np.asarray(b0, dtype=float))
    m0 = np.atleast_2d(np.asarray(m0, dtype=float))

    return PeriodicModel(
        d=b0.shape[0], period=period,
        birth=lambda t, piece=None: b0,
        transition=lambda t, piece=None: m0,
        breakpoints=(0.0, period), smoothness="analytic", label="constant",
    )


class TestRescale:
    def test_unit_period_is_identity(self):
        model = sir_model(SirParams())
        assert rescale_to_unit_period(model) is model

    def test_constant_coefficients(self):
        model = constant_model([[3.0]], [[1.5]], period=2.0)
        scaled = rescale_to_unit_period(model)
        assert scaled.period == 1.0
        assert scaled.eval_B(0.3)[0, 0] == pytest.approx(6.0)
        assert scaled.eval_M(0.3)[0, 0] == pytest.approx(3.0)
        # the reproduction number b0/m0 is unchanged
        for m, n in ((model, 5), (scaled, 5)):
            solution = solve_r0(assemble(m, fourier_mesh(n, m.period)))
            assert solution.r0 == pytest.approx(2.0, abs=1e-12)

    def test_sir_in_days_matches_sir_in_years(self):
        years = sir_model(SirParams())
        q, pop = 0.6, 1000.0
        gamma_day, mu_day = (365.0 / 7.0) / 365.0, (1.0 / 82.0) / 365.0
        contact = Contact("F1")

        def birth(t, piece=None):
            from r0periodic.models import contact_rate
            return np.array([[q * pop * contact_rate(contact, t, 365.0) / 365.0]])

        def transition(t, piece=None):
            return np.array([[gamma_day + mu_day]])

        days = PeriodicModel(d=1, period=365.0, birth=birth,
                             transition=transition, breakpoints=(0.0, 365.0),
                             smoothness="analytic", label="sir-days")
        r_years = solve_r0(assemble(years, fourier_mesh(35, 1.0))).r0
        r_days = solve_r0(assemble(days, fourier_mesh(35, 365.0))).r0
        r_rescaled = solve_r0(
            assemble(rescale_to_unit_period(days), fourier_mesh(35, 1.0))).r0
        assert abs(r_years - r_days) <= 1e-10
        assert abs(r_years - r_rescaled) <= 1e-10

    def test_breakpoints_rescaled(self):
        model = sir_model(SirParams(contact=Contact("F3"), period=2.0))
        scaled = rescale_to_unit_period(model)
        assert scaled.breakpoints == (0.0, 0.4, 0.6, 1.0)


class TestAssemble:
    def test_constant_scalar_structure(self):
        mesh = fourier_mesh(3, 1.0)
        pencil = assemble(constant_model([[2.0]], [[1.0]]), mesh)
        assert np.allclose(pencil.B_N, 2.0 * np.eye(3), atol=0)
        expected_m = fourier_diff_matrix(mesh).matrix + np.eye(3)
        assert np.allclose(pencil.M_N, expected_m, atol=0)

    def test_block_structure(self):
        model = sir_model(SirParams(d=2))
        mesh = fourier_mesh(5, 1.0)
        pencil = assemble(model, mesh)
        for i, t in enumerate(mesh.nodes):
            block = pencil.B_N[2 * i:2 * i + 2, 2 * i:2 * i + 2]
            assert np.allclose(block, model.eval_B(t), atol=0)
        off_block = pencil.B_N.copy()
        for i in range(5):
            off_block[2 * i:2 * i + 2, 2 * i:2 * i + 2] = 0.0
        assert np.all(off_block == 0.0)

    def test_sir_dominant_eigenvalue_benchmark(self):
        model = sir_model(SirParams())
        solution = solve_r0(assemble(model, fourier_mesh(35, 1.0)))
        assert abs(solution.r0 - SIR_R0) <= 1.3e-11

    def test_fourier_rejects_breakpoints(self):
        model = sir_model(SirParams(contact=Contact("F3")))
        with pytest.raises(MeshModelMismatchError):
            assemble(model, fourier_mesh(25, 1.0))

    def test_period_mismatch(self):
        with pytest.raises(MeshModelMismatchError):
            assemble(sir_model(SirParams()), fourier_mesh(25, 2.0))

    def test_piecewise_mesh_must_cover_model_breakpoints(self):
        model = sir_model(SirParams(contact=Contact("F3")))
        with pytest.raises(MeshModelMismatchError):
            assemble(model, piecewise_chebyshev_mesh((0.0, 0.5, 1.0), 8))
        # the aligned grid is fine, and so is a refinement
        assemble(model, piecewise_chebyshev_mesh((0.0, 0.4, 0.6, 1.0), 8))
        assemble(model, piecewise_chebyshev_mesh((0.0, 0.2, 0.4, 0.6, 1.0), 8))

    def test_single_piece_chebyshev_allowed_on_discontinuous_model(self):
        model = sir_model(SirParams(contact=Contact("F3")))
        pencil = assemble(model, chebyshev_mesh(16, 1.0))
        assert pencil.n == 16


class TestSolveR0:
    def test_constant_coefficients(self):
        solution = solve_r0(assemble(constant_model([[2.0]], [[1.0]]),
                                     fourier_mesh(5, 1.0)))
        assert solution.r0 == pytest.approx(2.0, abs=1e-12)
        assert np.allclose(solution.phi, 1.0, atol=1e-12)

    def test_sir_n25_error_matches_benchmark(self):
        model = sir_model(SirParams())
        solution = solve_r0(assemble(model, fourier_mesh(25, 1.0)))
        assert abs(solution.r0 - SIR_R0) == pytest.approx(2.67e-7, rel=0.05)

    def test_chebyshev_errors_decrease_on_smooth_rational(self):
        model = sir_model(SirParams(contact=Contact("F2")))
        errors = [abs(solve_on_mesh(model, "chebyshev", n).r0 - SIR_R0)
                  for n in (40, 80)]
        assert errors[1] < errors[0]

    def test_vector_host_benchmark_value(self):
        model = vector_host_model(VectorHostParams(seasonality=0.8))
        solution = solve_r0(assemble(model, fourier_mesh(25, 1.0)))
        assert abs(solution.r0 - VH_R0_N25) <= 1e-11

    def test_residual_contract(self):
        for model, n in ((sir_model(SirParams()), 25),
                         (vector_host_model(VectorHostParams()), 15)):
            pencil = assemble(model, fourier_mesh(n, 1.0))
            solution = solve_r0(pencil)
            scale = (np.linalg.norm(pencil.B_N, np.inf)
                     + solution.r0 * np.linalg.norm(pencil.M_N, np.inf))
            residual = np.max(np.abs(pencil.B_N @ solution.phi.ravel()
                                     - solution.r0 * (pencil.M_N @ solution.phi.ravel())))
            assert residual <= 1e-9 * scale
            assert np.max(np.abs(solution.phi)) == pytest.approx(1.0)

    def test_phi_orientation_and_clamping(self):
        solution = solve_r0(assemble(sir_model(SirParams()), fourier_mesh(25, 1.0)))
        assert np.all(solution.phi >= 0.0)
        assert solution.psi.shape == solution.phi.shape

    def test_no_real_dominant(self):
        mesh = fourier_mesh(3, 1.0)
        model = constant_model([[1.0]], [[1.0]])
        pencil = DiscretePencil(
            B_N=np.array([[0.0, -2.0, 0.0], [2.0, 0.0, 0.0], [0.0, 0.0, 1.0]]),
            M_N=np.eye(3), mesh=mesh, d=1, model=model,
        )
        with pytest.raises(NoRealDominantError) as excinfo:
            solve_r0(pencil)
        band = excinfo.value.band
        assert np.allclose(np.sort_complex(band), [-2j, 2j])

    def test_singular_transition_matrix(self):
        model = constant_model([[1.0]], [[0.0]])
        with pytest.raises(SingularCollocationMatrixError):
            solve_r0(assemble(model, fourier_mesh(3, 1.0)))

    def test_unknown_strategy(self):
        pencil = assemble(sir_model(SirParams()), fourier_mesh(5, 1.0))
        with pytest.raises(ValueError):
            solve_r0(pencil, strategy="magic")


class TestPowerFastPath:
    def test_agrees_with_dense_on_sir(self):
        pencil = assemble(sir_model(SirParams()), fourier_mesh(25, 1.0))
        dense = solve_r0(pencil)
        power = solve_r0(pencil, strategy="power-fast-path")
        assert abs(dense.r0 - power.r0) <= 1e-9
        assert power.spectrum is None and dense.spectrum is not None

    def test_agrees_with_dense_on_host_type(self):
        model = vector_host_model(VectorHostParams(splitting="host-type"))
        pencil = assemble(model, fourier_mesh(25, 1.0))
        dense = solve_r0(pencil)
        power = solve_r0(pencil, strategy="power-fast-path")
        assert abs(dense.r0 - power.r0) <= 1e-9

    def test_sign_symmetric_spectrum_fails_over_to_dense(self):
        # the full splitting has a -r0 mirror eigenvalue: no dominance gap
        model = vector_host_model(VectorHostParams())
        pencil = assemble(model, fourier_mesh(15, 1.0))
        with pytest.raises(NoConvergenceError):
            solve_r0(pencil, strategy="power-fast-path", power_max_iter=800)
        # the documented fallback path:
        solution = solve_r0(pencil)
        assert solution.r0 > 0


class TestConstantCollapse:
    # R0_N equals the spectral radius of B0 inv(M0) for every N, both schemes;
    # oracle: the quadratic formula on the 2x2 next-generation matrix.
    B0 = np.array([[2.0, 1.0], [0.5, 1.0]])
    M0 = np.array([[3.0, 0.0], [-1.0, 2.0]])

    def oracle(self):
        k = self.B0 @ np.linalg.inv(self.M0)
        tr, det = np.trace(k), np.linalg.det(k)
        return (tr + math.sqrt(tr * tr - 4.0 * det)) / 2.0

    @pytest.mark.parametrize("scheme,n", [
        ("fourier", 3), ("fourier", 5), ("fourier", 15),
        ("chebyshev", 3), ("chebyshev", 4), ("chebyshev", 16),
    ])
    def test_collapse(self, scheme, n):
        model = constant_model(self.B0, self.M0)
        solution = solve_on_mesh(model, scheme, n)
        assert abs(solution.r0 - self.oracle()) <= 1e-10


class TestSchemeAgreement:
    def agreement(self, model, cheb_n):
        fourier = solve_on_mesh(model, "fourier", 41).r0
        chebyshev = solve_on_mesh(model, "chebyshev", cheb_n).r0
        return abs(fourier - chebyshev)

    @pytest.mark.xfail(
        strict=True,
        reason="a degree-60 algebraic polynomial has not converged past 1e-8 "
               "on these coefficients (measured gaps: 2.5e-8 sinusoidal, "
               "1.1e-4 skewed rational); see test_agreement_at_sufficient_degree",
    )
    def test_agreement_at_degree_60(self):
        models = [sir_model(SirParams()),
                  sir_model(SirParams(contact=Contact("F2"))),
                  vector_host_model(VectorHostParams())]
        assert all(self.agreement(m, 60) <= 1e-8 for m in models)

    def test_agreement_at_sufficient_degree(self):
        # degrees chosen past each coefficient's convergence knee
        cases = [
            (sir_model(SirParams()), 80),
            (sir_model(SirParams(contact=Contact("F2"))), 140),
            (vector_host_model(VectorHostParams()), 60),
        ]
        for model, cheb_n in cases:
            assert self.agreement(model, cheb_n) <= 1e-8


class TestCircleLaw:
    def deviations(self, n=101):
        solution = solve_on_mesh(sir_model(SirParams()), "fourier", n)
        values = solution.spectrum.values
        r0 = solution.r0
        kept = values[np.abs(values) > 1e-8 * r0]
        return np.abs(np.abs(kept - r0 / 2.0) - r0 / 2.0) / r0, kept, r0

    @pytest.mark.xfail(
        strict=True,
        reason="unresolved high-frequency eigenvalues sit O(1e-2) off the "
               "circle at every mesh size (verified against QZ and at N=201); "
               "only the resolved part of the spectrum obeys the circle law "
               "at 1e-6, see test_resolved_spectrum_on_circle",
    )
    def test_full_spectrum_on_circle(self):
        dev, _, _ = self.deviations()
        assert np.max(dev) <= 1e-6

    def test_resolved_spectrum_on_circle(self):
        # the larger-modulus half of the spectrum is fully resolved at N=101
        dev, kept, _ = self.deviations()
        order = np.argsort(-np.abs(kept))
        top_half = dev[order[:len(order) // 2 + 1]]
        assert np.max(top_half) <= 1e-6


class TestConvergenceOrder:
    def fourier_errors(self, contact, n_values):
        model = sir_model(SirParams(contact=contact))
        report = convergence_study(model, "fourier", n_values)
        return [row.abs_error for row in report.rows]

    @pytest.mark.xfail(
        strict=True,
        reason="decay on these coefficients is faster than geometric, so the "
               "semilog profile over N in {11..27} is concave with a "
               "preasymptotic plateau (measured correlation -0.93); the "
               "asymptotic range is log-linear, see "
               "test_geometric_in_asymptotic_range",
    )
    def test_geometric_correlation_from_n11(self):
        errors = self.fourier_errors(Contact("F1"), [11, 15, 19, 23, 27])
        fit = fit_decay(list(zip([11, 15, 19, 23, 27], errors)))
        assert fit.geometric_correlation <= -0.99

    def test_geometric_in_asymptotic_range(self):
        n_values = [23, 27, 31]
        errors = self.fourier_errors(Contact("F1"), n_values)
        fit = fit_decay(list(zip(n_values, errors)))
        assert fit.geometric_correlation <= -0.99
        assert fit.kind == "geometric"
        assert fit.geometric_rate > 1.0

    def test_errors_strictly_decreasing(self):
        errors = self.fourier_errors(Contact("F1"), [11, 15, 19, 23, 27])
        assert all(e2 < e1 for e1, e2 in zip(errors, errors[1:]))


class TestEigenfunctions:
    def test_values_at_nodes_are_exact(self):
        model = sir_model(SirParams())
        mesh = fourier_mesh(25, 1.0)
        solution = solve_r0(assemble(model, mesh))
        for i, t in enumerate(mesh.nodes):
            phi_t, psi_t = eigenfunction_at(solution, float(t))
            assert phi_t[0] == solution.phi[i, 0]
            assert psi_t[0] == pytest.approx(solution.psi[i, 0], rel=1e-14)

    def test_constant_model_flat_eigenfunction(self):
        solution = solve_r0(assemble(constant_model([[2.0]], [[1.0]]),
                                     fourier_mesh(5, 1.0)))
        for t in np.linspace(0.0, 1.0, 17):
            phi_t, psi_t = eigenfunction_at(solution, float(t))
            assert phi_t[0] == pytest.approx(1.0, abs=1e-12)
            assert psi_t[0] == pytest.approx(1.0, abs=1e-12)

    def test_sir_closed_form_oracle(self):
        params = SirParams()
        solution = solve_on_mesh(sir_model(params), "fourier", 35)
        ts = np.linspace(0.0, 1.0, 101)
        computed = np.array([eigenfunction_at(solution, float(t))[0][0]
                             for t in ts])
        exact = np.array([sir_eigenfunction_exact(params, float(t))[0]
                          for t in ts])
        computed /= np.max(np.abs(computed))
        exact /= np.max(np.abs(exact))
        assert np.max(np.abs(computed - exact)) <= 1e-8

    def test_psi_definition_at_nodes(self):
        model = sir_model(SirParams())
        mesh = fourier_mesh(35, 1.0)
        solution = solve_r0(assemble(model, mesh))
        for i, t in enumerate(mesh.nodes):
            expected = model.eval_B(t) @ solution.phi[i] / solution.r0
            assert np.max(np.abs(solution.psi[i] - expected)) <= 1e-12


class TestPeriodAverage:
    def test_constant_model_unchanged(self):
        b_bar, m_bar = period_average(constant_model([[2.0]], [[1.5]]))
        assert b_bar[0, 0] == pytest.approx(2.0, rel=1e-14)
        assert m_bar[0, 0] == pytest.approx(1.5, rel=1e-14)

    def test_sir_diagonal_average(self):
        # independent oracle: high-resolution trapezoid of the contact rate
        params = SirParams(d=2)
        model = sir_model(params)
        b_bar, _ = period_average(model)
        from r0periodic.models import contact_rate
        grid = np.linspace(0.0, 1.0, 100001)
        avg_f = np.trapezoid([contact_rate(params.contact, t) for t in grid], grid)
        expected = params.q * params.population * avg_f / params.d
        assert b_bar[0, 0] == pytest.approx(expected, abs=1e-10 * expected)

    def test_square_wave_average_is_exact(self):
        model = sir_model(SirParams(contact=Contact("F3")))
        b_bar, _ = period_average(model)
        assert b_bar[0, 0] == pytest.approx(600.0, rel=1e-12)

    def test_vector_host_average_matches_bessel_series(self):
        # avg of exp(delta sin(2 pi t)) = I_0(delta) = sum (delta/2)^(2k) / (k!)^2
        delta = 0.8
        model = vector_host_model(VectorHostParams(seasonality=delta))
        b_bar, _ = period_average(model)
        amplitude = 0.09 * 365.0 * 0.85 * 10.0
        term, total, k = 1.0, 0.0, 0
        while term > 1e-18:
            term = (delta / 2.0) ** (2 * k) / math.factorial(k) ** 2
            total += term
            k += 1
        assert b_bar[3, 1] / amplitude == pytest.approx(total, abs=1e-10)


class TestAveragedR0:
    @pytest.mark.parametrize("kind", ["F1", "F2", "F3"])
    def test_sir_all_contacts(self, kind):
        model = sir_model(SirParams(contact=Contact(kind)))
        assert abs(averaged_r0(model) - SIR_R0) <= 1e-9

    def test_autonomous_case_matches_periodic(self):
        model = vector_host_model(VectorHostParams(seasonality=0.0))
        periodic = solve_r0(assemble(model, fourier_mesh(25, 1.0))).r0
        assert abs(averaged_r0(model) - periodic) <= 1e-9

    def test_seasonal_averaged_exceeds_periodic(self):
        model = vector_host_model(VectorHostParams(seasonality=0.8))
        periodic = solve_r0(assemble(model, fourier_mesh(25, 1.0))).r0
        assert averaged_r0(model) > periodic

    def test_singular_average(self):
        with pytest.raises(SingularAveragedMatrixError):
            averaged_r0(constant_model([[1.0]], [[0.0]]))

"""Alternating minimization of the majorant."""

import math

import numpy as np
import pytest

from fluxbound.assembly import MajorantSystem, assemble_majorant, energy_error, solve_primal
from fluxbound.errors import AssemblyError, SolverError
from fluxbound.mesh import TriMesh, build_rect_mesh
from fluxbound.minimize import (
    eval_majorant,
    guaranteed_bound_check,
    minimize_majorant,
)
from fluxbound.problem import CoefficientModel, ProblemSpec, example1_problem
from fluxbound.spaces import FluxSpace, ScalarField, ScalarSpace

RNG = np.random.default_rng(313131)


def small_setup(n=4, p1=1, r=1, k=1):
    spec = example1_problem(k1=k, k2=k)
    mesh = build_rect_mesh((0, 1), (0, 1), n, n)
    space = ScalarSpace(mesh, p1)
    v = solve_primal(space, spec)
    system = assemble_majorant(FluxSpace(mesh, r), v, spec)
    return spec, v, system


def reference_triangle_mesh():
    return TriMesh(
        vertices=[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
        triangles=[[0, 1, 2]],
        edges=[[0, 1], [0, 2], [1, 2]],
        tri_edges=[[2, 1, 0]],
        tri_edge_signs=[[1, -1, 1]],
        boundary_edge_flags=[True, True, True],
        boundary_vertex_flags=[True, True, True],
    )


def synthetic_system(s_data, m_data, b, z, f_norm_sq, g):
    """Three-DOF system over the single-triangle RT0 space with diagonal
    quadratic forms; lets every branch be driven explicitly."""
    from fluxbound.sparse import assemble_from_triplets

    flux = FluxSpace(reference_triangle_mesh(), 0)
    m = assemble_from_triplets((3, 3), [0, 1, 2], [0, 1, 2], m_data)
    s = m.with_data(np.asarray(s_data, dtype=float))
    return MajorantSystem(s=s, m=m, b=np.asarray(b, dtype=float),
                          z=np.asarray(z, dtype=float),
                          f_norm_sq=float(f_norm_sq), g=float(g),
                          flux_space=flux, c_f=1.0, lambda_low=1.0)


class TestEvalMajorant:
    def test_invalid_beta(self):
        _, _, system = small_setup()
        c = np.zeros(system.flux_space.dof_count)
        with pytest.raises(ValueError):
            eval_majorant(system, c, 0.0)
        with pytest.raises(ValueError):
            eval_majorant(system, c, -2.0)

    def test_young_equality_at_optimal_beta(self):
        _, _, system = small_setup()
        scale = system.c_f**2 / system.lambda_low
        for _ in range(20):
            c = RNG.standard_normal(system.flux_space.dof_count)
            _, dual, equi = eval_majorant(system, c, 1.0)
            if dual < 1e-12 or equi < 1e-12:
                continue
            beta = math.sqrt(scale) * equi / (2.0 * dual)
            maj_sq, _, _ = eval_majorant(system, c, beta)
            expect = (2.0 * dual + math.sqrt(scale) * equi) ** 2
            assert maj_sq == pytest.approx(expect, rel=1e-12)

    def test_optimal_beta_minimizes_over_grid(self):
        _, _, system = small_setup()
        scale = system.c_f**2 / system.lambda_low
        c = RNG.standard_normal(system.flux_space.dof_count)
        _, dual, equi = eval_majorant(system, c, 1.0)
        best = math.sqrt(scale) * equi / (2.0 * dual)
        maj_best, _, _ = eval_majorant(system, c, best)
        for beta in np.logspace(-6, 6, 1000):
            maj_sq, _, _ = eval_majorant(system, c, beta)
            assert maj_sq >= maj_best * (1.0 - 1e-13)

    def test_zero_coefficients(self):
        _, _, system = small_setup()
        c = np.zeros(system.flux_space.dof_count)
        maj_sq, dual, equi = eval_majorant(system, c, 1.0)
        assert equi == pytest.approx(math.sqrt(system.f_norm_sq), rel=1e-12)
        assert dual == pytest.approx(math.sqrt(system.g), rel=1e-12)
        assert maj_sq > 0.0


class TestMinimizeMajorant:
    def test_history_non_increasing(self):
        _, _, system = small_setup(n=6, p1=1, r=1)
        result = minimize_majorant(system, eps=1e-10, imax=30)
        majs = np.array([h[0] for h in result.history])
        assert np.all(np.diff(majs) <= 1e-12 * majs[:-1])
        assert result.iterations == len(result.history)
        assert result.maj == majs[-1]

    def test_result_consistency(self):
        _, _, system = small_setup(n=6, p1=1, r=1)
        result = minimize_majorant(system)
        scale = system.c_f**2 / system.lambda_low
        assert result.maj_sq == pytest.approx(result.maj**2, rel=1e-14)
        assert result.maj == pytest.approx(
            2.0 * result.dual + math.sqrt(scale) * result.equi, rel=1e-13)
        maj_sq, dual, equi = eval_majorant(system, result.flux_coeffs,
                                           result.beta)
        assert dual == pytest.approx(result.dual, rel=1e-12)
        assert equi == pytest.approx(result.equi, rel=1e-12)
        assert maj_sq == pytest.approx(result.maj_sq, rel=1e-10)

    def test_returned_beta_is_optimal(self):
        _, _, system = small_setup(n=6, p1=1, r=1)
        result = minimize_majorant(system)
        scale = system.c_f**2 / system.lambda_low
        expect = math.sqrt(scale) * result.equi / (2.0 * result.dual)
        assert result.beta == pytest.approx(expect, rel=1e-12)

    def test_history_betas_start_at_beta0(self):
        _, _, system = small_setup()
        result = minimize_majorant(system, beta0=2.5)
        assert result.history[0][3] == 2.5

    def test_deterministic(self):
        _, _, system = small_setup(n=5, p1=1, r=1)
        r1 = minimize_majorant(system)
        r2 = minimize_majorant(system)
        assert np.array_equal(r1.flux_coeffs, r2.flux_coeffs)
        assert r1.maj == r2.maj
        assert r1.history == r2.history

    def test_fast_convergence(self):
        # each alternating step is an exact minimization; a handful of
        # sweeps reaches the fixed point
        _, _, system = small_setup(n=6, p1=1, r=1)
        result = minimize_majorant(system, eps=1e-6)
        assert result.iterations <= 10

    def test_looser_eps_stops_earlier(self):
        _, _, system = small_setup(n=6, p1=1, r=2)
        tight = minimize_majorant(system, eps=1e-12, imax=100)
        loose = minimize_majorant(system, eps=1e-2, imax=100)
        assert loose.iterations <= tight.iterations
        assert tight.maj <= loose.maj * (1.0 + 1e-12)

    def test_perturbing_flux_never_improves(self):
        _, _, system = small_setup(n=4, p1=1, r=1)
        result = minimize_majorant(system, eps=1e-12, imax=200)
        scale = system.c_f**2 / system.lambda_low
        c = result.flux_coeffs
        for _ in range(200):
            delta = RNG.standard_normal(len(c))
            delta *= 10.0 ** RNG.uniform(-4, 0) / np.linalg.norm(delta)
            _, dual, equi = eval_majorant(system, c + delta, 1.0)
            maj = 2.0 * dual + math.sqrt(scale) * equi
            assert maj >= result.maj * (1.0 - 1e-9)

    def test_richer_flux_space_tightens_bound(self):
        spec = example1_problem()
        mesh = build_rect_mesh((0, 1), (0, 1), 6, 6)
        v = solve_primal(ScalarSpace(mesh, 1), spec)
        majs = []
        for r in (0, 1, 2):
            system = assemble_majorant(FluxSpace(mesh, r), v, spec)
            majs.append(minimize_majorant(system).maj)
        assert majs[0] > majs[1] > majs[2]

    def test_bound_guaranteed_at_small_scale(self):
        spec, v, system = small_setup(n=6, p1=1, r=1)
        result = minimize_majorant(system)
        err_sq = energy_error(v, spec)
        ratio = guaranteed_bound_check(result, err_sq)
        assert ratio >= 1.0 - 1e-6

    def test_exactly_representable_flux_collapses_bound(self):
        # v linear, f = 0, A = I: the optimal flux grad v lies in RT_0 and
        # both majorant parts vanish at the discrete minimizer
        mesh = build_rect_mesh((0, 1), (0, 1), 3, 3)
        space = ScalarSpace(mesh, 1)
        model = CoefficientModel(np.eye(2))
        spec = ProblemSpec(x_range=(0.0, 1.0), y_range=(0.0, 1.0),
                           coefficients=model, f=lambda x, y: 0.0 * x)
        v = ScalarField(space, mesh.vertices[:, 0].copy())
        system = assemble_majorant(FluxSpace(mesh, 0), v, spec)
        result = minimize_majorant(system)
        # zero up to the inner CG tolerance
        assert result.maj <= 1e-6
        assert result.iterations <= 3

    def test_parameter_validation(self):
        _, _, system = small_setup()
        with pytest.raises(ValueError):
            minimize_majorant(system, eps=0.0)
        with pytest.raises(ValueError):
            minimize_majorant(system, imax=0)
        with pytest.raises(ValueError):
            minimize_majorant(system, beta0=-1.0)
        with pytest.raises(TypeError):
            minimize_majorant("not a system")

    def test_pattern_mismatch_rejected(self):
        from fluxbound.sparse import assemble_from_triplets

        flux = FluxSpace(reference_triangle_mesh(), 0)
        m = assemble_from_triplets((3, 3), [0, 1, 2], [0, 1, 2], [1.0] * 3)
        s = assemble_from_triplets((3, 3), [0, 1, 2], [1, 2, 0], [1.0] * 3)
        bad = MajorantSystem(s=s, m=m, b=np.zeros(3), z=np.zeros(3),
                             f_norm_sq=0.0, g=0.0, flux_space=flux,
                             c_f=1.0, lambda_low=1.0)
        with pytest.raises(AssemblyError):
            minimize_majorant(bad)

    def test_solver_failure_propagates(self):
        _, _, system = small_setup(n=6, p1=1, r=1)
        with pytest.raises(SolverError):
            minimize_majorant(system, cg_tol=1e-14, cg_maxit=1)


class TestDegeneratePaths:
    def test_vanishing_equilibrium_pins_beta(self):
        # S = 0, b = 0, ||f||^2 = 0 makes equi identically zero; the loop
        # must pin beta at the cap and run exactly one more solve
        z = np.array([1.0, 2.0, 3.0])
        g = 1.0 + 0.25 * float(z @ z)
        system = synthetic_system([0.0] * 3, [2.0] * 3, [0.0] * 3, z, 0.0, g)
        result = minimize_majorant(system)
        assert result.iterations == 2
        assert result.beta == 1e8
        assert result.equi == 0.0
        assert result.dual == pytest.approx(1.0, rel=1e-12)
        assert result.maj == pytest.approx(2.0, rel=1e-12)
        assert result.history[0][3] == 1.0
        assert result.history[1][3] == 1e8
        assert np.allclose(result.flux_coeffs, 0.5 * z, atol=1e-11)

    def test_vanishing_dual_returns_immediately(self):
        # S = M = I, z = 0, g = 0 makes dual zero at the first minimizer
        system = synthetic_system([1.0] * 3, [2.0] * 3, [0.0] * 3,
                                  [0.0] * 3, 4.0, 0.0)
        result = minimize_majorant(system)
        assert result.iterations == 1
        assert result.dual == 0.0
        assert result.equi == pytest.approx(2.0, rel=1e-12)
        assert result.maj == pytest.approx(2.0, rel=1e-12)
        assert np.array_equal(result.flux_coeffs, np.zeros(3))

    def test_all_zero_system(self):
        system = synthetic_system([1.0] * 3, [2.0] * 3, [0.0] * 3,
                                  [0.0] * 3, 0.0, 0.0)
        result = minimize_majorant(system)
        assert result.maj == 0.0
        assert result.iterations == 1


class TestGuaranteedBoundCheck:
    def test_ratio(self):
        _, _, system = small_setup()
        result = minimize_majorant(system)
        assert guaranteed_bound_check(result, result.maj_sq) == pytest.approx(1.0)
        assert guaranteed_bound_check(result, result.maj_sq / 4.0) == \
            pytest.approx(4.0)

    def test_invalid_reference(self):
        _, _, system = small_setup()
        result = minimize_majorant(system)
        with pytest.raises(ValueError):
            guaranteed_bound_check(result, 0.0)
        with pytest.raises(ValueError):
            guaranteed_bound_check(result, -1.0)

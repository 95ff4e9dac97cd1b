import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from focpc.errors import DomainError
from focpc.grid import GridFunction, TimeGrid
from focpc.pmp import (
    Box,
    FiniteSet,
    ProblemSpec,
    SweepOptions,
    evaluate_cost,
    forward_backward_sweep,
    hamiltonian,
    maximize_hamiltonian,
    reduce_to_mayer,
)
from focpc.fde_solver import IVPSpec, solve_caputo_ivp
from focpc.resource_example import ResourceParams, make_mayer_spec, make_problem_spec


@pytest.fixture(scope="module")
def resource_run():
    spec = make_mayer_spec(ResourceParams(0.8))
    return spec, forward_backward_sweep(spec, TimeGrid(0.0, 2.0, 400))


def scalar_mayer(control_set, alpha=0.7, g=lambda x: -x[0], g_x=lambda x: np.array([-1.0])):
    # D^alpha x = u with a terminal cost on x(1)
    return ProblemSpec(
        dynamics=lambda t, x, u: np.asarray(u, dtype=float),
        dynamics_jacobian_x=lambda t, x, u: np.zeros((1, 1)),
        control_set=control_set,
        x0=[0.0],
        t0=0.0,
        tf=1.0,
        alpha=alpha,
        terminal_cost=g,
        terminal_cost_grad=g_x,
    )


class TestControlSets:
    def test_box_vertices(self):
        np.testing.assert_array_equal(Box(0.0, 1.0).candidates(), [[0.0], [1.0]])
        assert Box([0, -1], [1, 1]).candidates().shape == (4, 2)

    def test_box_resolution(self):
        np.testing.assert_allclose(Box(0.0, 1.0, resolution=5).candidates()[:, 0], [0, 0.25, 0.5, 0.75, 1])

    def test_degenerate_box(self):
        np.testing.assert_array_equal(Box(0.3, 0.3).candidates(), [[0.3]])

    def test_empty_box(self):
        with pytest.raises(DomainError):
            Box(1.0, 0.0)

    def test_finite_set_sorted(self):
        fs = FiniteSet([2.0, -1.0, 0.5])
        np.testing.assert_array_equal(fs.values[:, 0], [-1.0, 0.5, 2.0])
        np.testing.assert_array_equal(fs.project(np.array([0.4])), [0.5])

    def test_empty_finite_set(self):
        with pytest.raises(DomainError):
            FiniteSet(np.empty((0, 1)))


class TestReduceToMayer:
    def test_resource_augmented_dynamics(self):
        spec = make_mayer_spec(ResourceParams(0.5))
        z = np.array([0.3, 2.0])
        np.testing.assert_allclose(spec.dynamics(0.1, z, np.array([0.25])), [0.75 * 2.0, 0.25 * 2.0])
        assert spec.terminal_cost(np.array([1.7, 5.0])) == -1.7
        np.testing.assert_array_equal(spec.terminal_cost_grad(z), [-1.0, 0.0])
        np.testing.assert_array_equal(spec.x0, [0.0, 1.0])

    def test_original_untouched(self):
        spec = make_problem_spec(ResourceParams(0.5))
        reduce_to_mayer(spec)
        assert not spec.is_mayer and spec.dim == 1

    def test_requires_lagrangian(self):
        with pytest.raises(DomainError):
            reduce_to_mayer(scalar_mayer(Box(0.0, 1.0)))

    def test_zero_lagrangian(self):
        spec = ProblemSpec(
            dynamics=lambda t, x, u: u * x,
            dynamics_jacobian_x=lambda t, x, u: np.array([[u[0]]]),
            control_set=Box(0.0, 1.0),
            x0=[1.0],
            t0=0.0,
            tf=1.0,
            alpha=0.6,
            lagrangian=lambda t, x, u: 0.0,
        )
        red = reduce_to_mayer(spec)
        grid = TimeGrid(0.0, 1.0, 50)
        for c in (0.0, 0.4, 1.0):
            sol = solve_caputo_ivp(IVPSpec(lambda t, z, c=c: red.dynamics(t, z, np.array([c])), red.x0, grid, 0.6))
            assert np.all(sol.values[:, 0] == 0.0)
            assert red.terminal_cost(sol.values[-1]) == 0.0

    def test_classical_bolza(self):
        # alpha = 1, L = u^2, f = u, g = x(1)^2 with u = t: y(1) = 1/3, x(1) = 1/2
        spec = ProblemSpec(
            dynamics=lambda t, x, u: np.asarray(u, dtype=float),
            dynamics_jacobian_x=lambda t, x, u: np.zeros((1, 1)),
            control_set=Box(-1.0, 1.0),
            x0=[0.0],
            t0=0.0,
            tf=1.0,
            alpha=1.0,
            terminal_cost=lambda x: float(x[0] ** 2),
            terminal_cost_grad=lambda x: 2.0 * x,
            lagrangian=lambda t, x, u: float(u[0] ** 2),
        )
        red = reduce_to_mayer(spec)
        sol = solve_caputo_ivp(IVPSpec(lambda t, z: red.dynamics(t, z, np.array([t])), red.x0, TimeGrid(0, 1, 1000), 1.0))
        assert red.terminal_cost(sol.values[-1]) == pytest.approx(1 / 3 + 1 / 4, abs=1e-6)
        np.testing.assert_allclose(red.terminal_cost_grad(np.array([0.2, 0.5])), [1.0, 1.0])

    def test_finite_difference_gradient(self):
        spec = ProblemSpec(
            dynamics=lambda t, x, u: u * x,
            dynamics_jacobian_x=lambda t, x, u: np.array([[u[0]]]),
            control_set=Box(0.0, 1.0),
            x0=[1.0],
            t0=0.0,
            tf=1.0,
            alpha=0.6,
            lagrangian=lambda t, x, u: float(x[0] ** 3),
        )
        J = reduce_to_mayer(spec).dynamics_jacobian_x(0.0, np.array([0.0, 2.0]), np.array([0.5]))
        np.testing.assert_allclose(J, [[0.0, 12.0], [0.0, 0.5]], rtol=1e-6)


class TestHamiltonian:
    def test_zero_covector(self):
        spec = make_mayer_spec(ResourceParams(0.5))
        assert hamiltonian(spec, 0.3, np.array([1.0, 4.0]), np.zeros(2), 0.7) == 0.0

    def test_resource_form(self):
        spec = make_mayer_spec(ResourceParams(0.5))
        p2, p1, x, v = 1.0, 1.3, 2.5, 0.4
        h = hamiltonian(spec, 0.0, np.array([0.0, x]), np.array([p2, p1]), v)
        assert h == pytest.approx((p1 * v + p2 * (1 - v)) * x, rel=1e-15)

    def test_picks_first_component(self):
        spec = make_mayer_spec(ResourceParams(0.5))
        assert hamiltonian(spec, 0.0, np.array([0.0, 3.0]), np.array([1.0, 0.0]), 0.25) == 0.75 * 3.0

    @pytest.mark.parametrize("p1, expected", [(1.5, 1.0), (0.5, 0.0)])
    def test_resource_maximiser(self, p1, expected):
        spec = make_mayer_spec(ResourceParams(0.5))
        u = maximize_hamiltonian(spec, 0.1, np.array([0.0, 2.0]), np.array([1.0, p1]))
        assert u[0] == expected

    def test_tie_goes_to_smallest(self):
        spec = make_mayer_spec(ResourceParams(0.5))
        assert maximize_hamiltonian(spec, 0.1, np.array([0.0, 2.0]), np.array([1.0, 1.0]))[0] == 0.0

    def test_singleton(self):
        spec = scalar_mayer(FiniteSet([0.42]))
        for p in (-3.0, 0.0, 5.0):
            assert maximize_hamiltonian(spec, 0.5, np.zeros(1), np.array([p]))[0] == 0.42

    def test_finite_scan(self):
        spec = scalar_mayer(FiniteSet([-1.0, 0.0, 2.0, 0.5]))
        assert maximize_hamiltonian(spec, 0.0, np.zeros(1), np.array([1.0]))[0] == 2.0
        assert maximize_hamiltonian(spec, 0.0, np.zeros(1), np.array([-1.0]))[0] == -1.0

    def test_time_varying_set(self):
        spec = scalar_mayer(lambda t: Box(0.0, 1.0 + t))
        assert maximize_hamiltonian(spec, 0.5, np.zeros(1), np.array([1.0]))[0] == 1.5

    @given(
        p=st.lists(st.floats(-10, 10, allow_subnormal=False), min_size=2, max_size=2),
        c=st.floats(1e-3, 1e3),
    )
    def test_argmax_scaling_invariance(self, p, c):
        spec = make_mayer_spec(ResourceParams(0.5))
        x = np.array([0.0, 1.5])
        p = np.array(p)
        u1 = maximize_hamiltonian(spec, 0.0, x, p)
        u2 = maximize_hamiltonian(spec, 0.0, x, c * p)
        if abs(p[0] - p[1]) > 1e-9:
            np.testing.assert_array_equal(u1, u2)
        # near-ties may flip under rounding of c * p; the attained values still agree
        h = [hamiltonian(spec, 0.0, x, p, u) for u in (u1, u2)]
        assert h[0] == pytest.approx(h[1], abs=1e-12 * (1 + np.abs(p).sum()))


class TestSweep:
    def test_requires_mayer(self):
        with pytest.raises(DomainError):
            forward_backward_sweep(make_problem_spec(ResourceParams(0.5)), TimeGrid(0, 2, 10))

    def test_grid_must_match(self):
        with pytest.raises(DomainError):
            forward_backward_sweep(make_mayer_spec(ResourceParams(0.5)), TimeGrid(0, 1, 10))

    def test_bad_options(self):
        with pytest.raises(DomainError):
            SweepOptions(tol=0.0)
        with pytest.raises(DomainError):
            SweepOptions(relaxation=1.0)

    def test_maximum_condition(self, resource_run):
        spec, res = resource_run
        assert res.converged
        samples = np.linspace(0.0, 1.0, 11)
        for tk, xk, pk, uk in zip(res.control.t, res.state.values, res.adjoint.values, res.control.values):
            h_star = hamiltonian(spec, tk, xk, pk, uk)
            assert all(h_star >= hamiltonian(spec, tk, xk, pk, v) - 1e-9 for v in samples)

    def test_transversality(self, resource_run):
        spec, res = resource_run
        expected = 0.0 - spec.terminal_cost_grad(res.state.values[-1])
        np.testing.assert_array_equal(res.adjoint.values[-1], expected)

    def test_harvest_adjoint_constant(self, resource_run):
        _, res = resource_run
        assert np.all(res.adjoint.values[:, 0] == 1.0)

    def test_state_starts_at_x0(self, resource_run):
        spec, res = resource_run
        np.testing.assert_array_equal(res.state.values[0], spec.x0)

    def test_controls_admissible(self, resource_run):
        spec, res = resource_run
        assert all(spec.omega(t).contains(u) for t, u in zip(res.control.t, res.control.values))

    def test_monotone_tail(self, resource_run):
        _, res = resource_run
        tail = res.change_history[-3:]
        assert len(tail) == 3
        assert all(b <= a for a, b in zip(tail, tail[1:]))

    def test_cost_is_terminal_value(self, resource_run):
        spec, res = resource_run
        assert res.cost == spec.terminal_cost(res.state.values[-1])

    def test_singleton_converges_at_once(self):
        res = forward_backward_sweep(scalar_mayer(Box(0.3, 0.3)), TimeGrid(0, 1, 50))
        assert res.converged and res.iterations == 1
        assert np.all(res.control.values == 0.3)

    def test_finite_set_sweep(self):
        # minimise -x(1) with D^alpha x = u: take the largest admissible control everywhere
        res = forward_backward_sweep(scalar_mayer(FiniteSet([-1.0, 0.0, 0.5])), TimeGrid(0, 1, 50))
        assert res.converged
        assert np.all(res.control.values == 0.5)

    def test_non_convergence_reported(self):
        res = forward_backward_sweep(make_mayer_spec(ResourceParams(0.8)), TimeGrid(0, 2, 100), SweepOptions(max_iters=1))
        assert not res.converged and res.iterations == 1
        assert res.control_change_norm >= 1e-6

    def test_classical_optimum(self):
        res = forward_backward_sweep(make_mayer_spec(ResourceParams(1.0)), TimeGrid(0, 2, 400))
        assert res.converged
        assert res.cost == pytest.approx(-math.e, abs=0.01)
        u = res.control.values[:, 0]
        assert np.all(u[res.control.t < 0.99] == 1.0) and np.all(u[res.control.t > 1.01] == 0.0)


class TestEvaluateCost:
    def test_full_reinvestment_costs_nothing(self):
        spec = make_problem_spec(ResourceParams(0.5))
        grid = TimeGrid(0.0, 2.0, 100)
        u = GridFunction(grid, np.ones(101))
        x = GridFunction.from_callable(grid, lambda t: 1.0 + t)
        assert evaluate_cost(spec, x, u) == 0.0

    def test_classical_integral(self):
        spec = make_problem_spec(ResourceParams(1.0))
        grid = TimeGrid(0.0, 2.0, 2000)
        u = GridFunction(grid, np.zeros(2001))
        x = GridFunction.from_callable(grid, lambda t: t)
        assert evaluate_cost(spec, x, u) == pytest.approx(-2.0, abs=1e-12)

    def test_analytic_optimum(self):
        spec = make_problem_spec(ResourceParams(1.0))
        grid = TimeGrid(0.0, 2.0, 2000)
        u = GridFunction.from_callable(grid, lambda t: np.where(t < 1.0, 1.0, 0.0))
        x = GridFunction.from_callable(grid, lambda t: np.exp(np.minimum(t, 1.0)))
        assert evaluate_cost(spec, x, u) == pytest.approx(-math.e, abs=0.01)

    def test_grid_mismatch(self):
        spec = make_problem_spec(ResourceParams(1.0))
        g1, g2 = TimeGrid(0.0, 2.0, 10), TimeGrid(0.0, 2.0, 20)
        with pytest.raises(DomainError):
            evaluate_cost(spec, GridFunction(g1, np.ones(11)), GridFunction(g2, np.ones(21)))

    @pytest.mark.parametrize("alpha, c", [(0.6, 0.3), (0.9, 0.7), (1.0, 0.0)])
    def test_matches_augmented_component(self, alpha, c):
        params = ResourceParams(alpha)
        spec, red = make_problem_spec(params), make_mayer_spec(params)
        grid = TimeGrid(0.0, 2.0, 400)
        uc = np.array([c])
        sol = solve_caputo_ivp(IVPSpec(lambda t, z: red.dynamics(t, z, uc), red.x0, grid, alpha))
        x = GridFunction(grid, sol.values[:, 1])
        u = GridFunction(grid, np.full(401, c))
        assert abs(evaluate_cost(spec, x, u) - red.terminal_cost(sol.values[-1])) <= 10 * grid.h**alpha

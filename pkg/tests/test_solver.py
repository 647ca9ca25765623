"""Ground-state solver: convergence contracts, seeds, cutoffs, multistart."""

import numpy as np
import pytest

from helmdual.grid import Field, lp_norm, make_grid
from helmdual.functional import (
    CoefficientSpec,
    ProblemSpec,
    constant_coefficient,
    gradient,
    lp_norm as _unused,  # noqa: F401
)
from helmdual.resolvent import ResolventConfig
from helmdual.solver import (
    CutoffSpec,
    InitialGuess,
    NoConvergence,
    SolverConfig,
    default_seeds,
    make_test_function,
    multistart,
    solve_from_seed,
    solve_ground_state,
    solve_limit,
)


@pytest.fixture(scope="module")
def grid():
    return make_grid(2, 30.0, 64)


@pytest.fixture(scope="module")
def cfg():
    return SolverConfig(max_iters=5000)


@pytest.fixture(scope="module")
def limit_state(grid, cfg):
    return solve_limit(1.0, 8.0, grid, cfg)


class TestSolverConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            SolverConfig(shrink_factor=1.5)
        with pytest.raises(ValueError):
            SolverConfig(grad_tol=0.0)


class TestCutoff:
    def test_plateau_support_and_smoothness(self):
        eta = CutoffSpec()
        r = np.linspace(0.0, 3.0, 301)
        vals = eta.profile(r)
        np.testing.assert_allclose(vals[r <= 1.0], 1.0)
        np.testing.assert_allclose(vals[r >= 2.0], 0.0)
        mid = vals[(r > 1.0) & (r < 2.0)]
        assert np.all((0.0 <= mid) & (mid <= 1.0))
        assert np.all(np.diff(vals) <= 1e-12)  # nonincreasing


class TestLimitSolve:
    def test_converged_contracts(self, limit_state, cfg):
        assert limit_state.energy > 0
        assert limit_state.grad_norm <= cfg.grad_tol
        pp = limit_state.spec.p_prime
        norm_pp = lp_norm(limit_state.v, pp) ** pp
        assert limit_state.nehari_residual <= 1e-9 * norm_pp

    def test_euler_lagrange_fixed_point(self, limit_state, cfg):
        # |v|^(p'-2) v = Q^(1/p) R(Q^(1/p) v) to the gradient tolerance
        g = gradient(limit_state.v, limit_state.spec)
        pp = limit_state.spec.p_prime
        scale = np.linalg.norm(np.abs(limit_state.v.values) ** (pp - 1.0))
        assert np.linalg.norm(g.values) / scale <= cfg.grad_tol

    def test_deterministic(self, grid, cfg, limit_state):
        again = solve_limit(1.0, 8.0, grid, cfg)
        np.testing.assert_array_equal(again.v.values, limit_state.v.values)
        assert again.energy == limit_state.energy

    def test_homogeneity_scaling(self, grid, cfg, limit_state):
        # c_0(Q_0) = Q_0^(-(2/p) p'/(2-p')) c_0(1)
        q0 = 2.0
        other = solve_limit(q0, 8.0, grid, cfg)
        pp = limit_state.spec.p_prime
        ratio = q0 ** (-(2.0 / 8.0) * pp / (2.0 - pp))
        assert other.energy == pytest.approx(ratio * limit_state.energy, rel=1e-6)

    def test_invalid_q0(self, grid, cfg):
        with pytest.raises(ValueError):
            solve_limit(0.0, 8.0, grid, cfg)

    def test_tiny_budget_raises_with_best_iterate(self, grid):
        small = SolverConfig(max_iters=3)
        with pytest.raises(NoConvergence):
            solve_from_seed(InitialGuess(width=0.8).build(grid),
                            ProblemSpec(p=8.0, epsilon=1.0,
                                        coefficient=constant_coefficient(1.0)),
                            small)

    def test_fixed_point_mode_refines_near_critical_seed(self, grid, limit_state):
        # the plain fixed-point iteration carries no convergence guarantee
        # from arbitrary seeds; started near a critical point it stays there
        spec = limit_state.spec
        cfg_fp = SolverConfig(max_iters=500, grad_tol=1e-7, use_fixed_point=True)
        state, _ = solve_from_seed(limit_state.v, spec, cfg_fp)
        assert state.energy == pytest.approx(limit_state.energy, rel=1e-6)
        assert state.grad_norm <= 1e-6


class TestTestFunction:
    def test_translate_and_cutoff(self, grid, limit_state):
        phi, snap = make_test_function((0.8, 0.4), 0.5, limit_state.v)
        assert snap <= grid.spacing  # snapped to a nearby lattice vector
        # support is inside |eps x - y| <= 2
        r = np.sqrt((0.5 * grid.coords(0) - 0.8) ** 2
                    + (0.5 * grid.coords(1) - 0.4) ** 2)
        assert np.all(np.abs(phi.values[r > 2.0]) == 0.0)

    def test_box_too_small(self, grid, limit_state):
        with pytest.raises(ValueError):
            make_test_function((0.8, 0.4), 0.05, limit_state.v)

    def test_dimension_mismatch(self, grid, limit_state):
        with pytest.raises(ValueError):
            make_test_function((0.8,), 0.5, limit_state.v)


class TestGroundState:
    def test_bump_coefficient_solve(self, grid, cfg, limit_state):
        coef = CoefficientSpec(kind="gaussian_bumps", floor=0.25,
                               centers=((0.8, 0.4),), amplitudes=(0.75,),
                               widths=(1.5,))
        spec = ProblemSpec(p=8.0, epsilon=0.5, coefficient=coef,
                           resolvent=ResolventConfig(delta=1e-2))
        loose = SolverConfig(max_iters=8000, grad_tol=5e-8)
        lim = solve_limit(1.0, 8.0, grid, loose, resolvent=spec.resolvent)
        state = solve_ground_state(spec, grid, loose, limit_state=lim)
        assert state.grad_norm <= 5e-8
        assert state.energy >= lim.energy * (1 - 1e-6)

    def test_inadmissible_exponent_rejected(self, grid, cfg):
        spec = ProblemSpec(p=5.0, epsilon=1.0, coefficient=constant_coefficient(1.0))
        with pytest.raises(ValueError):
            solve_ground_state(spec, grid, cfg)


class TestMultistart:
    def test_needs_two_seeds(self, grid, cfg):
        spec = ProblemSpec(p=8.0, epsilon=1.0, coefficient=constant_coefficient(1.0))
        with pytest.raises(ValueError):
            multistart(spec, grid, cfg, [InitialGuess().build(grid)])

    def test_identical_seeds_deduplicate(self, grid, cfg):
        spec = ProblemSpec(p=8.0, epsilon=1.0, coefficient=constant_coefficient(1.0))
        seed = InitialGuess(width=0.8).build(grid)
        states = multistart(spec, grid, cfg, [seed, seed, -1.0 * seed])
        assert len(states) == 1  # sign flips identified

    def test_two_maxima_give_two_states(self, grid, cfg):
        coef = CoefficientSpec(kind="gaussian_bumps", floor=0.25,
                               centers=((5.0, 0.0), (-5.0, 0.0)),
                               amplitudes=(0.75, 0.75), widths=(1.5, 1.5))
        res = ResolventConfig(delta=1e-2)
        spec = ProblemSpec(p=8.0, epsilon=0.5, coefficient=coef, resolvent=res)
        loose = SolverConfig(max_iters=8000, grad_tol=5e-8)
        lim = solve_limit(1.0, 8.0, grid, loose, resolvent=res)
        seeds = default_seeds(spec, grid, loose, lim)
        assert len(seeds) == 2
        states = multistart(spec, grid, loose, seeds)
        assert len(states) == 2

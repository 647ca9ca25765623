"""Ground-state search on the Nehari manifold.

The minimization runs projected descent: a negative-gradient trial step with
backtracking on the dual energy, followed by re-projection onto the Nehari
manifold.  Because the resolvent is indefinite, trial iterates can leave the
positive cone; those trigger step shrinking, and a seed whose step collapses
is abandoned.  A plain fixed-point iteration of the Euler-Lagrange equation
is available behind a flag for comparison, without any convergence guarantee.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .grid import Field, Grid, inner_product, lp_norm
from .functional import (
    DualState,
    NotInPositiveCone,
    ProblemSpec,
    _dual_power,
    constant_coefficient,
)
from .resolvent import ResolventConfig, apply_R


class NoConvergence(RuntimeError):
    """Iteration budget exhausted above the gradient tolerance."""

    def __init__(self, message: str, best: DualState | None = None, iterations: int = 0):
        super().__init__(message)
        self.best = best
        self.iterations = iterations


class AllSeedsLeftCone(RuntimeError):
    """Every restart seed fell out of the positive cone."""


@dataclass(frozen=True)
class InitialGuess:
    """Descriptor of one restart seed: a radially modulated Gaussian bump.

    The modulation cos(kappa r) with kappa slightly above 1 pushes the
    spectrum of the seed just outside the unit sphere, where the resolvent
    multiplier is positive; an unmodulated Gaussian of moderate width sits
    below it and falls outside the positive cone.
    """

    center: tuple[float, ...] = ()
    width: float = 0.8
    amplitude: float = 1.0
    modulation: float = 1.1
    perturbation: float = 0.0
    rng_seed: int = 0

    def build(self, grid: Grid) -> Field:
        center = self.center if self.center else (0.0,) * grid.dim
        r_sq = np.zeros(grid.shape)
        for d in range(grid.dim):
            r_sq = r_sq + (grid.coords(d) - center[d]) ** 2
        vals = self.amplitude * np.exp(-r_sq / (2.0 * self.width**2))
        if self.modulation > 0.0:
            vals = vals * np.cos(self.modulation * np.sqrt(r_sq))
        if self.perturbation > 0.0:
            rng = np.random.default_rng(self.rng_seed)
            noise = rng.standard_normal(grid.shape)
            vals = vals * (1.0 + self.perturbation * noise)
        return Field(grid, vals)


@dataclass(frozen=True)
class SolverConfig:
    max_iters: int = 20000
    grad_tol: float = 1e-8
    initial_step: float = 1.0
    shrink_factor: float = 0.5
    growth_factor: float = 1.3
    sufficient_decrease: float = 1e-4
    min_step: float = 1e-14
    restart_seeds: tuple[InitialGuess, ...] = (
        InitialGuess(width=0.5),
        InitialGuess(width=0.8),
        InitialGuess(width=1.2),
    )
    distinct_lp_distance: float = 0.1
    distinct_energy_gap: float = 1e-3
    use_fixed_point: bool = False

    def __post_init__(self):
        if not (0.0 < self.shrink_factor < 1.0):
            raise ValueError("shrink_factor must lie in (0, 1)")
        if self.grad_tol <= 0 or self.initial_step <= 0 or self.sufficient_decrease <= 0:
            raise ValueError("tolerances and steps must be positive")


@dataclass(frozen=True)
class CutoffSpec:
    """Smooth radial cutoff: 1 on the unit ball, 0 outside radius 2.

    eta(x) = s(2 - |x|) / (s(2 - |x|) + s(|x| - 1)) with s(t) = exp(-1/t)
    for t > 0 and s(t) = 0 otherwise.
    """

    def profile(self, r: np.ndarray) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        upper = _mollifier(2.0 - r)
        lower = _mollifier(r - 1.0)
        denom = upper + lower
        out = np.zeros_like(r)
        inside = denom > 0.0
        out[inside] = upper[inside] / denom[inside]
        out[r <= 1.0] = 1.0
        return out


def _mollifier(t: np.ndarray) -> np.ndarray:
    out = np.zeros_like(t)
    pos = t > 0.0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


@dataclass
class _Workspace:
    """Per-solve cache working in the substituted variable w = |v|^(p'-2) v.

    The substitution removes the non-smoothness of the dual energy: in terms
    of w the first term is (1/p') ||w||_p^p with p > 2, so backtracking sees
    bounded curvature.  The Euler-Lagrange residual w - Q^(1/p) R(Q^(1/p) v)
    coincides with the v-space gradient of the dual energy, and a full step
    along it is exactly the fixed-point map.
    """

    grid: Grid
    spec: ProblemSpec
    q_root: np.ndarray

    def measure(self, w: np.ndarray):
        """One resolvent application giving ||w||_p^p, quad term, energy, R g."""
        v = _dual_power(w, self.spec.p)  # |w|^(p-1) sign w, the inverse power map
        g = Field(self.grid, self.q_root * v)
        rg = apply_R(g, self.spec.resolvent)
        quad = inner_product(g, rg)
        norm_p = self.grid.cell_volume * float(np.sum(np.abs(w) ** self.spec.p))
        en = norm_p / self.spec.p_prime - 0.5 * quad
        return norm_p, quad, en, rg


def _project_w(w: np.ndarray, norm_p: float, quad: float, p: float):
    """Scale w onto the Nehari manifold ||w||_p^p = quad(v(w)).

    Under w -> s w the norm scales as s^p and the quadratic term as
    s^(2(p-1)), so s = (norm / quad)^(1/(p-2)).
    """
    if quad <= 0.0:
        raise NotInPositiveCone(f"quadratic term {quad} <= 0")
    s = (norm_p / quad) ** (1.0 / (p - 2.0))
    return s * w, s


def _descend(seed: Field, spec: ProblemSpec, cfg: SolverConfig) -> tuple[DualState, int]:
    """Projected descent from one seed; raises NotInPositiveCone / NoConvergence."""
    ws = _Workspace(seed.grid, spec, spec.q_root(seed.grid).values)
    p, pp = spec.p, spec.p_prime
    w = _dual_power(seed.values, pp)  # seed is given in v; move to w
    norm_p, quad, _, rg = ws.measure(w)
    if norm_p == 0.0:
        raise ValueError("zero seed")
    w, s = _project_w(w, norm_p, quad, p)
    # all cached quantities are homogeneous in w
    norm_p *= s**p
    quad *= s ** (2.0 * (p - 1.0))
    rg = Field(ws.grid, s ** (p - 1.0) * rg.values)
    en = norm_p / pp - 0.5 * quad
    step = cfg.initial_step

    for it in range(cfg.max_iters):
        # Euler-Lagrange residual; equal to the v-space energy gradient
        grad = w - ws.q_root * rg.values
        rel = np.linalg.norm(grad) / np.linalg.norm(w)
        if rel <= cfg.grad_tol:
            return DualState.from_field(Field(ws.grid, _dual_power(w, p)), spec), it
        # directional derivative of the energy along -grad in the w variable
        slope = (p - 1.0) * ws.grid.cell_volume * float(
            np.sum(np.abs(w) ** (p - 2.0) * grad * grad)
        )

        accepted = False
        while step >= cfg.min_step:
            trial = w - step * grad
            t_norm, t_quad, _, t_rg = ws.measure(trial)
            if t_quad <= 0.0:
                step *= cfg.shrink_factor
                continue
            proj, s = _project_w(trial, t_norm, t_quad, p)
            proj_norm = t_norm * s**p
            proj_quad = t_quad * s ** (2.0 * (p - 1.0))
            proj_en = proj_norm / pp - 0.5 * proj_quad
            if proj_en <= en - cfg.sufficient_decrease * step * slope:
                w = proj
                norm_p, quad = proj_norm, proj_quad
                rg = Field(ws.grid, s ** (p - 1.0) * t_rg.values)
                en = proj_en
                step = min(step * cfg.growth_factor, cfg.initial_step)
                accepted = True
                break
            step *= cfg.shrink_factor
        if not accepted:
            raise NotInPositiveCone("step collapsed without an acceptable iterate")

    best = DualState.from_field(Field(ws.grid, _dual_power(w, p)), spec)
    raise NoConvergence(
        f"gradient {best.grad_norm:.3e} above tolerance {cfg.grad_tol:.1e} "
        f"after {cfg.max_iters} iterations",
        best=best,
        iterations=cfg.max_iters,
    )


def _fixed_point(seed: Field, spec: ProblemSpec, cfg: SolverConfig) -> tuple[DualState, int]:
    """Naive Euler-Lagrange fixed-point iteration (comparison mode only).

    w <- Q^(1/p) R(Q^(1/p) v(w)), re-projected onto the Nehari manifold every
    step; no energy monotonicity and no convergence guarantee.
    """
    ws = _Workspace(seed.grid, spec, spec.q_root(seed.grid).values)
    p = spec.p
    w = _dual_power(seed.values, spec.p_prime)
    for it in range(cfg.max_iters):
        _, quad, _, rg = ws.measure(w)
        if quad <= 0.0:
            raise NotInPositiveCone("iterate left the positive cone")
        new = ws.q_root * rg.values
        n_norm, n_quad, _, _ = ws.measure(new)
        if n_quad <= 0.0:
            raise NotInPositiveCone("iterate left the positive cone")
        new, _ = _project_w(new, n_norm, n_quad, p)
        change = np.linalg.norm(new - w) / max(np.linalg.norm(w), 1e-300)
        w = new
        if change <= cfg.grad_tol:
            return DualState.from_field(Field(ws.grid, _dual_power(w, p)), spec), it
    best = DualState.from_field(Field(ws.grid, _dual_power(w, p)), spec)
    raise NoConvergence("fixed-point iteration did not settle", best=best,
                        iterations=cfg.max_iters)


def solve_from_seed(seed: Field, spec: ProblemSpec, cfg: SolverConfig) -> tuple[DualState, int]:
    if cfg.use_fixed_point:
        return _fixed_point(seed, spec, cfg)
    return _descend(seed, spec, cfg)


def solve_limit(q0: float, p: float, grid: Grid, cfg: SolverConfig,
                epsilon: float = 1.0,
                resolvent: ResolventConfig | None = None) -> DualState:
    """Ground state of the constant-coefficient limit problem.

    Returns the lowest-energy converged state over the restart seeds.
    """
    if q0 <= 0:
        raise ValueError("q0 must be positive")
    spec = ProblemSpec(
        p=p,
        epsilon=epsilon,
        coefficient=constant_coefficient(q0),
        resolvent=resolvent if resolvent is not None else ResolventConfig(),
    )
    spec.validate_for_grid(grid)
    return _best_over_seeds(spec, grid, cfg, [s.build(grid) for s in cfg.restart_seeds])


def _best_over_seeds(spec: ProblemSpec, grid: Grid, cfg: SolverConfig,
                     seeds: list[Field]) -> DualState:
    best: DualState | None = None
    cone_failures = 0
    last_error: Exception | None = None
    for seed in seeds:
        try:
            state, _ = solve_from_seed(seed, spec, cfg)
        except NotInPositiveCone as err:
            cone_failures += 1
            last_error = err
            continue
        except NoConvergence as err:
            last_error = err
            continue
        if best is None or state.energy < best.energy:
            best = state
    if best is None:
        if cone_failures == len(seeds):
            raise AllSeedsLeftCone("every seed left the positive cone")
        raise NoConvergence(f"no seed converged: {last_error}")
    return best


def make_test_function(y: tuple[float, ...], epsilon: float, w: Field,
                       cutoff: CutoffSpec = CutoffSpec()) -> tuple[Field, float]:
    """Cutoff-localized translate of the limit state: eta(eps x - y) w(x - y/eps).

    The translation y/eps is snapped to the nearest lattice vector; the snap
    distance (in grid coordinates) is returned alongside the field.  Raises
    if the support of the cutoff does not fit inside the box.
    """
    grid = w.grid
    y = tuple(float(c) for c in y)
    if len(y) != grid.dim:
        raise ValueError("point dimension does not match the grid")
    for c in y:
        if (abs(c) + 2.0) / epsilon > grid.half_length:
            raise ValueError("cutoff support exceeds the box: enlarge it or raise epsilon")
    h = grid.spacing
    shift_nodes = [int(round(c / (epsilon * h))) for c in y]
    snapped = np.array([s * h for s in shift_nodes])
    snap_distance = float(np.linalg.norm(np.array(y) / epsilon - snapped))
    translated = np.roll(w.values, shift_nodes, axis=tuple(range(grid.dim)))
    r = np.zeros(grid.shape)
    for d in range(grid.dim):
        r = r + (epsilon * grid.coords(d) - y[d]) ** 2
    eta = cutoff.profile(np.sqrt(r))
    return Field(grid, eta * translated), snap_distance


def default_seeds(spec: ProblemSpec, grid: Grid, cfg: SolverConfig,
                  limit_state: DualState) -> list[Field]:
    """Cutoff translates of the limit state at every maximum of Q, plus restarts."""
    seeds = []
    for y in spec.coefficient.maximum_set:
        phi, _ = make_test_function(y, spec.epsilon, limit_state.v)
        seeds.append(phi)
    if not seeds:
        seeds = [s.build(grid) for s in cfg.restart_seeds]
    return seeds


def solve_ground_state(spec: ProblemSpec, grid: Grid, cfg: SolverConfig,
                       limit_state: DualState | None = None,
                       seeds: list[Field] | None = None) -> DualState:
    """Minimize the dual energy over the Nehari manifold for one problem instance.

    The returned energy is the minimum over converged seeds; global
    optimality is not certified.
    """
    spec.validate_for_grid(grid)
    if seeds is None:
        if limit_state is None and spec.coefficient.maximum_set:
            limit_state = solve_limit(spec.coefficient.q_sup, spec.p, grid, cfg,
                                      resolvent=spec.resolvent)
        if limit_state is not None:
            seeds = default_seeds(spec, grid, cfg, limit_state)
        else:
            seeds = [s.build(grid) for s in cfg.restart_seeds]
    return _best_over_seeds(spec, grid, cfg, seeds)


def multistart(spec: ProblemSpec, grid: Grid, cfg: SolverConfig,
               seeds: list[Field]) -> list[DualState]:
    """Solve from every seed and deduplicate the converged states.

    Two states are duplicates when both their sign-aligned L^p' distance and
    their energy gap fall below the configured thresholds (the functional is
    even, so v and -v are identified).  Results are merged in seed order, so
    the output is deterministic for a fixed configuration.
    """
    if len(seeds) < 2:
        raise ValueError("multistart needs at least 2 seeds")
    states: list[DualState] = []
    for seed in seeds:
        try:
            state, _ = solve_from_seed(seed, spec, cfg)
        except (NotInPositiveCone, NoConvergence):
            continue
        states.append(state)

    pp = spec.p_prime
    distinct: list[DualState] = []
    for state in states:
        is_new = True
        for kept in distinct:
            dist = min(
                lp_norm(state.v - kept.v, pp),
                lp_norm(state.v + kept.v, pp),
            ) / max(lp_norm(state.v, pp), lp_norm(kept.v, pp))
            energy_gap = abs(state.energy - kept.energy) / max(abs(kept.energy), 1e-300)
            if dist <= cfg.distinct_lp_distance and energy_gap <= cfg.distinct_energy_gap:
                is_new = False
                break
        if is_new:
            distinct.append(state)
    return distinct

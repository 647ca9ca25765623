"""Experiment harness: energy comparison, concentration sweep, interaction decay.

Each experiment packages a prediction of the dual variational framework in a
falsifiable discrete form:

* energy_comparison -- ordering c_0 <= c_eps < c_inf of ground-state levels.
* concentration_sweep -- as eps decreases, barycenters of dual ground states
  approach the maximum set of Q and rescaled profiles approach the
  constant-coefficient limit state.
* interaction_decay -- the bilinear interaction of disjointly supported
  fields through the resolvent decays at least like r^(-lambda_p).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .grid import Field, Grid, inner_product, lp_norm
from .kernels import lambda_p
from .functional import DualState, ProblemSpec, pde_residual, to_solution
from .resolvent import ResolventConfig, apply_R, bilinear_R
from .solver import (
    AllSeedsLeftCone,
    CutoffSpec,
    NoConvergence,
    SolverConfig,
    default_seeds,
    solve_ground_state,
    solve_limit,
)


@dataclass(frozen=True)
class BarycenterConfig:
    """Truncation data for the rescaled barycenter map.

    ``rho`` is the truncation radius; the map uses Xi(y) = y for |y| < rho
    and the radial projection rho * y/|y| beyond, so far-field mass cannot
    drag the barycenter arbitrarily.  ``delta_nbhd`` is the neighborhood
    radius within which a barycenter counts as localized at a maximum.
    """

    rho: float
    delta_nbhd: float

    def __post_init__(self):
        if self.rho <= 0 or self.delta_nbhd <= 0:
            raise ValueError("rho and delta_nbhd must be positive")

    def validate_for(self, coefficient) -> None:
        for y in coefficient.maximum_set:
            if np.linalg.norm(y) + self.delta_nbhd > self.rho:
                raise ValueError(
                    "truncation radius must contain the delta-neighborhood "
                    "of every maximum of Q"
                )


def barycenter(v: Field, epsilon: float, p_prime: float,
               cfg: BarycenterConfig) -> np.ndarray:
    """Truncated first moment of |v|^p' in original (unscaled) coordinates.

    beta(v) = ||v||_p'^(-p') * int Xi(eps x) |v(x)|^p' dx.
    """
    weight = np.abs(v.values) ** p_prime
    total = weight.sum()
    if total == 0.0:
        raise ValueError("cannot take the barycenter of the zero field")
    grid = v.grid
    pts = np.stack([epsilon * grid.coords(d) for d in range(grid.dim)], axis=-1)
    norms = np.linalg.norm(pts, axis=-1)
    outside = norms > cfg.rho
    scale = np.ones_like(norms)
    scale[outside] = cfg.rho / norms[outside]
    xi = pts * scale[..., None]
    return np.tensordot(weight, xi, axes=grid.dim) / total


def edge_mass(v: Field, p_prime: float, shell_fraction: float = 0.1) -> float:
    """Fraction of ||v||_p'^p' sitting in the outer shell of the box."""
    grid = v.grid
    cut = (1.0 - shell_fraction) * grid.half_length
    outer = np.zeros(grid.shape, dtype=bool)
    for d in range(grid.dim):
        outer |= np.abs(grid.coords(d)) > cut
    weight = np.abs(v.values) ** p_prime
    return float(weight[outer].sum() / weight.sum())


def aligned_distance(v: Field, w0: Field, p_prime: float) -> tuple[float, tuple[int, ...]]:
    """min over lattice shifts y of ||v(. + y) - w0||_p' / ||w0||_p' (signs identified).

    The candidate shift maximizes the periodic cross-correlation of the
    |.|^p' profiles (computed by FFT); the distance is then evaluated
    exactly at that shift and its 3^N neighborhood, for both signs.
    """
    grid = v.grid
    if grid != w0.grid:
        raise ValueError("fields live on different grids")
    a = np.abs(v.values) ** p_prime
    b = np.abs(w0.values) ** p_prime
    corr = np.fft.ifftn(np.fft.fftn(a) * np.conj(np.fft.fftn(b))).real
    center = np.unravel_index(np.argmax(corr), corr.shape)
    denom = lp_norm(w0, p_prime)
    best = np.inf
    best_shift: tuple[int, ...] = (0,) * grid.dim
    offsets = np.stack(np.meshgrid(*([[-1, 0, 1]] * grid.dim), indexing="ij"),
                       axis=-1).reshape(-1, grid.dim)
    for off in offsets:
        shift = tuple(-(int(c) + int(o)) for c, o in zip(center, off))
        rolled = np.roll(v.values, shift, axis=tuple(range(grid.dim)))
        for sign in (1.0, -1.0):
            d = lp_norm(Field(grid, sign * rolled - w0.values), p_prime) / denom
            if d < best:
                best = d
                best_shift = shift
    return best, best_shift


@dataclass(frozen=True)
class SweepRecord:
    """Diagnostics of one concentration-sweep point."""

    epsilon: float
    converged: bool
    energy: float | None
    barycenter: tuple[float, ...] | None
    distance_to_maxima: float | None
    nearest_maximum: tuple[float, ...] | None
    limit_distance: float | None      # translation-aligned L^p' distance to w0
    pde_residual: float | None
    edge_mass: float | None
    edge_trusted: bool
    solution_maximum: tuple[float, ...] | None  # argmax of |u| in original coords
    failure: str | None = None

    CSV_HEADER = ("epsilon,converged,energy,barycenter,distance_to_maxima,"
                  "nearest_maximum,limit_distance,pde_residual,edge_mass,"
                  "edge_trusted,solution_maximum,failure")

    def csv_row(self) -> str:
        def num(x):
            return "" if x is None else repr(float(x))

        def pt(x):
            return "" if x is None else "(" + " ".join(repr(float(c)) for c in x) + ")"

        return ",".join([
            repr(self.epsilon), str(self.converged), num(self.energy),
            pt(self.barycenter), num(self.distance_to_maxima),
            pt(self.nearest_maximum), num(self.limit_distance),
            num(self.pde_residual), num(self.edge_mass),
            str(self.edge_trusted), pt(self.solution_maximum),
            self.failure or "",
        ])


def _nearest_maximum(beta: np.ndarray, maxima) -> tuple[float, tuple[float, ...]]:
    dists = [float(np.linalg.norm(beta - np.asarray(y))) for y in maxima]
    i = int(np.argmin(dists))
    return dists[i], tuple(float(c) for c in maxima[i])


def sweep_point(spec: ProblemSpec, grid: Grid, solver_cfg: SolverConfig,
                bary_cfg: BarycenterConfig, limit_state: DualState,
                edge_threshold: float = 0.5) -> SweepRecord:
    """Solve one epsilon and assemble its record; failures become flagged rows."""
    try:
        seeds = default_seeds(spec, grid, solver_cfg, limit_state)
        state = solve_ground_state(spec, grid, solver_cfg, seeds=seeds)
    except (NoConvergence, AllSeedsLeftCone, ValueError) as err:
        return SweepRecord(spec.epsilon, False, None, None, None, None, None,
                           None, None, False, None, failure=str(err))
    pp = spec.p_prime
    beta = barycenter(state.v, spec.epsilon, pp, bary_cfg)
    dist, nearest = _nearest_maximum(beta, spec.coefficient.maximum_set)
    ldist, _ = aligned_distance(state.v, limit_state.v, pp)
    u, _ = to_solution(state.v, spec)
    resid = pde_residual(u, spec)
    em = edge_mass(state.v, pp)
    peak = np.unravel_index(np.argmax(np.abs(u.values)), grid.shape)
    sol_max = tuple(spec.epsilon * float(grid.x_axis[i]) for i in peak)
    return SweepRecord(
        epsilon=spec.epsilon, converged=True, energy=state.energy,
        barycenter=tuple(float(c) for c in beta), distance_to_maxima=dist,
        nearest_maximum=nearest, limit_distance=ldist, pde_residual=resid,
        edge_mass=em, edge_trusted=em <= edge_threshold,
        solution_maximum=sol_max,
    )


def concentration_sweep(template: ProblemSpec, epsilon_list, grid: Grid,
                        solver_cfg: SolverConfig, bary_cfg: BarycenterConfig,
                        limit_state: DualState | None = None,
                        edge_threshold: float = 0.5) -> list[SweepRecord]:
    """Ground-state solves over a decreasing epsilon list, one record each.

    Requires a coefficient with a finite maximum set (a constant coefficient
    has no localization target).  Per-point failures are recorded and the
    sweep continues.
    """
    eps = [float(e) for e in epsilon_list]
    if any(b >= a for a, b in zip(eps, eps[1:])):
        raise ValueError("epsilon list must be strictly decreasing")
    if not template.coefficient.maximum_set:
        raise ValueError("concentration sweep needs a coefficient with a "
                         "finite maximum set (not constant)")
    bary_cfg.validate_for(template.coefficient)
    if limit_state is None:
        limit_state = solve_limit(template.coefficient.q_sup, template.p, grid,
                                  solver_cfg, resolvent=template.resolvent)
    return [
        sweep_point(replace(template, epsilon=e), grid, solver_cfg, bary_cfg,
                    limit_state, edge_threshold)
        for e in eps
    ]


def sweep_to_csv(records) -> str:
    return "\n".join([SweepRecord.CSV_HEADER] + [r.csv_row() for r in records]) + "\n"


def compact_bump(grid: Grid, center, radius: float,
                 modulation: float = 1.1) -> Field:
    """Smooth bump supported in the ball of given radius around ``center``.

    Radial profile eta(2 r / radius) with the standard smooth cutoff eta
    (identically 1 up to half the radius, 0 beyond), modulated by
    cos(modulation * r) like the solver seeds.
    """
    r_sq = np.zeros(grid.shape)
    for d in range(grid.dim):
        r_sq = r_sq + (grid.coords(d) - center[d]) ** 2
    r = np.sqrt(r_sq)
    vals = CutoffSpec().profile(2.0 * r / radius)
    if modulation > 0.0:
        vals = vals * np.cos(modulation * r)
    return Field(grid, vals)


@dataclass(frozen=True)
class DecayRecord:
    r: float
    interaction: float  # |int u R v| / (||u||_p' ||v||_p')


@dataclass(frozen=True)
class DecayReport:
    dim: int
    p: float
    lambda_p: float
    records: tuple[DecayRecord, ...]
    slope: float       # log-log least-squares slope over the largest decade

    @property
    def satisfies_bound(self) -> bool:
        """Fitted slope consistent with decay at least r^(-lambda_p) (with slack)."""
        return self.slope <= -self.lambda_p + 0.5


def interaction_decay(dim: int, p: float, grid: Grid, r_list,
                      resolvent: ResolventConfig | None = None,
                      bump_radius: float = 2.0,
                      modulation: float = 0.0,
                      boundary_wavelengths: float = 5.0) -> DecayReport:
    """Normalized interaction |int u R v| of disjointly supported bumps vs distance.

    u is a fixed bump at the origin (support radius ``bump_radius``); for each
    r the second bump is centered at distance r + 2 * bump_radius along the
    first axis, so the supports are separated by exactly r.  Both supports
    must stay ``boundary_wavelengths`` wavelengths (2 pi each) away from the
    box boundary.
    """
    if dim != grid.dim:
        raise ValueError("dim does not match the grid")
    lam = lambda_p(dim, p)
    rl = [float(r) for r in r_list]
    if len(rl) < 3 or any(b <= a for a, b in zip(rl, rl[1:])) or rl[0] < 1.0:
        raise ValueError("r_list must be increasing with at least 3 entries, r >= 1")
    margin = 2.0 * np.pi * boundary_wavelengths
    farthest = rl[-1] + 3.0 * bump_radius
    if farthest + margin > grid.half_length:
        raise ValueError(
            f"box too small: need half_length >= {farthest + margin:.1f} "
            f"to keep supports {boundary_wavelengths} wavelengths off the boundary"
        )
    cfg = resolvent if resolvent is not None else ResolventConfig()
    pp = p / (p - 1.0)
    u = compact_bump(grid, (0.0,) * dim, bump_radius, modulation)
    u_norm = lp_norm(u, pp)
    # int u R v = int (R u) v by symmetry of the real multiplier: one FFT total
    ru = apply_R(u, cfg)
    records = []
    for r in rl:
        center = (r + 2.0 * bump_radius,) + (0.0,) * (dim - 1)
        v = compact_bump(grid, center, bump_radius, modulation)
        overlap = np.abs(u.values * v.values).max()
        if overlap > 0.0:
            raise ValueError(f"supports overlap at r = {r}")
        val = abs(inner_product(ru, v)) / (u_norm * lp_norm(v, pp))
        records.append(DecayRecord(r=r, interaction=val))
    in_decade = [rec for rec in records if rec.r >= rl[-1] / 10.0]
    logs = np.log([rec.r for rec in in_decade])
    vals = np.log([max(rec.interaction, 1e-300) for rec in in_decade])
    slope = float(np.polyfit(logs, vals, 1)[0])
    return DecayReport(dim=dim, p=p, lambda_p=lam, records=tuple(records),
                       slope=slope)


@dataclass(frozen=True)
class EnergyComparison:
    """Ground-state levels of one problem against its two constant-Q anchors."""

    c_eps: float
    c_0: float
    c_inf: float | None     # omitted when Q vanishes at infinity
    epsilon: float
    slack: float = 1e-4

    @property
    def lower_bound_holds(self) -> bool:
        """c_eps >= c_0 up to relative quadrature slack (needs Q <= Q_0)."""
        return self.c_eps >= self.c_0 * (1.0 - self.slack)

    @property
    def upper_bound_holds(self) -> bool:
        """c_eps < c_inf (the compactness window); vacuous without c_inf."""
        return self.c_inf is None or self.c_eps < self.c_inf

    def csv(self) -> str:
        rows = [f"level,value", f"c_0,{self.c_0!r}", f"c_eps,{self.c_eps!r}"]
        if self.c_inf is not None:
            rows.append(f"c_inf,{self.c_inf!r}")
        return "\n".join(rows) + "\n"


def energy_comparison(spec: ProblemSpec, grid: Grid, solver_cfg: SolverConfig,
                      slack: float = 1e-4,
                      limit_state: DualState | None = None) -> EnergyComparison:
    """Compute c_0 (at sup Q), c_inf (at the tail level of Q, if positive), c_eps."""
    coef = spec.coefficient
    if limit_state is None:
        limit_state = solve_limit(coef.q_sup, spec.p, grid, solver_cfg,
                                  resolvent=spec.resolvent)
    c0 = limit_state.energy
    if coef.q_infinity > 0.0:
        c_inf = solve_limit(coef.q_infinity, spec.p, grid, solver_cfg,
                            resolvent=spec.resolvent).energy
    else:
        c_inf = None
    state = solve_ground_state(spec, grid, solver_cfg, limit_state=limit_state)
    return EnergyComparison(c_eps=state.energy, c_0=c0, c_inf=c_inf,
                            epsilon=spec.epsilon, slack=slack)


def homogeneity_ratio(p: float, q_ratio: float) -> float:
    """Predicted c_0(Q_0 * q_ratio) / c_0(Q_0) from the Q^(2/p) scaling.

    The quadratic term scales by Q_0^(2/p), so Nehari levels scale by
    q_ratio^(-(2/p) * p'/(2 - p')).
    """
    pp = p / (p - 1.0)
    return q_ratio ** (-(2.0 / p) * pp / (2.0 - pp))

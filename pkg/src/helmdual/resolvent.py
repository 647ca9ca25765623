"""Real Helmholtz resolvent as a Fourier multiplier, plus a direct-space oracle.

The multiplier is Re 1/(|xi|^2 - 1 - i delta) = (|xi|^2 - 1)/((|xi|^2 - 1)^2 + delta^2).
With delta = 0 it requires a frequency lattice that avoids |xi| = 1 (grid
invariant); the direct-space route sums the free-space kernel over all source
cells and is O(n^2N), intended for cross-validation on small grids only.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import Field, dft_forward, dft_inverse, inner_product, spectral_laplacian
from .kernels import KernelSpec


class SingularLatticeError(ValueError):
    """delta = 0 requested on a lattice containing |xi| = 1."""


class GridTooLargeError(ValueError):
    """Direct-space oracle guard exceeded."""


#: default node-count guards for the O(n^2N) oracle
DIRECT_GUARD = {2: 40**2, 3: 16**3}


@dataclass(frozen=True)
class ResolventConfig:
    delta: float = 0.0
    mode: str = "multiplier"
    kernel: KernelSpec | None = None
    direct_max_nodes: int | None = None

    def __post_init__(self):
        if self.delta < 0:
            raise ValueError("delta must be nonnegative")
        if self.mode not in ("multiplier", "direct_oracle"):
            raise ValueError(f"unknown resolvent mode {self.mode!r}")


def multiplier_value(xi_sq, delta: float):
    """Re 1/(|xi|^2 - 1 - i delta) as a function of |xi|^2."""
    xi_sq = np.asarray(xi_sq, dtype=np.float64)
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    diff = xi_sq - 1.0
    if delta == 0.0:
        if np.any(diff == 0.0):
            raise SingularLatticeError("multiplier singular at |xi|^2 = 1 with delta = 0")
        out = 1.0 / diff
    else:
        out = diff / (diff * diff + delta * delta)
    return out if out.ndim else float(out)


def apply_R(f: Field, cfg: ResolventConfig) -> Field:
    """Resolvent applied to a field; multiplier route unless cfg says otherwise."""
    if cfg.mode == "direct_oracle":
        kernel = cfg.kernel if cfg.kernel is not None else KernelSpec(f.grid.dim)
        return apply_R_direct(f, kernel, max_nodes=cfg.direct_max_nodes)
    grid = f.grid
    if cfg.delta == 0.0 and grid.singular:
        raise SingularLatticeError(
            "frequency lattice contains |xi| = 1; shift the lattice or use delta > 0"
        )
    symbol = multiplier_value(grid.xi_squared, cfg.delta)
    return dft_inverse(symbol * dft_forward(f), grid)


def apply_R_direct(f: Field, spec: KernelSpec, max_nodes: int | None = None) -> Field:
    """Free-space convolution with Re Phi, literal sum over all source cells.

    The kernel is tabulated on the (2n-1)^N difference lattice and gathered
    per target row, so the cost is O(n^2N) multiply-adds.  Non-periodic: no
    wrap-around images, which is exactly what makes it an independent check
    of the periodic multiplier route.
    """
    grid = f.grid
    if spec.dim != grid.dim:
        raise ValueError("kernel dimension does not match grid")
    guard = max_nodes if max_nodes is not None else DIRECT_GUARD[grid.dim]
    if grid.num_nodes > guard:
        raise GridTooLargeError(
            f"{grid.num_nodes} nodes exceeds direct-oracle guard {guard}"
        )
    n, h = grid.points_per_axis, grid.spacing
    # kernel on the difference lattice, index offset n-1 per axis
    diff = h * np.arange(-(n - 1), n)
    r_sq = np.zeros((2 * n - 1,) * grid.dim)
    for d in range(grid.dim):
        shape = [1] * grid.dim
        shape[d] = 2 * n - 1
        r_sq = r_sq + (diff**2).reshape(shape)
    kernel = spec.evaluate(np.sqrt(r_sq), h).ravel()

    src = f.values.ravel()
    idx = np.indices(grid.shape).reshape(grid.dim, -1)  # (dim, n^N)
    strides = np.array([(2 * n - 1) ** (grid.dim - 1 - d) for d in range(grid.dim)])
    out = np.empty(grid.num_nodes)
    chunk = max(1, 2**22 // grid.num_nodes)
    for start in range(0, grid.num_nodes, chunk):
        stop = min(start + chunk, grid.num_nodes)
        # flat difference-lattice index for every (target, source) pair
        offsets = idx[:, start:stop, None] - idx[:, None, :] + (n - 1)
        flat = (strides[:, None, None] * offsets).sum(axis=0)
        out[start:stop] = kernel[flat] @ src
    return Field(grid, (grid.cell_volume * out).reshape(grid.shape))


def bilinear_R(u: Field, v: Field, cfg: ResolventConfig) -> float:
    """int u R v dx; symmetric in (u, v) since the multiplier is real and even."""
    return inner_product(u, apply_R(v, cfg))


def resolvent_identity_residual(f: Field, cfg: ResolventConfig) -> float:
    """Relative L^2 residual of -Laplacian(Rf) - Rf = f (exact for delta = 0)."""
    rf = apply_R(f, cfg)
    lhs = -spectral_laplacian(rf).values - rf.values
    denom = np.linalg.norm(f.values)
    return float(np.linalg.norm(lhs - f.values) / denom) if denom > 0 else 0.0

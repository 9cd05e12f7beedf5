"""Observation operators I_h and an empirical check of their approximation property

    |I_h g - g|^2 <= c1^2 h^2 ||g||^2 + c2^2 h^4 |A g|^2,

where ``||g||`` is the gradient (H^1 seminorm) norm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import spectral_core as sc
from .errors import ConfigError
from .spectral_core import Grid, SpectralVectorField

KINDS = ("modal", "volume-average")


@dataclass(frozen=True)
class InterpolantSpec:
    kind: str = "modal"
    h: float = 0.043
    c1: float = math.sqrt(32.0)
    c2: float = 2.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown interpolant kind {self.kind!r}; expected one of {KINDS}")
        if not self.h > 0:
            raise ConfigError(f"h must be positive, got {self.h}")
        if not (self.c1 > 0 and self.c2 > 0):
            raise ConfigError("approximation constants c1, c2 must be positive")

    def modal_cutoff(self, L: float) -> int:
        if self.h > L:
            raise ConfigError(f"h={self.h} exceeds the box period L={L}")
        return int(math.floor(L / self.h))


def cells_per_dim(grid: Grid, h: float) -> int:
    """Number of averaging cubes per dimension: the divisor of N closest to L/h."""
    if h > grid.L:
        raise ConfigError(f"h={h} exceeds the box period L={grid.L}")
    target = grid.L / h
    divisors = [d for d in range(1, grid.N + 1) if grid.N % d == 0]
    return min(divisors, key=lambda d: (abs(d - target), -d))


def observed_mask(grid: Grid, spec: InterpolantSpec) -> np.ndarray:
    """Modes retained by the modal interpolant (|K|_inf <= floor(L/h))."""
    m = spec.modal_cutoff(grid.L)
    return np.all(np.abs(grid.K) <= m, axis=0) & ~grid.zero_mode


def _volume_average(grid: Grid, c: np.ndarray, n_cells: int) -> np.ndarray:
    N = grid.N
    s = N // n_cells
    phys = sc.fft_inverse(grid, c)
    lead = phys.shape[:-3]
    blocks = phys.reshape(*lead, n_cells, s, n_cells, s, n_cells, s)
    means = blocks.mean(axis=(-5, -3, -1), keepdims=True)
    piecewise = np.broadcast_to(means, blocks.shape).reshape(phys.shape)
    return sc.fft_forward(grid, piecewise)


def apply_interpolant_array(grid: Grid, c: np.ndarray, spec: InterpolantSpec) -> np.ndarray:
    if spec.kind == "modal":
        return np.where(observed_mask(grid, spec), c, 0.0)
    return _volume_average(grid, c, cells_per_dim(grid, spec.h))


def apply_interpolant(field: SpectralVectorField, spec: InterpolantSpec) -> SpectralVectorField:
    out = apply_interpolant_array(field.grid, field.coeffs, spec)
    # the low-pass keeps solenoidal fields solenoidal; cell averaging does not
    tag = field.divergence_free and spec.kind == "modal"
    return SpectralVectorField(field.grid, out, tag)


def describe(grid: Grid, spec: InterpolantSpec) -> dict[str, object]:
    """Both readings of h for the run log: modal cutoff and averaging cell size."""
    cutoff = spec.modal_cutoff(grid.L)
    n_cells = cells_per_dim(grid, spec.h)
    observed = int(np.sum(observed_mask(grid, spec) * grid.parseval_weight))
    return {
        "kind": spec.kind,
        "h": spec.h,
        "modal_cutoff": cutoff,
        "modal_observed_modes": observed,
        "modal_observes_all": cutoff >= grid.N // 2,
        "volume_cells_per_dim": n_cells,
        "volume_cell_side": grid.L / n_cells,
    }


@dataclass
class ApproximationReport:
    trials: int
    worst_ratio: float
    passed: bool
    c1: float
    c2: float
    h: float


def approximation_sides(g: SpectralVectorField, spec: InterpolantSpec) -> tuple[float, float]:
    """(|I_h g - g|^2, c1^2 h^2 ||g||^2 + c2^2 h^4 |A g|^2)."""
    grid = g.grid
    diff = apply_interpolant_array(grid, g.coeffs, spec) - g.coeffs
    lhs = sc.norm_sq(grid, diff, 0)
    rhs = spec.c1**2 * spec.h**2 * sc.norm_sq(grid, g.coeffs, 1) + spec.c2**2 * spec.h**4 * sc.norm_sq(
        grid, g.coeffs, 2
    )
    return lhs, rhs


def verify_approximation_property(
    spec: InterpolantSpec, grid: Grid, trials: int = 100, seed: int = 0
) -> ApproximationReport:
    if trials < 1:
        raise ConfigError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        g = sc.random_field(grid, rng, decay=4.0, divergence_free=False)
        lhs, rhs = approximation_sides(g, spec)
        worst = max(worst, lhs / rhs)
    return ApproximationReport(trials, worst, worst <= 1.0, spec.c1, spec.c2, spec.h)

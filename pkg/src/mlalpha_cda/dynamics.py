"""Right-hand sides of the modified Leray-alpha truth system and its nudged twin.

Both systems are written for the filtered velocity with the pressure removed
by the Leray projection:

    du/dt = -nu A u - (I + alpha^2 A)^{-1} B(v, u) + (I + alpha^2 A)^{-1} f,
    dw/dt = -nu A w - (I + beta^2 A)^{-1} B(z, w) + (I + beta^2 A)^{-1} f
            - eta P (I_h w - I_h u),

with v = (I + alpha^2 A) u, z = (I + beta^2 A) w and B(v, u) = P[(v . grad) u].
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numba
import numpy as np

from . import spectral_core as sc
from .errors import ConfigError
from .observation import InterpolantSpec, apply_interpolant_array
from .spectral_core import Grid, SpectralVectorField

DEFAULT_AMPLITUDE = 0.05
NOISE_SCALE = 0.02
NOISE_SHIFT = 0.01


@dataclass(frozen=True)
class ModelParams:
    nu: float
    alpha: float
    L: float = 1.0
    forcing: SpectralVectorField | None = field(default=None, compare=False)

    def __post_init__(self):
        if not self.nu > 0:
            raise ConfigError(f"nu must be positive, got {self.nu}")
        if not self.alpha > 0:
            raise ConfigError(f"alpha must be positive, got {self.alpha}")
        if not self.L > 0:
            raise ConfigError(f"L must be positive, got {self.L}")
        if self.forcing is not None:
            f = sc.leray_project(self.forcing)
            object.__setattr__(self, "forcing", f)


@dataclass(frozen=True)
class AssimilationParams:
    beta: float
    eta: float
    h: float
    interpolant: str = "modal"
    c1: float = math.sqrt(32.0)
    c2: float = 2.0

    def __post_init__(self):
        for name in ("beta", "h", "c1", "c2"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")
        # eta = 0 is allowed for un-nudged control runs
        if not self.eta >= 0:
            raise ConfigError(f"eta must be non-negative, got {self.eta}")
        if self.interpolant not in ("modal", "volume-average"):
            raise ConfigError(f"unknown interpolant kind {self.interpolant!r}")

    @property
    def spec(self) -> InterpolantSpec:
        return InterpolantSpec(self.interpolant, self.h, self.c1, self.c2)


@dataclass(frozen=True)
class TwinState:
    """Truth ``u`` and assimilated ``w`` at time ``t``.

    Both fields are stored multiplied by ``2**scale_exp``. The exponent lets a
    decaying unforced run continue far past the point where the physical
    coefficients would underflow; powers of two rescale exactly.
    """

    u: SpectralVectorField
    w: SpectralVectorField
    t: float = 0.0
    scale_exp: int = 0
    # steps taken since ``t_start``; times are t_start + steps * dt, not a running sum
    steps: int = 0
    t_start: float = 0.0

    def __post_init__(self):
        sc._same_grid(self.u, self.w)
        if self.steps == 0:
            object.__setattr__(self, "t_start", self.t)

    @property
    def grid(self) -> Grid:
        return self.u.grid

    def physical_u(self) -> SpectralVectorField:
        return self.u.with_coeffs(sc.ldexp_complex(self.u.coeffs, -self.scale_exp))

    def physical_w(self) -> SpectralVectorField:
        return self.w.with_coeffs(sc.ldexp_complex(self.w.coeffs, -self.scale_exp))


def forcing_sup_sq(p: ModelParams) -> float:
    """sup_t |f|^2 for the (steady) forcing."""
    if p.forcing is None:
        return 0.0
    return sc.norm_L2(p.forcing) ** 2


def kolmogorov_forcing(grid: Grid, amplitude: float, wavenumber: int = 1) -> SpectralVectorField:
    """Steady shear forcing f = amplitude * sin(2 pi k y / L) e_x."""
    y = grid.points[1]
    phys = np.zeros((3, *grid.shape))
    phys[0] = amplitude * np.sin(2 * np.pi * wavenumber * y / grid.L)
    return sc.leray_project(sc.forward_transform(phys, grid))


# --- bilinear term ---------------------------------------------------------------


def advect(grid: Grid, v: np.ndarray, u: np.ndarray) -> np.ndarray:
    """P[(v . grad) u] for coefficient arrays with optional leading batch axes.

    Evaluated in divergence form d_j(v_j u_i), valid because v is solenoidal.
    Both inputs are truncated to the dealiased band before the product and
    the result is truncated again, so retained modes carry no aliasing error.
    """
    scaled_mask, kx, kz, weight = _operators(grid)
    lead = u.shape[:-4]
    phys = sc._irfftn(np.concatenate([v * scaled_mask, u * scaled_mask], axis=-4), grid.shape)
    flux = sc._rfftn(phys[..., 3:, None, :, :, :] * phys[..., None, :3, :, :, :])
    flux = flux.reshape(-1, 3, 3, *grid.spectral_shape)
    out = np.empty((flux.shape[0], 3, *grid.spectral_shape), dtype=complex)
    _divergence_projected(flux, kx, kx, kz, weight, out)
    return out.reshape(*lead, 3, *grid.spectral_shape)


@numba.njit(cache=True)
def _divergence_projected(flux, kx, ky, kz, weight, out):
    """out_k = i weight P_ki (k_j flux_ij), looping once over modes."""
    for b in range(flux.shape[0]):
        for a in range(flux.shape[3]):
            for c in range(flux.shape[4]):
                for e in range(flux.shape[5]):
                    wgt = weight[a, c, e]
                    if wgt == 0.0:
                        out[b, 0, a, c, e] = 0.0
                        out[b, 1, a, c, e] = 0.0
                        out[b, 2, a, c, e] = 0.0
                        continue
                    k0 = kx[a]
                    k1 = ky[c]
                    k2 = kz[e]
                    d0 = flux[b, 0, 0, a, c, e] * k0 + flux[b, 0, 1, a, c, e] * k1 + flux[b, 0, 2, a, c, e] * k2
                    d1 = flux[b, 1, 0, a, c, e] * k0 + flux[b, 1, 1, a, c, e] * k1 + flux[b, 1, 2, a, c, e] * k2
                    d2 = flux[b, 2, 0, a, c, e] * k0 + flux[b, 2, 1, a, c, e] * k1 + flux[b, 2, 2, a, c, e] * k2
                    s = (k0 * d0 + k1 * d1 + k2 * d2) / (k0 * k0 + k1 * k1 + k2 * k2)
                    out[b, 0, a, c, e] = 1j * wgt * (d0 - k0 * s)
                    out[b, 1, a, c, e] = 1j * wgt * (d1 - k1 * s)
                    out[b, 2, a, c, e] = 1j * wgt * (d2 - k2 * s)
    return out


_OPERATOR_CACHE: dict[Grid, tuple] = {}


def _operators(grid: Grid):
    """(mask * N^3, per-axis wavenumbers, output weight) for :func:`advect`."""
    if grid not in _OPERATOR_CACHE:
        m = grid.dealias_mask
        N = grid.N
        kx = 2 * np.pi * np.fft.fftfreq(N, 1.0 / N) / grid.L
        kz = 2 * np.pi * np.arange(N // 2 + 1, dtype=float) / grid.L
        # zero on the dealiased-out band, the zero mode and Nyquist modes
        weight = np.where(m & grid.active, 1.0 / N**3, 0.0)
        _OPERATOR_CACHE[grid] = (m * float(N**3), kx, kz, np.ascontiguousarray(weight))
    return _OPERATOR_CACHE[grid]


def bilinear_B(v: SpectralVectorField, u: SpectralVectorField) -> SpectralVectorField:
    sc._same_grid(v, u)
    return SpectralVectorField(u.grid, advect(u.grid, v.coeffs, u.coeffs), True)


# --- right-hand sides ------------------------------------------------------------


def truth_rhs(u: SpectralVectorField, p: ModelParams) -> SpectralVectorField:
    g = u.grid
    filt = sc.filter_symbol(g, p.alpha)
    v = (1.0 + p.alpha**2 * g.lam) * u.coeffs
    rhs = -p.nu * g.lam * u.coeffs - filt * advect(g, v, u.coeffs)
    if p.forcing is not None:
        rhs = rhs + filt * p.forcing.coeffs
    return SpectralVectorField(g, rhs, True)


def cda_rhs(
    w: SpectralVectorField,
    u_obs_interp: SpectralVectorField,
    p: ModelParams,
    a: AssimilationParams,
) -> SpectralVectorField:
    """dw/dt for the nudged system; ``u_obs_interp`` is P I_h(u) on w's grid."""
    sc._same_grid(w, u_obs_interp)
    g = w.grid
    filt = sc.filter_symbol(g, a.beta)
    z = (1.0 + a.beta**2 * g.lam) * w.coeffs
    rhs = -p.nu * g.lam * w.coeffs - filt * advect(g, z, w.coeffs)
    if p.forcing is not None:
        rhs = rhs + filt * p.forcing.coeffs
    obs_w = sc.project(g, apply_interpolant_array(g, w.coeffs, a.spec))
    rhs = rhs - a.eta * (obs_w - u_obs_interp.coeffs)
    return SpectralVectorField(g, rhs, True)


def observe(u: SpectralVectorField, a: AssimilationParams) -> SpectralVectorField:
    """The observation term P I_h(u) fed to :func:`cda_rhs`."""
    g = u.grid
    return SpectralVectorField(g, sc.project(g, apply_interpolant_array(g, u.coeffs, a.spec)), True)


# --- initial data ----------------------------------------------------------------


def _check_unit_box(grid: Grid):
    if grid.L != 1.0:
        raise ConfigError(f"the preset initial data are defined on [0,1]^3, got L={grid.L}")


def truth_formula(grid: Grid, amplitude: float = DEFAULT_AMPLITUDE) -> np.ndarray:
    x, y, z = grid.points
    tp = 2 * np.pi
    return amplitude * np.stack([np.sin(tp * x * z), np.sin(tp * x * y), np.sin(tp * y * z)])


def assimilated_formula(grid: Grid, amplitude: float = DEFAULT_AMPLITUDE) -> np.ndarray:
    x, y, z = grid.points
    pi = np.pi
    return amplitude * np.stack(
        [
            np.sin(pi * x) * np.cos(pi * y),
            np.sin(pi * y) * np.cos(pi * z),
            np.sin(pi * z) * np.cos(pi * x),
        ]
    )


def uniform_noise(grid: Grid, seed: int) -> np.ndarray:
    """0.02 X - 0.01 with X ~ U[0,1] drawn per component and collocation point."""
    rng = np.random.default_rng(seed)
    return NOISE_SCALE * rng.uniform(0.0, 1.0, size=(3, *grid.shape)) - NOISE_SHIFT


def _project_physical(phys: np.ndarray, grid: Grid) -> SpectralVectorField:
    return sc.leray_project(sc.forward_transform(phys, grid))


def initial_conditions_deterministic(grid: Grid, amplitude: float = DEFAULT_AMPLITUDE):
    _check_unit_box(grid)
    u0 = _project_physical(truth_formula(grid, amplitude), grid)
    w0 = _project_physical(assimilated_formula(grid, amplitude), grid)
    return u0, w0


def initial_conditions_random(grid: Grid, seed: int, amplitude: float = DEFAULT_AMPLITUDE):
    _check_unit_box(grid)
    phys = truth_formula(grid, amplitude) + uniform_noise(grid, seed)
    u0 = _project_physical(phys, grid)
    w0 = _project_physical(assimilated_formula(grid, amplitude), grid)
    return u0, w0

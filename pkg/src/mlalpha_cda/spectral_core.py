"""Periodic-box Fourier infrastructure.

Fields are stored as half-spectrum (``rfftn`` layout) coefficient arrays of
shape ``(3, N, N, N//2 + 1)`` normalized so that each entry is the Fourier
series coefficient ``u_K`` of

    u(x) = sum_K u_K exp(2 pi i K.x / L).

The zero mode is always held at zero. Modes on the Nyquist planes
(any ``|K_i| = N/2``) are dropped by every differential operator and by the
Leray projection.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.fft as sfft

from .errors import ConfigError, InvariantError

# relative tolerance for imaginary residue / Hermitian defect on inverse
HERMITIAN_TOL = 1e-12


@dataclass(frozen=True)
class Grid:
    """Cubic periodic grid of side ``L`` with ``N`` points per dimension."""

    L: float = 1.0
    N: int = 32
    dealias_fraction: float = 2.0 / 3.0

    def __post_init__(self):
        if not isinstance(self.N, (int, np.integer)) or self.N < 4 or self.N % 2:
            raise ConfigError(f"grid N must be an even integer >= 4, got {self.N!r}")
        if not self.L > 0:
            raise ConfigError(f"grid L must be positive, got {self.L!r}")
        if not 0 < self.dealias_fraction <= 1:
            raise ConfigError(
                f"dealias_fraction must lie in (0, 1], got {self.dealias_fraction!r}"
            )

    # --- wavevector tables (computed once per grid) -----------------------

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.N, self.N, self.N)

    @property
    def spectral_shape(self) -> tuple[int, int, int]:
        return (self.N, self.N, self.N // 2 + 1)

    @cached_property
    def K(self) -> np.ndarray:
        """Integer wavevectors, shape (3, N, N, N//2+1); Nyquist stored as +N/2."""
        N = self.N
        k = np.fft.fftfreq(N, 1.0 / N)
        k[N // 2] = N // 2
        kz = np.arange(N // 2 + 1, dtype=float)
        KX, KY, KZ = np.meshgrid(k, k, kz, indexing="ij")
        return np.stack([KX, KY, KZ])

    @cached_property
    def nyquist(self) -> np.ndarray:
        return np.any(np.abs(self.K) == self.N // 2, axis=0)

    @cached_property
    def zero_mode(self) -> np.ndarray:
        m = np.zeros(self.spectral_shape, dtype=bool)
        m[0, 0, 0] = True
        return m

    @cached_property
    def active(self) -> np.ndarray:
        """Modes the differential operators act on: not zero, not Nyquist."""
        return ~(self.nyquist | self.zero_mode)

    @cached_property
    def K_active(self) -> np.ndarray:
        return np.where(self.active, self.K, 0.0)

    @cached_property
    def K_sq(self) -> np.ndarray:
        return np.sum(self.K**2, axis=0)

    @cached_property
    def wavenumber(self) -> np.ndarray:
        """Physical wavevector 2 pi K / L with inactive modes zeroed."""
        return 2 * np.pi * self.K_active / self.L

    @cached_property
    def lam(self) -> np.ndarray:
        """Stokes eigenvalues 4 pi^2 |K|^2 / L^2; zero on inactive modes."""
        return np.where(self.active, 4 * np.pi**2 * self.K_sq / self.L**2, 0.0)

    @property
    def lambda1(self) -> float:
        return 4 * np.pi**2 / self.L**2

    @cached_property
    def _inv_K_sq(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.where(self.active, 1.0 / np.where(self.active, self.K_sq, 1.0), 0.0)

    @property
    def dealias_cutoff(self) -> float:
        return self.dealias_fraction * self.N / 2

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        keep = np.all(np.abs(self.K) <= self.dealias_cutoff + 1e-12, axis=0)
        return keep & ~self.zero_mode

    @cached_property
    def parseval_weight(self) -> np.ndarray:
        """Multiplicity of each stored half-spectrum mode in the full sum."""
        w = np.full(self.spectral_shape, 2.0)
        w[..., 0] = 1.0
        w[..., -1] = 1.0
        return w

    @cached_property
    def points(self) -> np.ndarray:
        """Collocation points x_j = j L / N, shape (3, N, N, N)."""
        x = np.arange(self.N) * self.L / self.N
        return np.stack(np.meshgrid(x, x, x, indexing="ij"))


# --- raw array kernels ------------------------------------------------------
# These operate on coefficient arrays with trailing spectral axes and are what
# the time stepper uses; the field-level API below wraps them.

_AXES = (-3, -2, -1)


def _select_backend() -> str:
    choice = os.environ.get("MLALPHA_CDA_FFT", "auto").lower()
    if choice not in ("auto", "torch", "scipy"):
        raise ConfigError(f"MLALPHA_CDA_FFT must be auto, torch or scipy, got {choice!r}")
    if choice == "scipy":
        return "scipy"
    try:
        import torch  # noqa: F401
    except ImportError:
        if choice == "torch":
            raise
        return "scipy"
    return "torch"


FFT_BACKEND = _select_backend()

if FFT_BACKEND == "torch":
    import torch

    torch.set_num_threads(1)

    def _rfftn(x: np.ndarray) -> np.ndarray:
        return torch.fft.rfftn(torch.from_numpy(np.ascontiguousarray(x)), dim=_AXES).numpy()

    def _irfftn(c: np.ndarray, shape) -> np.ndarray:
        t = torch.from_numpy(np.ascontiguousarray(c))
        return torch.fft.irfftn(t, s=shape, dim=_AXES).numpy()

else:

    def _rfftn(x: np.ndarray) -> np.ndarray:
        return sfft.rfftn(x, axes=_AXES)

    def _irfftn(c: np.ndarray, shape) -> np.ndarray:
        return sfft.irfftn(c, s=shape, axes=_AXES)


def fft_forward(grid: Grid, x: np.ndarray) -> np.ndarray:
    c = _rfftn(x) / grid.N**3
    c[..., 0, 0, 0] = 0.0
    return c


def fft_inverse(grid: Grid, c: np.ndarray) -> np.ndarray:
    return _irfftn(c, grid.shape) * grid.N**3


def project(grid: Grid, c: np.ndarray) -> np.ndarray:
    """Leray projection of a (..., 3, *spectral) coefficient array."""
    K = grid.K_active
    kdotc = np.sum(K * c, axis=-4) * grid._inv_K_sq
    return np.where(grid.active, c - K * kdotc[..., None, :, :, :], 0.0)


def divergence_residual(grid: Grid, c: np.ndarray) -> float:
    """max |K . c(K)| / |K| relative to max |c|; 0 for the zero field."""
    scale = np.max(np.abs(c))
    if scale == 0:
        return 0.0
    kdotc = np.abs(np.sum(grid.K_active * c, axis=-4)) * np.sqrt(grid._inv_K_sq)
    return float(np.max(kdotc) / scale)


def hermitian_defect(grid: Grid, c: np.ndarray) -> float:
    """Relative violation of c(-K) = conj(c(K)) on the self-conjugate planes."""
    N = grid.N
    idx = (-np.arange(N)) % N
    scale = np.max(np.abs(c))
    if scale == 0:
        return 0.0
    worst = 0.0
    planes = [0] + ([N // 2] if c.shape[-1] == N // 2 + 1 else [])
    for p in planes:
        plane = c[..., p]
        mirrored = np.conj(plane[..., idx, :][..., idx])
        worst = max(worst, float(np.max(np.abs(plane - mirrored))))
    return worst / scale


def ldexp_complex(c: np.ndarray, exp: int) -> np.ndarray:
    """c * 2**exp, computed exactly per real and imaginary part."""
    c = np.ascontiguousarray(c, dtype=complex)
    return np.ldexp(c.view(float), exp).view(complex)


def norm_sq(grid: Grid, c: np.ndarray, power: int = 0) -> float:
    """L^3 sum_K lam_K^power |c_K|^2 over the full (Hermitian) spectrum."""
    a = np.abs(c) ** 2
    if a.ndim > 3:
        a = a.reshape(-1, *grid.spectral_shape).sum(axis=0)
    w = grid.parseval_weight
    if power:
        w = w * grid.lam**power
    return float(grid.L**3 * np.sum(w * a))


# --- field types --------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SpectralScalarField:
    grid: Grid
    coeffs: np.ndarray

    def __post_init__(self):
        if self.coeffs.shape != self.grid.spectral_shape:
            raise ConfigError(
                f"scalar coefficients must have shape {self.grid.spectral_shape}, "
                f"got {self.coeffs.shape}"
            )


@dataclass(frozen=True, eq=False)
class SpectralVectorField:
    """Three-component field sharing one grid.

    ``divergence_free`` is a tag set by operations that guarantee
    ``K . coeff(K) = 0``; it is not re-verified on construction.
    """

    grid: Grid
    coeffs: np.ndarray
    divergence_free: bool = False

    def __post_init__(self):
        expected = (3, *self.grid.spectral_shape)
        if self.coeffs.shape != expected:
            raise ConfigError(
                f"vector coefficients must have shape {expected}, got {self.coeffs.shape}"
            )

    @classmethod
    def zeros(cls, grid: Grid) -> SpectralVectorField:
        return cls(grid, np.zeros((3, *grid.spectral_shape), dtype=complex), True)

    @property
    def components(self) -> tuple[SpectralScalarField, ...]:
        return tuple(SpectralScalarField(self.grid, c) for c in self.coeffs)

    def with_coeffs(self, coeffs: np.ndarray, divergence_free: bool | None = None):
        tag = self.divergence_free if divergence_free is None else divergence_free
        return SpectralVectorField(self.grid, coeffs, tag)

    def __add__(self, other: SpectralVectorField) -> SpectralVectorField:
        _same_grid(self, other)
        return self.with_coeffs(
            self.coeffs + other.coeffs, self.divergence_free and other.divergence_free
        )

    def __sub__(self, other: SpectralVectorField) -> SpectralVectorField:
        _same_grid(self, other)
        return self.with_coeffs(
            self.coeffs - other.coeffs, self.divergence_free and other.divergence_free
        )

    def __mul__(self, a: float) -> SpectralVectorField:
        return self.with_coeffs(a * self.coeffs)

    __rmul__ = __mul__

    def __neg__(self) -> SpectralVectorField:
        return self.with_coeffs(-self.coeffs)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.coeffs)))

    def divergence_residual(self) -> float:
        return divergence_residual(self.grid, self.coeffs)


def _same_grid(a, b):
    if a.grid != b.grid:
        raise ConfigError(f"grid mismatch: {a.grid} vs {b.grid}")


def inner(u: SpectralVectorField, v: SpectralVectorField) -> float:
    """L^2 inner product (u, v) = L^3 sum_K u_K . conj(v_K) (real part)."""
    _same_grid(u, v)
    g = u.grid
    s = np.sum(u.coeffs * np.conj(v.coeffs), axis=0)
    return float(g.L**3 * np.sum(g.parseval_weight * s.real))


# --- public operations ----------------------------------------------------------


def forward_transform(physical, grid: Grid) -> SpectralVectorField:
    """Fourier interpolant of three real N^3 sample arrays; the mean is removed."""
    x = np.asarray(physical, dtype=float)
    if x.shape != (3, *grid.shape):
        raise ConfigError(f"expected physical array of shape {(3, *grid.shape)}, got {x.shape}")
    return SpectralVectorField(grid, fft_forward(grid, x))


def forward_scalar(physical, grid: Grid) -> SpectralScalarField:
    x = np.asarray(physical, dtype=float)
    if x.shape != grid.shape:
        raise ConfigError(f"expected physical array of shape {grid.shape}, got {x.shape}")
    return SpectralScalarField(grid, fft_forward(grid, x))


def inverse_transform(field: SpectralVectorField) -> np.ndarray:
    defect = hermitian_defect(field.grid, field.coeffs)
    if defect > HERMITIAN_TOL:
        raise InvariantError(f"Hermitian symmetry broken (relative defect {defect:.3e})")
    return fft_inverse(field.grid, field.coeffs)


def stokes_apply(field: SpectralVectorField) -> SpectralVectorField:
    return field.with_coeffs(field.grid.lam * field.coeffs)


def leray_project(field: SpectralVectorField) -> SpectralVectorField:
    return field.with_coeffs(project(field.grid, field.coeffs), divergence_free=True)


def filter_symbol(grid: Grid, alpha: float) -> np.ndarray:
    """Symbol of (I + alpha^2 A)^{-1}, i.e. L^2 / (L^2 + 4 alpha^2 pi^2 |K|^2)."""
    return 1.0 / (1.0 + alpha**2 * grid.lam)


def helmholtz_filter_inverse(field: SpectralVectorField, alpha: float) -> SpectralVectorField:
    if alpha < 0:
        raise ConfigError(f"alpha must be >= 0, got {alpha}")
    return field.with_coeffs(filter_symbol(field.grid, alpha) * field.coeffs)


def helmholtz_filter_apply(field: SpectralVectorField, alpha: float) -> SpectralVectorField:
    if alpha < 0:
        raise ConfigError(f"alpha must be >= 0, got {alpha}")
    return field.with_coeffs((1.0 + alpha**2 * field.grid.lam) * field.coeffs)


def dealiased_product(a, b, grid: Grid) -> SpectralScalarField:
    """Spectrum of the pointwise product a*b, truncated by the dealiasing rule."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != grid.shape or b.shape != grid.shape:
        raise ConfigError("dealiased_product inputs must be sampled on the same grid")
    c = fft_forward(grid, a * b)
    return SpectralScalarField(grid, np.where(grid.dealias_mask, c, 0.0))


def norm_L2(field: SpectralVectorField) -> float:
    return np.sqrt(norm_sq(field.grid, field.coeffs, 0))


def norm_H1(field: SpectralVectorField) -> float:
    return np.sqrt(norm_sq(field.grid, field.coeffs, 1))


def norm_A(field: SpectralVectorField) -> float:
    return np.sqrt(norm_sq(field.grid, field.coeffs, 2))


def random_field(grid: Grid, rng: np.random.Generator, decay: float = 4.0,
                 divergence_free: bool = True) -> SpectralVectorField:
    """Random real zero-mean field with coefficient magnitude ~ |K|^-decay."""
    x = rng.standard_normal((3, *grid.shape))
    c = fft_forward(grid, x)
    amp = np.where(grid.active, (1.0 + grid.K_sq) ** (-decay / 2), 0.0)
    c = c * amp
    if divergence_free:
        c = project(grid, c)
    else:
        c = np.where(grid.active, c, 0.0)
    return SpectralVectorField(grid, c, divergence_free)

"""Independent oracle checks run by ``mlalpha-cda verify`` and the test suite."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from . import spectral_core as sc
from .analysis import gronwall_envelope
from .dynamics import advect
from .observation import InterpolantSpec, verify_approximation_property
from .spectral_core import Grid, SpectralVectorField


@dataclass(frozen=True)
class OracleResult:
    name: str
    passed: bool
    detail: str


# --- Gronwall envelope --------------------------------------------------------------


@dataclass(frozen=True)
class GronwallCase:
    """xi' = -C xi + b(t) with b(t) = amp (1 + wiggle sin(omega t + phase))."""

    C: float
    T: float
    xi0: float
    amp: float
    wiggle: float = 0.0
    omega: float = 1.0
    phase: float = 0.0

    def forcing(self, t):
        return self.amp * (1.0 + self.wiggle * np.sin(self.omega * t + self.phase))

    def window_bound(self) -> float:
        """sup over t of the integral of b on [t, t+T]."""
        swing = 2 * self.wiggle / self.omega * abs(math.sin(self.omega * self.T / 2))
        return self.amp * (self.T + swing)


def worked_gronwall_case() -> GronwallCase:
    # b = 1, so M = T = 1 meets the window condition
    return GronwallCase(C=1.0, T=1.0, xi0=2.0, amp=1.0)


def random_gronwall_cases(n: int = 20, seed: int = 0) -> list[GronwallCase]:
    rng = np.random.default_rng(seed)
    return [
        GronwallCase(
            C=float(rng.uniform(0.1, 5.0)),
            T=float(rng.uniform(0.1, 3.0)),
            xi0=float(rng.uniform(0.0, 10.0)),
            amp=float(rng.uniform(0.0, 3.0)),
            wiggle=float(rng.uniform(0.0, 1.0)),
            omega=float(rng.uniform(0.5, 10.0)),
            phase=float(rng.uniform(0.0, 2 * math.pi)),
        )
        for _ in range(n)
    ]


def gronwall_margin(case: GronwallCase, t_final: float = 10.0, samples: int = 401) -> float:
    """min over sampled t of (envelope - xi); negative means a violation."""
    M = case.window_bound()
    ts = np.linspace(0.0, t_final, samples)
    sol = solve_ivp(
        lambda t, y: -case.C * y + case.forcing(t),
        (0.0, t_final),
        [case.xi0],
        t_eval=ts,
        rtol=1e-12,
        atol=1e-14,
        method="DOP853",
    )
    env = np.array([gronwall_envelope(case.xi0, case.C, M, case.T, t, 0.0) for t in ts])
    return float(np.min(env - sol.y[0]))


def gronwall_oracle(n: int = 20, seed: int = 0) -> OracleResult:
    cases = [worked_gronwall_case(), *random_gronwall_cases(n, seed)]
    margins = [gronwall_margin(c) for c in cases]
    violations = sum(m < 0 for m in margins)
    return OracleResult(
        "gronwall",
        violations == 0,
        f"cases={len(cases)} violations={violations} min_margin={min(margins):.3e}",
    )


# --- interpolant -----------------------------------------------------------------


def interpolant_oracle(N: int = 32, h: float = 0.043, trials: int = 100, seed: int = 0) -> OracleResult:
    rep = verify_approximation_property(InterpolantSpec("modal", h), Grid(N=N), trials, seed)
    return OracleResult(
        "interpolant", rep.passed, f"trials={rep.trials} worst_lhs_over_rhs={rep.worst_ratio:.3e}"
    )


# --- bilinear term ---------------------------------------------------------------


def full_spectrum(field: SpectralVectorField) -> np.ndarray:
    """All N^3 Fourier coefficients per component, via a complex FFT."""
    N = field.grid.N
    phys = sc.fft_inverse(field.grid, field.coeffs)
    return np.fft.fftn(phys, axes=(-3, -2, -1)) / N**3


def brute_force_advection(v: SpectralVectorField, u: SpectralVectorField) -> np.ndarray:
    """P[(v . grad) u] restricted to the dealiased band by explicit triad sums.

    Returns half-spectrum coefficients comparable with :func:`advect`.
    """
    grid = u.grid
    N, L = grid.N, grid.L
    cut = grid.dealias_cutoff
    vf, uf = full_spectrum(v), full_spectrum(u)
    ints = np.fft.fftfreq(N, 1.0 / N).astype(int)
    band = [k for k in ints if abs(k) <= cut]
    modes = np.array([(a, b, c) for a in band for b in band for c in band])
    idx = tuple(modes.T % N)
    v_m = vf[(slice(None), *idx)]  # (3, M)
    u_m = uf[(slice(None), *idx)]
    q_vec = 2 * np.pi * modes / L  # (M, 3)
    out = np.zeros((3, N, N, N), dtype=complex)
    # sum over pairs (p, q) with k = p + q of i (v_p . q) u_q
    v_dot_q = 1j * (v_m.T @ q_vec.T)  # (Mp, Mq)
    for iq in range(len(modes)):
        k = modes + modes[iq]
        keep = np.all(np.abs(k) <= cut, axis=1)
        if not np.any(keep):
            continue
        contrib = v_dot_q[keep, iq][None, :] * u_m[:, iq][:, None]
        np.add.at(out, (slice(None), *tuple((k[keep] % N).T)), contrib)
    half = out[..., : N // 2 + 1]
    # zero mode and Nyquist planes are not carried by the solver
    half = np.where(grid.active, half, 0.0)
    return sc.project(grid, half)


def bilinear_oracle(N: int = 8, seed: int = 0, pairs: int = 3) -> OracleResult:
    grid = Grid(N=N)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(pairs):
        v = sc.random_field(grid, rng, decay=1.0)
        u = sc.random_field(grid, rng, decay=1.0)
        fast = advect(grid, v.coeffs, u.coeffs)
        slow = brute_force_advection(v, u)
        worst = max(worst, float(np.max(np.abs(fast - slow)) / np.max(np.abs(slow))))
    return OracleResult("bilinear", worst < 1e-12, f"grid={N}^3 pairs={pairs} max_rel_diff={worst:.3e}")


def run_all() -> list[OracleResult]:
    return [gronwall_oracle(), interpolant_oracle(), bilinear_oracle()]

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from helpers import single_mode
from mlalpha_cda import analysis as an
from mlalpha_cda import dynamics as dyn
from mlalpha_cda import spectral_core as sc
from mlalpha_cda.errors import ConfigError
from mlalpha_cda.observation import observed_mask
from mlalpha_cda.spectral_core import Grid, SpectralVectorField
from mlalpha_cda.verification import brute_force_advection

seeds = st.integers(0, 2**32 - 1)


def test_params_validation():
    with pytest.raises(ConfigError):
        dyn.ModelParams(nu=0.0, alpha=0.3)
    with pytest.raises(ConfigError):
        dyn.ModelParams(nu=1.0, alpha=-0.3)
    with pytest.raises(ConfigError):
        dyn.AssimilationParams(beta=0.0, eta=1.0, h=0.1)
    with pytest.raises(ConfigError):
        dyn.AssimilationParams(beta=0.3, eta=-1.0, h=0.1)
    with pytest.raises(ConfigError):
        dyn.AssimilationParams(beta=0.3, eta=1.0, h=0.1, interpolant="nodal")


def test_forcing_is_projected(grid8, rng):
    raw = sc.random_field(grid8, rng, divergence_free=False)
    p = dyn.ModelParams(1.0, 0.3, forcing=raw)
    assert p.forcing.divergence_residual() < 1e-14


# --- bilinear term -------------------------------------------------------------


def test_bilinear_with_zero_advector(grid8, rng):
    u = sc.random_field(grid8, rng)
    assert np.all(dyn.bilinear_B(SpectralVectorField.zeros(grid8), u).coeffs == 0)


@given(seeds)
def test_bilinear_antisymmetry(seed):
    grid = Grid(N=16)
    r = np.random.default_rng(seed)
    v, w = sc.random_field(grid, r, decay=2.0), sc.random_field(grid, r, decay=2.0)
    b = dyn.bilinear_B(v, w)
    assert abs(sc.inner(b, w)) <= 1e-12 * sc.norm_L2(v) * sc.norm_H1(w) ** 2
    assert b.divergence_residual() < 1e-12


@given(seeds)
def test_bilinear_matches_brute_force_triads(seed):
    grid = Grid(N=8)
    r = np.random.default_rng(seed)
    v, u = sc.random_field(grid, r, decay=1.0), sc.random_field(grid, r, decay=1.0)
    fast = dyn.bilinear_B(v, u).coeffs
    slow = brute_force_advection(v, u)
    assert np.max(np.abs(fast - slow)) <= 1e-12 * np.max(np.abs(slow))


def test_bilinear_batched_matches_single(grid8, rng):
    v = np.stack([sc.random_field(grid8, rng).coeffs for _ in range(2)])
    u = np.stack([sc.random_field(grid8, rng).coeffs for _ in range(2)])
    batched = dyn.advect(grid8, v, u)
    for i in range(2):
        assert np.array_equal(batched[i], dyn.advect(grid8, v[i], u[i]))


def test_bilinear_rejects_grid_mismatch(grid8, grid16):
    with pytest.raises(ConfigError):
        dyn.bilinear_B(SpectralVectorField.zeros(grid8), SpectralVectorField.zeros(grid16))


# --- right-hand sides ----------------------------------------------------------


def test_truth_rhs_of_zero(grid8):
    p = dyn.ModelParams(0.75, 0.3)
    assert np.all(dyn.truth_rhs(SpectralVectorField.zeros(grid8), p).coeffs == 0)


@given(seeds)
def test_truth_rhs_energy_identity(seed):
    grid = Grid(N=16)
    p = dyn.ModelParams(0.75, 0.3)
    u = sc.random_field(grid, np.random.default_rng(seed), decay=2.0)
    rhs = dyn.truth_rhs(u, p)
    rate = sc.inner(rhs, sc.helmholtz_filter_apply(u, p.alpha))
    dissipation = -p.nu * (sc.norm_H1(u) ** 2 + p.alpha**2 * sc.norm_A(u) ** 2)
    assert rate == pytest.approx(dissipation, rel=1e-10)
    assert rhs.divergence_residual() < 1e-12


def test_truth_rhs_single_mode_is_pure_decay(grid16):
    u = SpectralVectorField(grid16, single_mode(grid16, (1, 2, 0), np.array([2, -1, 0.5], dtype=complex)))
    u = sc.leray_project(u)
    p = dyn.ModelParams(0.75, 0.3)
    rhs = dyn.truth_rhs(u, p).coeffs
    assert np.max(np.abs(rhs + p.nu * grid16.lam * u.coeffs)) < 1e-14 * np.max(np.abs(rhs))


def test_truth_rhs_includes_filtered_force(grid8, rng):
    f = sc.random_field(grid8, rng)
    p = dyn.ModelParams(0.75, 0.3, forcing=f)
    rhs = dyn.truth_rhs(SpectralVectorField.zeros(grid8), p).coeffs
    assert np.allclose(rhs, sc.filter_symbol(grid8, 0.3) * f.coeffs, rtol=0, atol=1e-16)


def test_cda_rhs_at_synchronization_equals_truth_rhs(grid16, rng):
    u = sc.random_field(grid16, rng, decay=2.0)
    p = dyn.ModelParams(0.75, 0.3)
    a = dyn.AssimilationParams(beta=0.3, eta=1.5, h=0.1)
    assert np.array_equal(dyn.cda_rhs(u, dyn.observe(u, a), p, a).coeffs, dyn.truth_rhs(u, p).coeffs)


def test_cda_rhs_without_nudging_is_plain_model_with_beta(grid16, rng):
    w, u = sc.random_field(grid16, rng, decay=2.0), sc.random_field(grid16, rng, decay=2.0)
    a = dyn.AssimilationParams(beta=0.35, eta=0.0, h=0.1)
    got = dyn.cda_rhs(w, dyn.observe(u, a), dyn.ModelParams(0.75, 0.3), a).coeffs
    want = dyn.truth_rhs(w, dyn.ModelParams(0.75, 0.35)).coeffs
    assert np.max(np.abs(got - want)) <= 1e-15 * np.max(np.abs(want))


def test_cda_rhs_nudging_on_observed_single_mode(grid16):
    a = dyn.AssimilationParams(beta=0.35, eta=2.0, h=0.25)
    w = sc.leray_project(SpectralVectorField(grid16, single_mode(grid16, (1, 1, 1), np.array([1, -1, 0], dtype=complex))))
    assert observed_mask(grid16, a.spec)[1, 1, 1]
    p = dyn.ModelParams(0.75, 0.3)
    rhs = dyn.cda_rhs(w, dyn.observe(SpectralVectorField.zeros(grid16), a), p, a).coeffs
    expected = -(p.nu * grid16.lam + a.eta) * w.coeffs
    assert np.max(np.abs(rhs - expected)) < 1e-14 * np.max(np.abs(expected))


def test_cda_rhs_is_linear_in_observation_term(grid16, rng):
    w, u = sc.random_field(grid16, rng), sc.random_field(grid16, rng)
    p = dyn.ModelParams(0.75, 0.3)
    a = dyn.AssimilationParams(beta=0.35, eta=1.5, h=0.25, interpolant="volume-average")
    base = dyn.cda_rhs(w, dyn.observe(w, a), p, a).coeffs  # nudging term zero
    one = dyn.cda_rhs(w, dyn.observe(u, a), p, a).coeffs - base
    two = dyn.cda_rhs(w, dyn.observe(2 * u - w, a), p, a).coeffs - base
    assert np.max(np.abs(two - 2 * one)) < 1e-12 * np.max(np.abs(one))
    assert sc.divergence_residual(grid16, base + one) < 1e-12


# --- initial data --------------------------------------------------------------


def test_deterministic_initial_data(grid32):
    assert np.max(dyn.truth_formula(grid32), axis=(1, 2, 3)) == pytest.approx([0.05] * 3, rel=1e-15)
    u0, w0 = dyn.initial_conditions_deterministic(grid32)
    assert u0.divergence_residual() < 1e-13 and w0.divergence_residual() < 1e-13
    assert u0.divergence_free and w0.divergence_free
    m1 = an.compute_M1(u0, 0.0, dyn.ModelParams(0.75, 0.3))
    # the reported 0.00339 is not reproduced from the projected fields (see README)
    assert 0.001 < m1 < 0.1


def test_initial_data_need_unit_box():
    with pytest.raises(ConfigError):
        dyn.initial_conditions_deterministic(Grid(N=8, L=2.0))


def test_random_initial_data(grid32):
    noise = dyn.uniform_noise(grid32, 3)
    assert noise.min() >= -0.01 and noise.max() <= 0.01
    assert np.array_equal(noise, dyn.uniform_noise(grid32, 3))
    assert not np.array_equal(noise, dyn.uniform_noise(grid32, 4))
    u_a, w_a = dyn.initial_conditions_random(grid32, 3)
    u_b, w_b = dyn.initial_conditions_random(grid32, 3)
    assert np.array_equal(u_a.coeffs, u_b.coeffs) and np.array_equal(w_a.coeffs, w_b.coeffs)
    assert u_a.divergence_residual() < 1e-13
    p = dyn.ModelParams(0.75, 0.3)
    m1_noisy = an.compute_M1(u_a, 0.0, p)
    m1_clean = an.compute_M1(dyn.initial_conditions_deterministic(grid32)[0], 0.0, p)
    # grid-scale noise adds mostly gradient energy; the bound grows with N
    assert m1_noisy > m1_clean


def test_kolmogorov_forcing(grid16):
    f = dyn.kolmogorov_forcing(grid16, 2.0)
    assert f.divergence_residual() == 0
    p = dyn.ModelParams(0.75, 0.3, forcing=f)
    # |2 sin(2 pi y)|^2 over the unit box
    assert dyn.forcing_sup_sq(p) == pytest.approx(2.0, rel=1e-14)
    assert dyn.forcing_sup_sq(dyn.ModelParams(0.75, 0.3)) == 0.0


def test_twin_state_scaling(grid8, rng):
    u = sc.random_field(grid8, rng)
    s = dyn.TwinState(u.with_coeffs(sc.ldexp_complex(u.coeffs, 64)), u, t=2.0, scale_exp=64)
    assert np.array_equal(s.physical_u().coeffs, u.coeffs)
    assert s.t_start == 2.0
    with pytest.raises(ConfigError):
        dyn.TwinState(u, SpectralVectorField.zeros(Grid(N=16)))

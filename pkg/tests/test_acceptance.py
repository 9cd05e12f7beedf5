"""Acceptance criteria 1-10, each reported as one PASS/FAIL line.

The long twin runs are module-scoped fixtures so each preset integrates once.
Lines are printed as the criteria finish and again in the terminal summary.
"""

import contextlib
import math
import subprocess
import sys

import numpy as np
import pytest

from mlalpha_cda import analysis as an
from mlalpha_cda import dynamics as dyn
from mlalpha_cda import spectral_core as sc
from mlalpha_cda import timestepper as ts
from mlalpha_cda.config import override, preset_config
from mlalpha_cda.dynamics import ModelParams, TwinState
from mlalpha_cda.observation import InterpolantSpec, apply_interpolant
from mlalpha_cda.runner import build_experiment, condition_report, run_experiment
from mlalpha_cda.spectral_core import Grid
from mlalpha_cda.verification import bilinear_oracle, gronwall_oracle, interpolant_oracle

pytestmark = pytest.mark.slow

# criterion number -> (verdict, detail); read by the terminal summary hook
RESULTS: dict[int, tuple[str, str]] = {}

TITLES = {
    1: "exact-parameter synchronization",
    2: "mismatched-parameter convergence",
    3: "divergence when hypothesis 1 fails",
    4: "random-perturbation robustness",
    5: "condition-checker regression",
    6: "energy a-priori bound",
    7: "operator properties",
    8: "interpolant properties",
    9: "Gronwall oracle",
    10: "determinism",
}


@contextlib.contextmanager
def criterion(number: int):
    detail: list[str] = []
    try:
        yield detail
    except BaseException as exc:
        msg = "; ".join(detail + [f"{type(exc).__name__}: {str(exc).splitlines()[0] if str(exc) else ''}"])
        RESULTS[number] = ("FAIL", msg)
        print(f"\ncriterion {number:2d} FAIL  {TITLES[number]}: {msg}")
        raise
    RESULTS[number] = ("PASS", "; ".join(detail))
    print(f"\ncriterion {number:2d} PASS  {TITLES[number]}: {'; '.join(detail)}")


def _series(artifacts):
    t = np.array([r.t for r in artifacts.error_series])
    normalized = np.array([r.normalized for r in artifacts.error_series])
    return t, normalized


# --- long runs -----------------------------------------------------------------------


@pytest.fixture(scope="module")
def synchronized_run():
    cfg = override(override(preset_config("deterministic-high-eta"), "assim.beta", "0.3"), "step.t_end", "60")
    return run_experiment(cfg)


@pytest.fixture(scope="module")
def high_eta_run():
    return run_experiment(preset_config("deterministic-high-eta"))


@pytest.fixture(scope="module")
def low_eta_run():
    return run_experiment(preset_config("deterministic-low-eta"))


@pytest.fixture(scope="module")
def random_runs():
    base = preset_config("random-high-eta")
    return {seed: run_experiment(override(base, "seed", str(seed))) for seed in (0, 1, 2)}


def _converges(artifacts, detail, label=""):
    t, normalized = _series(artifacts)
    drop = normalized[0] / normalized[t <= 100.0].min()
    detail.append(f"{label}drop {drop:.2e} (final {normalized[-1]:.2e})")
    assert drop >= 1e6, f"{label}normalized error dropped by only {drop:.3g}"
    assert artifacts.condition_report.hypotheses_ok
    combined = np.array([r.combined for r in artifacts.error_series])
    envelope = np.array([r.envelope for r in artifacts.error_series])
    # envelope with the bound recomputed from the initial data is larger still
    computed_M_alpha = artifacts.condition_report.extras["computed_M1.M_alpha"]
    assert computed_M_alpha >= artifacts.condition_report.M_alpha
    margin = np.min(envelope - combined)
    detail.append(f"{label}min envelope margin {margin:.3e}")
    assert np.all(combined <= envelope)


def test_criterion_1_synchronization(synchronized_run):
    with criterion(1) as detail:
        report = synchronized_run.condition_report
        assert report.M_alpha == 0.0 and report.regularity_ok
        t, normalized = _series(synchronized_run)
        below = t[normalized < 1e-12]
        detail.append(f"normalized {normalized[0]:.3e} -> {normalized[-1]:.3e} at t={t[-1]:g}")
        assert below.size > 0 and below[0] <= 60.0
        detail.append(f"below 1e-12 from t={below[0]:g}")
        assert normalized[-1] < 1e-12


def test_criterion_2_convergence(high_eta_run):
    with criterion(2) as detail:
        _converges(high_eta_run, detail)


def test_high_eta_curve_decreases_until_floor(high_eta_run):
    t, normalized = _series(high_eta_run)
    window = (t >= 1.0) & (normalized > 1e-25)
    assert np.all(np.diff(normalized[window]) < 0)


def test_criterion_3_divergence(low_eta_run):
    with criterion(3) as detail:
        report = low_eta_run.condition_report
        detail.append(f"hyp1 eta={report.hyp1.lhs:g} vs C1={report.C1:.4g}: {report.hyp1.verdict}")
        assert report.hyp1.verdict == "FAIL"
        t, normalized = _series(low_eta_run)
        ratio = normalized.min() / normalized[0]
        detail.append(f"min normalized / initial = {ratio:.3g} over t in [0, {t[-1]:g}]")
        assert t[-1] == pytest.approx(100.0) and ratio >= 1e-2


def test_criterion_4_random_perturbations(random_runs):
    with criterion(4) as detail:
        for seed, artifacts in random_runs.items():
            detail.append(f"seed {seed}: M1 computed {artifacts.condition_report.extras['M1_computed']:.4g}")
            _converges(artifacts, detail, f"seed {seed} ")


def test_criterion_5_condition_checker():
    with criterion(5) as detail:
        high = condition_report(preset_config("deterministic-high-eta"))
        low = condition_report(preset_config("deterministic-low-eta"))
        first, second = high.regularity
        assert first.ok and second.ok
        assert first.rhs == pytest.approx(6.34, rel=1e-3)
        assert second.lhs == pytest.approx(3.08e-5, rel=1e-3)
        assert second.rhs == pytest.approx(0.1406, rel=1e-3)
        detail.append(f"bounds {first.rhs:.4g}, {second.lhs:.4g} vs {second.rhs:.4g}")
        assert high.hypotheses_ok
        assert low.hyp1.verdict == "FAIL" and not low.hypotheses_ok
        detail.append(f"C1={high.C1:.4g} (printed 0.00739, logged only); hyp eta=1.5 PASS, eta=1e-4 hyp1 FAIL")


def test_criterion_6_energy_bound(grid32):
    with criterion(6) as detail:
        p = ModelParams(0.75, 0.3)
        u0, _ = dyn.initial_conditions_deterministic(grid32)
        cfg = ts.StepConfig(dt=1e-3, t_end=5.0, output_every=100)
        stepper = ts.TruthStepper(grid32, p, cfg)
        lam1 = an.poincare_constant(1.0)
        e0 = an.combined_norm_sq(u0, p.alpha)
        c, energies, worst = u0.coeffs, [e0], 0.0
        for i in range(1, cfg.n_steps + 1):
            c = stepper.advance(c)
            if i % cfg.output_every == 0:
                e = an.combined_norm_sq(u0.with_coeffs(c), p.alpha)
                bound = math.exp(-p.nu * lam1 * i * cfg.dt) * e0
                worst = max(worst, e / bound)
                assert e <= energies[-1], f"energy increased at t={i * cfg.dt:g}"
                assert e <= 1.05 * bound, f"energy above bound at t={i * cfg.dt:g}"
                energies.append(e)
        detail.append(f"{len(energies)} outputs, max energy/bound {worst:.3e}")


def test_criterion_7_operators():
    with criterion(7) as detail:
        grid = Grid(N=32)
        rng = np.random.default_rng(2024)
        worst = 0.0
        for _ in range(50):
            v, w = sc.random_field(grid, rng), sc.random_field(grid, rng)
            ratio = abs(sc.inner(dyn.bilinear_B(v, w), w)) / (sc.norm_L2(v) * sc.norm_H1(w) ** 2)
            worst = max(worst, ratio)
        assert worst <= 1e-12
        detail.append(f"antisymmetry {worst:.2e}")

        brute = bilinear_oracle()
        assert brute.passed, brute.detail
        detail.append(f"8^3 {brute.detail}")

        u = sc.random_field(grid, rng, divergence_free=False)
        round_trip = sc.helmholtz_filter_apply(sc.helmholtz_filter_inverse(u, 0.3), 0.3)
        filt = np.max(np.abs(round_trip.coeffs - u.coeffs)) / u.max_abs()
        once = sc.leray_project(u)
        leray = np.max(np.abs(sc.leray_project(once).coeffs - once.coeffs)) / once.max_abs()
        assert filt <= 1e-13 and leray <= 1e-13
        detail.append(f"filter {filt:.1e}, Leray {leray:.1e}")

        exp = build_experiment(preset_config("deterministic-high-eta"))
        stepper = ts.TwinStepper(exp.grid, exp.model, exp.assim, exp.step)
        state, residual = TwinState(exp.u0, exp.w0), 0.0
        for _ in range(1000):
            state = stepper.advance(state)
            residual = max(residual, state.u.divergence_residual(), state.w.divergence_residual())
            assert residual < 1e-12
        detail.append(f"1000-step divergence residual {residual:.1e}")


def test_criterion_8_interpolant():
    with criterion(8) as detail:
        res = interpolant_oracle(N=32, h=0.043, trials=100, seed=0)
        assert res.passed, res.detail
        detail.append(res.detail)
        grid = Grid(N=32)
        rng = np.random.default_rng(7)
        for h in (0.043, 0.1, 0.26):
            spec = InterpolantSpec("modal", h)
            u = sc.random_field(grid, rng, divergence_free=False)
            once = apply_interpolant(u, spec)
            assert np.array_equal(apply_interpolant(once, spec).coeffs, once.coeffs)
        detail.append("modal idempotence exact")


def test_criterion_9_gronwall():
    with criterion(9) as detail:
        res = gronwall_oracle(n=20, seed=0)
        detail.append(res.detail)
        assert res.passed


def test_criterion_10_determinism(tmp_path):
    with criterion(10) as detail:
        cfg = tmp_path / "random.cfg"
        cfg.write_text("preset=random-high-eta\nseed=5\nstep.t_end=1.0\nstep.output_every=10\n")
        outputs = []
        for name in ("first", "second"):
            out = tmp_path / name
            subprocess.run(
                [sys.executable, "-m", "mlalpha_cda", "run", "--config", str(cfg), "--output", str(out)],
                check=True, capture_output=True, text=True,
            )
            outputs.append((out / "errors.csv").read_bytes())
        lines = outputs[0].count(b"\n")
        detail.append(f"errors.csv {len(outputs[0])} bytes, {lines} lines")
        assert outputs[0] == outputs[1]

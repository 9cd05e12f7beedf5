"""Twin-experiment orchestration: build the systems, integrate, record errors."""

from __future__ import annotations

import logging
import platform
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import __version__
from . import analysis as an
from . import dynamics as dyn
from . import spectral_core as sc
from .analysis import ConditionReport, ErrorRecord
from .config import ExperimentConfig
from .dynamics import AssimilationParams, ModelParams, TwinState
from .observation import describe
from .spectral_core import Grid, SpectralVectorField
from .timestepper import NEGLIGIBLE_BITS, RESCALE_BITS, StepConfig, TwinStepper, advective_cfl

log = logging.getLogger(__name__)


@dataclass
class RunArtifacts:
    config: ExperimentConfig
    condition_report: ConditionReport
    error_series: list[ErrorRecord]
    field_slices: dict[str, np.ndarray] = field(default_factory=dict)
    run_log: str = ""


@dataclass(frozen=True)
class Experiment:
    """Everything built from a config before integration starts."""

    grid: Grid
    model: ModelParams
    assim: AssimilationParams
    step: StepConfig
    u0: SpectralVectorField
    w0: SpectralVectorField
    projection_norms: dict[str, float]


def build_experiment(cfg: ExperimentConfig) -> Experiment:
    grid = Grid(L=cfg.grid.L, N=cfg.grid.N, dealias_fraction=cfg.grid.dealias_fraction)
    forcing = None
    if cfg.model.forcing == "kolmogorov" and cfg.model.forcing_amplitude > 0:
        forcing = dyn.kolmogorov_forcing(grid, cfg.model.forcing_amplitude, cfg.model.forcing_wavenumber)
    model = ModelParams(cfg.model.nu, cfg.model.alpha, grid.L, forcing)
    a = cfg.assim
    assim = AssimilationParams(a.beta, a.eta, a.h, a.interpolant, a.c1, a.c2)
    s = cfg.step
    step = StepConfig(s.dt, s.scheme, s.t_end, s.output_every, s.cfl_warn)

    amp = cfg.init.amplitude
    dyn._check_unit_box(grid)
    truth_phys = dyn.truth_formula(grid, amp)
    if cfg.init.kind == "random":
        truth_phys = truth_phys + dyn.uniform_noise(grid, cfg.seed)
    assim_phys = truth_phys if cfg.init.kind == "synchronized" else dyn.assimilated_formula(grid, amp)
    raw_u = sc.forward_transform(truth_phys, grid)
    raw_w = sc.forward_transform(assim_phys, grid)
    u0, w0 = sc.leray_project(raw_u), sc.leray_project(raw_w)
    norms = {
        "u0.L2.before_projection": sc.norm_L2(raw_u),
        "u0.L2.after_projection": sc.norm_L2(u0),
        "w0.L2.before_projection": sc.norm_L2(raw_w),
        "w0.L2.after_projection": sc.norm_L2(w0),
    }
    return Experiment(grid, model, assim, step, u0, w0, norms)


def condition_report(cfg: ExperimentConfig, exp: Experiment | None = None) -> ConditionReport:
    exp = exp or build_experiment(cfg)
    return an.build_report(exp.model, exp.assim, exp.u0, cfg.analysis.c, cfg.m1_override())


def _midplane(state: TwinState) -> dict[str, np.ndarray]:
    k = state.grid.N // 2
    return {
        "u": sc.inverse_transform(state.physical_u())[:, :, :, k],
        "w": sc.inverse_transform(state.physical_w())[:, :, :, k],
    }


def run_experiment(
    cfg: ExperimentConfig,
    progress: Callable[[ErrorRecord], None] | None = None,
) -> RunArtifacts:
    """Integrate the twin pair to ``t_end`` and collect every artifact."""
    exp = build_experiment(cfg)
    report = condition_report(cfg, exp)
    if not report.hypotheses_ok:
        log.info("convergence hypotheses not all satisfied; running anyway")
    g0 = an.combined_norm_sq(exp.w0 - exp.u0, exp.assim.beta)

    stepper = TwinStepper(exp.grid, exp.model, exp.assim, exp.step)
    state = TwinState(exp.u0, exp.w0)
    slices = {f"{k}_t0": v for k, v in _midplane(state).items()}

    def record(s: TwinState) -> ErrorRecord:
        rec = an.error_record(s, exp.assim, exp.model, report, g0)
        if progress is not None:
            progress(rec)
        return rec

    series = [record(state)]
    n_steps, every = exp.step.n_steps, exp.step.output_every
    max_cfl = advective_cfl(state.u, exp.model.alpha, exp.step.dt)
    warned = False
    for i in range(n_steps):
        state = stepper.advance(state)
        if (i + 1) % every == 0:
            series.append(record(state))
            cfl = advective_cfl(state.u, exp.model.alpha, exp.step.dt, state.scale_exp)
            max_cfl = max(max_cfl, cfl)
        if max_cfl > exp.step.cfl_warn and not warned:
            log.warning("advective CFL %.3g exceeds %.3g near t=%.6g", max_cfl, exp.step.cfl_warn, state.t)
            warned = True
    slices.update({f"{k}_t_end": v for k, v in _midplane(state).items()})

    run_log = _run_log(cfg, exp, report, max_cfl, state)
    return RunArtifacts(cfg, report, series, slices, run_log)


def library_versions() -> dict[str, str]:
    import numba
    import scipy

    out = {
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "numba": numba.__version__,
        "mlalpha_cda": __version__,
        "fft_backend": sc.FFT_BACKEND,
    }
    if sc.FFT_BACKEND == "torch":
        import torch

        out["torch"] = torch.__version__
    return out


def _run_log(cfg, exp: Experiment, report: ConditionReport, max_cfl: float, final: TwinState) -> str:
    lines = ["[config]", cfg.to_text().rstrip("\n"), "", "[conditions]", report.to_text().rstrip("\n")]
    lines += ["", "[initial data]"]
    lines += [f"{k}={v!r}" for k, v in exp.projection_norms.items()]
    lines += ["", "[interpolant]"]
    lines += [f"{k}={v}" for k, v in describe(exp.grid, exp.assim.spec).items()]
    lines += [
        "",
        "[decisions]",
        "error_normalization=(|g|^2+beta^2||g||^2)/(|u|^2+beta^2||u||^2)",
        "envelope_decay_rate=lambda1*nu/2",
        f"envelope_factor={an.envelope_factor()!r}",
        f"hypothesis_M1={report.M1_source}",
        "approximation_norm=gradient",
        f"unforced_rescale_bits={RESCALE_BITS}",
        f"unforced_quadratic_cutoff=2^-{NEGLIGIBLE_BITS}",
        "",
        "[run]",
        f"steps={exp.step.n_steps}",
        f"final_t={final.t!r}",
        f"final_scale_exp={final.scale_exp}",
        f"max_advective_cfl={max_cfl!r}",
        "",
        "[versions]",
    ]
    lines += [f"{k}={v}" for k, v in library_versions().items()]
    return "\n".join(lines) + "\n"

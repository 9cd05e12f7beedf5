"""Artifact files: error series CSV, condition report, field slices, plot script."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .runner import RunArtifacts

ERROR_HEADER = "t,err_L2sq,err_H1sq,combined,normalized,envelope"


def _num(x: float) -> str:
    return format(x, ".17g")


def error_csv_text(artifacts: RunArtifacts) -> str:
    rows = [ERROR_HEADER]
    for r in artifacts.error_series:
        env = "" if r.envelope is None else _num(r.envelope)
        rows.append(",".join([_num(r.t), _num(r.err_L2sq), _num(r.err_H1sq), _num(r.combined), _num(r.normalized), env]))
    return "\n".join(rows) + "\n"


def _write(path: Path, text: str) -> Path:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return path


def emit_csv(artifacts: RunArtifacts, out_dir: str | Path) -> list[Path]:
    """Write errors.csv, conditions.txt, run_log.txt and midplane slice CSVs."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = [
        _write(out / "errors.csv", error_csv_text(artifacts)),
        _write(out / "conditions.txt", artifacts.condition_report.to_text()),
        _write(out / "run_log.txt", artifacts.run_log),
    ]
    for name, values in artifacts.field_slices.items():
        written.append(_write(out / f"slice_{name}.csv", slice_csv_text(values, artifacts.config.grid.L)))
    return written


def slice_csv_text(values: np.ndarray, L: float) -> str:
    """Rows ``x,y,vx,vy,vz`` for a (3, N, N) midplane sample."""
    N = values.shape[-1]
    coords = np.arange(N) * (L / N)
    rows = ["x,y,vx,vy,vz"]
    for i in range(N):
        for j in range(N):
            rows.append(",".join(_num(v) for v in (coords[i], coords[j], *values[:, i, j])))
    return "\n".join(rows) + "\n"


def plot_script_text(title: str) -> str:
    return "\n".join(
        [
            "# gnuplot script: normalized error against time",
            "set datafile separator ','",
            "set key top right",
            "set logscale y",
            "set format y '10^{%L}'",
            "set xlabel 't'",
            "set ylabel 'normalized error'",
            f"set title '{title}'",
            "set terminal pngcairo size 900,600",
            "set output 'errors.png'",
            "plot 'errors.csv' using 1:5 skip 1 with lines title 'normalized error'",
            "",
        ]
    )


def emit_plot_script(artifacts: RunArtifacts, out_dir: str | Path) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return _write(out / "plot.gp", plot_script_text(artifacts.config.preset))

"""Command-line interface: run, check, presets, verify."""

from __future__ import annotations

import argparse
import logging
import sys

from .config import PRESETS, load_config, override, preset_config
from .errors import BlowUpError, ConfigError, InvariantError

EXIT_OK, EXIT_CONFIG, EXIT_BLOWUP, EXIT_INVARIANT = 0, 1, 2, 3


def _cmd_run(args) -> int:
    from .output import emit_csv, emit_plot_script
    from .runner import run_experiment

    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = override(cfg, "seed", str(args.seed))
    if args.output is not None:
        cfg = override(cfg, "output_dir", args.output)
    artifacts = run_experiment(cfg)
    written = emit_csv(artifacts, cfg.output_dir)
    written.append(emit_plot_script(artifacts, cfg.output_dir))
    report = artifacts.condition_report
    first, last = artifacts.error_series[0], artifacts.error_series[-1]
    print(f"hypotheses: {'PASS' if report.hypotheses_ok else 'FAIL'}")
    print(f"normalized error: {first.normalized:.3e} at t={first.t:g} -> {last.normalized:.3e} at t={last.t:g}")
    print(f"wrote {len(written)} files to {cfg.output_dir}")
    return EXIT_OK


def _cmd_check(args) -> int:
    from .runner import condition_report

    cfg = load_config(args.config)
    report = condition_report(cfg)
    print(report.to_text(), end="")
    for q in (*report.regularity, report.hyp1, report.hyp2, report.hyp3):
        print(f"{q.name}: {q.verdict} ({q.lhs:.6g} {q.relation} {q.rhs:.6g})")
    return EXIT_OK


def _cmd_presets(args) -> int:
    for name in PRESETS:
        c = preset_config(name)
        print(
            f"{name}: nu={c.model.nu} alpha={c.model.alpha} beta={c.assim.beta} eta={c.assim.eta} "
            f"h={c.assim.h} N={c.grid.N} dt={c.step.dt} t_end={c.step.t_end} init={c.init.kind}"
        )
    return EXIT_OK


def _cmd_verify(args) -> int:
    from .verification import run_all

    results = run_all()
    for r in results:
        print(f"{r.name}: {'PASS' if r.passed else 'FAIL'} {r.detail}")
    if not all(r.passed for r in results):
        raise InvariantError("oracle check failed")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mlalpha-cda", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="integrate a twin experiment and write artifacts")
    run.add_argument("--config", required=True)
    run.add_argument("--output", help="output directory (overrides output_dir)")
    run.add_argument("--seed", type=int, help="random seed (overrides seed)")
    run.set_defaults(func=_cmd_run)

    check = sub.add_parser("check", help="print the condition report without integrating")
    check.add_argument("--config", required=True)
    check.set_defaults(func=_cmd_check)

    presets = sub.add_parser("presets", help="list the built-in presets")
    presets.set_defaults(func=_cmd_presets)

    verify = sub.add_parser("verify", help="run the oracle checks")
    verify.set_defaults(func=_cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BlowUpError as exc:
        print(f"blow-up: {exc}", file=sys.stderr)
        return EXIT_BLOWUP
    except InvariantError as exc:
        print(f"invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())

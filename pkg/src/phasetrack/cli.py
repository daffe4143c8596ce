"""Command-line entry point.

Subcommands:
  sweep        run one configured sweep and emit a TSV
  calibrate    print the genie-calibrated metric gain and variance
  selftest     run the built-in oracle smoke suite
  figures-data run the six predefined figure configs (desk or paper scale)
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace

from . import harness

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2

CONFIG_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.dirname(
    os.path.abspath(__file__)))), "configs")
FIGURE_FILES = ["fig2.ini", "fig3.ini", "fig4.ini", "fig5.ini", "fig6.ini", "fig7.ini"]


def _add_common(parser):
    parser.add_argument("--threads", type=int, default=None)
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--frames", type=int, default=None)
    parser.add_argument("--frame-len", type=int, default=None)


def _threads(args):
    if args.threads is not None:
        return max(1, args.threads)
    env = os.environ.get("PHASETRACK_THREADS")
    return max(1, int(env)) if env else 1


def _overrides(args):
    over = {}
    if args.seed is not None:
        over["seed"] = args.seed
    if args.frames is not None:
        over["frames"] = args.frames
    if args.frame_len is not None:
        over["n"] = args.frame_len
    return over


def _progress(msg):
    print(msg, file=sys.stderr, flush=True)


def build_parser():
    parser = argparse.ArgumentParser(prog="phasetrack")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sweep = sub.add_parser("sweep", help="run one configured sweep")
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("--out", required=True)
    _add_common(p_sweep)

    p_cal = sub.add_parser("calibrate", help="print calibrated metric parameters")
    p_cal.add_argument("--config", required=True)
    p_cal.add_argument("--psr-db", type=float, default=None)
    _add_common(p_cal)

    sub.add_parser("selftest", help="run the built-in oracle smoke suite")

    p_fig = sub.add_parser("figures-data", help="run the predefined figure configs")
    p_fig.add_argument("--out", required=True)
    p_fig.add_argument("--scale", choices=("desk", "paper"), default="desk")
    p_fig.add_argument("--config-dir", default=CONFIG_DIR)
    _add_common(p_fig)

    return parser


def cmd_sweep(args):
    cfg = harness.load_config(args.config)
    if _overrides(args):
        cfg = replace(cfg, **_overrides(args)).validate()
    os.makedirs(args.out, exist_ok=True)
    result = harness.run_sweep(cfg, threads=_threads(args), progress=_progress)
    stem = os.path.splitext(os.path.basename(args.config))[0]
    path = harness.emit_tsv(result, os.path.join(args.out, stem + ".tsv"))
    print(path)
    return EXIT_OK


def cmd_calibrate(args):
    cfg = harness.load_config(args.config)
    if _overrides(args):
        cfg = replace(cfg, **_overrides(args)).validate()
    psr_db = args.psr_db if args.psr_db is not None else cfg.psr_db
    point = harness._make_point(cfg, 10.0 ** (psr_db / 10.0), cfg.nu_delta)
    if point.metric_var is None:
        gain, var = harness._calibrate_point(point)
    else:
        gain, var = point.metric_gain, point.metric_var
    print(f"gain: {gain.real:.8g}{gain.imag:+.8g}j")
    print(f"variance: {var:.8g}")
    return EXIT_OK


def cmd_figures_data(args):
    for name in FIGURE_FILES:
        path = os.path.join(args.config_dir, name)
        emitted = harness.run_figure_config(
            path, args.out, scale=args.scale, threads=_threads(args),
            overrides=_overrides(args), progress=_progress,
        )
        for out in emitted:
            print(out)
    return EXIT_OK


def cli_main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "sweep":
            return cmd_sweep(args)
        if args.command == "calibrate":
            return cmd_calibrate(args)
        if args.command == "selftest":
            from .selftest import run_selftest

            return EXIT_OK if run_selftest() else EXIT_NUMERICAL
        if args.command == "figures-data":
            return cmd_figures_data(args)
    except harness.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except harness.NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_CONFIG  # pragma: no cover


def main():  # console-script entry
    raise SystemExit(cli_main())


if __name__ == "__main__":
    main()

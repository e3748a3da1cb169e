"""``qkick`` command line: evolve, sweep, figure, validate.

Exit codes: 0 success, 1 configuration error, 2 numerical failure.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from ..evolution import DivergenceError
from ..spin_chain import InvalidInputError
from .config import ConfigError, apply_overrides, load_file, parse_number, validate_config
from .presets import FIGURES, figure_jobs
from .runner import run_single, run_sweep

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2

log = logging.getLogger("qkick")


def _load(args):
    raw = load_file(args.config)
    raw = apply_overrides(raw, args.set)
    if getattr(args, "out", None):
        raw["outputs.dir"] = args.out
    return validate_config(raw)


def cmd_validate(args):
    cfg = _load(args)
    print(f"ok: {cfg.chain.n_qubits} qubits, config hash {cfg.content_hash()[:12]}")
    return EXIT_OK


def cmd_evolve(args):
    cfg = _load(args)
    summary = run_single(cfg)
    for w in summary.warnings:
        log.warning(w)
    print(f"wrote {', '.join(summary.files)} to {cfg.out_dir}")
    return EXIT_OK


def cmd_sweep(args):
    cfg = _load(args)
    rows, failed = run_sweep(cfg, args.grid)
    print(f"wrote {len(rows)} grid points to {Path(cfg.out_dir) / 'sweep.csv'} ({failed} failed)")
    if rows and failed == len(rows):
        log.error("every grid point failed")
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_figure(args):
    tau_k = parse_number(args.tau_k) if args.tau_k is not None else None
    base = Path(args.out or f"figure{args.number}")
    status = EXIT_OK
    for name, mode, raw, grid in figure_jobs(args.number, tau_k):
        raw = apply_overrides(raw, args.set)
        raw["outputs.dir"] = str(base / name)
        cfg = validate_config(raw)
        if mode == "evolve":
            run_single(cfg)
        else:
            rows, failed = run_sweep(cfg, grid)
            if rows and failed == len(rows):
                status = EXIT_NUMERIC
        print(f"{name}: done -> {cfg.out_dir}")
    return status


def build_parser():
    p = argparse.ArgumentParser(prog="qkick", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, needs_config=True):
        if needs_config:
            sp.add_argument("--config", required=True, help="experiment file (flat YAML keys)")
        sp.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override a config key; repeatable")

    sp = sub.add_parser("evolve", help="single trajectory")
    common(sp)
    sp.add_argument("--out", help="output directory (overrides outputs.dir)")
    sp.set_defaults(func=cmd_evolve)

    sp = sub.add_parser("sweep", help="quasi-steady reports over a parameter grid")
    common(sp)
    sp.add_argument("--grid", choices=("kappa", "tau_k", "both"), default="both")
    sp.add_argument("--out", help="output directory (overrides outputs.dir)")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("figure", help="run a bundled figure preset")
    sp.add_argument("number", type=int, choices=sorted(FIGURES))
    sp.add_argument("--tau-k", default=None,
                    help="kick period for figure 7 (default 4pi; the pattern at this "
                         "period is indicative only)")
    sp.add_argument("--out", help="output directory (default figureN)")
    common(sp, needs_config=False)
    sp.set_defaults(func=cmd_figure)

    sp = sub.add_parser("validate", help="check a config file and exit")
    common(sp)
    sp.set_defaults(func=cmd_validate)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_CONFIG
    except (InvalidInputError, OSError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DivergenceError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())

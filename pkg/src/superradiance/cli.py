"""Command line entry point.

Exit codes: 0 ok, 1 configuration error, 2 numerical failure, 3 I/O failure.
"""
from __future__ import annotations

import argparse
import logging
import sys

from .harness import ConfigError, converge, load_config, reproduce_fig3, run
from .model import SpecError, StateError, validate
from .numeric import NumericalError

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output directory (overrides $OUTPUT_DIR and the config)")
    common.add_argument("--fidelity", choices=("full", "ideal"), help="override the coupling set")
    common.add_argument("--nbar", type=float, help="thermal occupation of the bath guides")
    common.add_argument("--quiet", action="store_true", help="only report errors")

    parser = argparse.ArgumentParser(prog="superradiance", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", parents=[common], help="run one configured experiment")
    p.add_argument("config")
    sub.add_parser("fig3", parents=[common], help="bright/normal/dark two-photon comparison")
    p = sub.add_parser("converge", parents=[common], help="smallest bath free of finite-size effects")
    p.add_argument("config")
    p.add_argument("--tol", type=float, default=1e-6)
    p = sub.add_parser("validate", parents=[common], help="check a configuration file")
    p.add_argument("config")
    return parser


def _load(args):
    cfg = load_config(args.config)
    return cfg.with_overrides(fidelity=args.fidelity, nbar=args.nbar)


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.ERROR if args.quiet else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    say = (lambda *a: None) if args.quiet else print
    try:
        if args.command == "run":
            result = run(_load(args), args.out)
            say(result.report.summary())
            say(f"wrote {result.data_path} and {result.report_path}")
        elif args.command == "fig3":
            if args.nbar:
                raise ConfigError("fig3 reproduces the zero-temperature comparison; --nbar is not supported")
            bundle = reproduce_fig3(args.out, fidelity=args.fidelity or "full")
            for res in bundle.results.values():
                say(res.report.summary())
            say(f"wrote {bundle.intensity_path} and {bundle.correlation_path}")
        elif args.command == "converge":
            m_star = converge(_load(args), args.tol)
            say(f"converged bath size: {m_star}")
        elif args.command == "validate":
            cfg = _load(args)
            checked = validate(cfg.spec)
            say(f"{args.config}: ok")
            for key, value in sorted(checked.diagnostics.items()):
                say(f"  {key} = {value:.6g}")
            for w in checked.warnings:
                say(f"  warning: {w}")
    except (ConfigError, SpecError, StateError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK

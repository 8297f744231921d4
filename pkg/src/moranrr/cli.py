"""Command line: ``moranrr <subcommand> [--config PATH] [--seed U64] [--out DIR] [--threads N] [--check]``.

Exit codes: 0 success, 1 a ``--check`` tolerance failed, 2 invalid config or
plot schema, 3 input/output failure.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import kvdoc
from .experiment import ConfigError, config_from_document, load_config, run_experiment

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3

SUBCOMMANDS = {
    "simulate": "simulate",
    "collapse-study": "collapse",
    "compare-fw": "compare-fw",
    "fixation": "fixation",
    "assumption-check": "assumption-check",
    "diagnose-law": "diagnose-law",
    "probe-variance": "probe-variance",
}

log = logging.getLogger("moranrr")


def _u64(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="moranrr", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, kind in SUBCOMMANDS.items():
        p = sub.add_parser(name, help=f"run a {kind} experiment")
        p.add_argument("--config", type=Path, help="key = value config; missing keys use defaults")
        p.add_argument("--seed", type=_u64, help="master seed (overrides the config)")
        p.add_argument("--out", type=Path, help="output directory (overrides the config)")
        p.add_argument("--threads", type=int, help="worker threads (default: MORAN_THREADS or 1)")
        p.add_argument("--replicas", type=int, help="replicas per N (overrides the config)")
        p.add_argument("--check", action="store_true", help="exit 1 when a tolerance check fails")
        p.set_defaults(kind=kind)
    p = sub.add_parser("plot", help="render a result CSV to SVG")
    p.add_argument("csv", type=Path)
    p.add_argument("--kind", default="auto", help="schema name, or auto to detect from the header")
    p.add_argument("--out", type=Path, help="SVG path (default: CSV path with .svg suffix)")
    return parser


def _plot(args) -> int:
    from .plotting import PlotSchemaError, emit_plot

    try:
        out = emit_plot(args.csv, args.kind, args.out)
    except PlotSchemaError as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    except ValueError as exc:
        log.error("%s: %s", args.csv, exc)
        return EXIT_CONFIG
    except OSError as exc:
        log.error("%s", exc)
        return EXIT_IO
    print(out)
    return EXIT_OK


def _experiment(args) -> int:
    try:
        if args.config is not None:
            cfg = load_config(args.config, args.kind)
            if cfg.kind != args.kind:
                raise ConfigError(f"config kind {cfg.kind!r} does not match subcommand {args.command!r}")
        else:
            cfg = config_from_document({}, args.kind)
        doc = cfg.to_document()
        if args.seed is not None:
            doc["seed"] = args.seed
        if args.out is not None:
            doc["out"] = str(args.out)
        if args.replicas is not None:
            doc["replicas"] = args.replicas
        cfg = config_from_document(doc)
        if args.threads is not None and args.threads < 1:
            raise ConfigError("--threads must be at least 1")
    except OSError as exc:
        log.error("cannot read config: %s", exc)
        return EXIT_IO
    except ConfigError as exc:
        log.error("invalid config: %s", exc)
        return EXIT_CONFIG
    try:
        result = run_experiment(cfg, threads=args.threads)
    except ConfigError as exc:
        log.error("invalid config: %s", exc)
        return EXIT_CONFIG
    except OSError as exc:
        log.error("output failure: %s", exc)
        return EXIT_IO
    sys.stdout.write(kvdoc.dumps(result.summary))
    if args.check and not result.passed:
        failed = [k for k, v in result.summary.items() if k.startswith("pass.") and v is False]
        log.error("check failed: %s", ", ".join(failed))
        return EXIT_CHECK
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "plot":
        return _plot(args)
    return _experiment(args)


if __name__ == "__main__":
    sys.exit(main())

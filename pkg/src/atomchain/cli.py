"""Command line entry point: ``atomchain <experiment> --config FILE``.

Exit codes: 0 success, 2 bad usage or config, 3 refused protocol (unsafe
path, out-of-range physics), 4 numerical failure, 1 anything else.  Errors
are reported on stderr as a single JSON object.
"""
from __future__ import annotations

import argparse
import json
import sys
import time

from . import experiments
from .config import EXPERIMENTS, load_config
from .errors import AtomChainError, ConfigError, NumericalError, UnsafePathError

EXIT_OK, EXIT_OTHER, EXIT_CONFIG, EXIT_REFUSED, EXIT_NUMERICAL = 0, 1, 2, 3, 4


def _exit_code(exc: BaseException) -> int:
    if isinstance(exc, ConfigError):
        return EXIT_CONFIG
    if isinstance(exc, NumericalError):
        return EXIT_NUMERICAL
    if isinstance(exc, (UnsafePathError, AtomChainError)):
        return EXIT_REFUSED
    return EXIT_OTHER


def _report(exc: BaseException, code: int, stream) -> None:
    payload = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    print(json.dumps(payload, sort_keys=True), file=stream)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        _report(ConfigError(message), EXIT_CONFIG, sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def _u64(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("workers must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="atomchain", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in EXPERIMENTS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", required=True, help="JSON experiment config")
        p.add_argument("--out", default="results", help="output directory (default: results)")
        p.add_argument("--workers", type=_positive, default=None, help="worker processes (overrides config)")
        p.add_argument("--seed", type=_u64, default=None, help="random seed (overrides config)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if cfg.experiment != args.command:
            raise ConfigError(f"config is for experiment {cfg.experiment!r}, not {args.command!r}")
        if args.workers is not None:
            cfg.workers = args.workers
        if args.seed is not None:
            cfg.seed = args.seed
        t0 = time.perf_counter()
        record = experiments.RUNNERS[cfg.experiment](cfg)
        paths = experiments.write_record(record, cfg, args.out, time.perf_counter() - t0)
    except Exception as exc:  # noqa: BLE001 - everything becomes a structured diagnostic
        code = _exit_code(exc)
        _report(exc, code, sys.stderr)
        return code
    for p in paths:
        print(p)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

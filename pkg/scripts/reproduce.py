"""Run every figure configuration through the CLI.

    python3 scripts/reproduce.py [--out results] [--only fig2a fig3 ...]

Each entry is one ``atomchain`` invocation; outputs land in ``<out>/<name>/``.
The unsafe Hadamard entry is expected to be refused (exit code 3).
"""
import argparse
import subprocess
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]

RUNS = [
    # name, subcommand, config, expected exit code
    ("fig2a", "spectrum", "fig2a_spectrum.json", 0),
    ("fig2b", "sweep-t", "fig2b_sweep_t.json", 0),
    ("fig2c", "spectrum", "fig2c_levels.json", 0),
    ("fig2d", "sweep-width", "fig2d_width.json", 0),
    ("fig3", "gate", "fig3_hadamard.json", 0),
    ("fig3_unsafe", "gate", "fig3_hadamard_unsafe.json", 3),
    ("fig4", "gate", "fig4_two_qubit.json", 0),
    ("staggered", "gate", "staggered_phase.json", 0),
    ("quench_n6", "quench", "quench_n6_oracle.json", 0),
    ("quench_n40", "quench", "quench_n40.json", 0),
    ("oracle", "oracle-compare", "oracle_compare.json", 0),
]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results")
    ap.add_argument("--only", nargs="*", help="subset of run names")
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()
    failed = []
    for name, cmd, cfg, expected in RUNS:
        if args.only and name not in args.only:
            continue
        argv = [sys.executable, "-m", "atomchain.cli", cmd, "--config", str(ROOT / "configs" / cfg),
                "--out", str(Path(args.out) / name), "--workers", str(args.workers)]
        print(f"[{name}] {' '.join(argv[2:])}", flush=True)
        code = subprocess.run(argv).returncode
        if code != expected:
            failed.append(name)
            print(f"[{name}] exit {code}, expected {expected}", file=sys.stderr)
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())

"""Plot the CSVs written by ``scripts/reproduce.py``.

    python3 scripts/plot_figures.py [--results results] [--out figures]

Needs the optional ``plot`` extra (matplotlib).  Missing result folders are skipped.
"""
import argparse
import csv
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def read(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def curves(rows, x, key, y):
    out = defaultdict(list)
    for r in rows:
        out[r[key]].append((float(r[x]), float(r[y])))
    return {k: sorted(v) for k, v in out.items()}


def levels(ax, rows, x, xlabel):
    for _, pts in sorted(curves(rows, x, "index", "energy").items(), key=lambda kv: int(kv[0])):
        ax.plot(*zip(*pts), lw=1)
    ax.set_xlabel(xlabel)
    ax.set_ylabel("energy")


def fig2a(src, ax):
    levels(ax, read(src / "spectrum.csv"), "scan_parameter", "Jx/|W|")
    ax.set_title("excitation energies, N=25")


def fig2b(src, ax):
    rows = read(src / "sweep_t.csv")
    N = [float(r["N"]) for r in rows]
    ax.loglog(N, [float(r["T1"]) for r in rows], "o-", label="T (lower bound F1)")
    ax.loglog(N, [float(r["T2"]) for r in rows], "s-", label="T (upper bound F2)")
    ax.loglog(N, [0.54 * n**2 for n in N], "k--", lw=0.8, label="0.54 N^2")
    ax.set_xlabel("N")
    ax.set_ylabel("T at F=0.95")
    ax.legend()


def fig2c(src, ax):
    levels(ax, read(src / "spectrum.csv"), "scan_parameter", "t")
    ax.set_title("instantaneous levels, N=6 beam splitter")


def fig2d(src, ax):
    rows = read(src / "sweep_width.csv")
    for w, pts in curves(rows, "N", "w", "one_minus_F1").items():
        ax.semilogy(*zip(*pts), "o-", label=f"w={w} (1-F1)")
    for w, pts in curves(rows, "N", "w", "one_minus_F2").items():
        ax.semilogy(*zip(*pts), "x:", label=f"w={w} (1-F2)")
    ax.set_xlabel("N")
    ax.set_ylabel("1-F")
    ax.legend(fontsize=7)


def fig3(src, ax):
    levels(ax, read(src / "gate_levels.csv"), "t", "t")
    ax.set_title("Hadamard path, lowest levels")


PANELS = {"fig2a": fig2a, "fig2b": fig2b, "fig2c": fig2c, "fig2d": fig2d, "fig3": fig3}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--results", default="results")
    ap.add_argument("--out", default="figures")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, draw in PANELS.items():
        src = Path(args.results) / name
        if not src.is_dir():
            print(f"skip {name}: no {src}")
            continue
        fig, ax = plt.subplots(figsize=(5, 3.6))
        draw(src, ax)
        fig.tight_layout()
        fig.savefig(out / f"{name}.png", dpi=120)
        plt.close(fig)
        print(f"wrote {out / (name + '.png')}")


if __name__ == "__main__":
    main()

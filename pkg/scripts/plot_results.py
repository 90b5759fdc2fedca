#!/usr/bin/env python3
"""Plot a sweep CSV written by ``simulate`` (mean sum rate per scheme, with
min/max band across seeds), or a directory of convergence traces.

    python3 scripts/plot_results.py results/schemes.csv -o schemes.png
    python3 scripts/plot_results.py results/traces -o convergence.png

Needs matplotlib (``pip install .[plot]``).
"""
import argparse
import collections
import csv
import pathlib
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

LABELS = {"p_t_db": "transmit power P_T (dB)", "m_elements": "RIS elements M",
          "n_tx": "transmit antennas N_T", "k_users": "users K"}


def plot_sweep(path, ax, log_y):
    rates = collections.defaultdict(lambda: collections.defaultdict(list))
    variable = None
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            variable = row["variable"]
            if row["sum_rate"] not in ("", "nan"):
                rates[row["scheme"]][float(row["value"])].append(float(row["sum_rate"]))
    for scheme, by_value in sorted(rates.items()):
        xs = sorted(by_value)
        mean = [sum(by_value[x]) / len(by_value[x]) for x in xs]
        ax.plot(xs, mean, marker="o", label=scheme)
        ax.fill_between(xs, [min(by_value[x]) for x in xs], [max(by_value[x]) for x in xs],
                        alpha=0.15)
    ax.set_xlabel(LABELS.get(variable, variable or ""))
    ax.set_ylabel("sum rate (bits/s/Hz)")
    if log_y:
        ax.set_yscale("log")


def plot_traces(directory, ax, log_y):
    for f in sorted(pathlib.Path(directory).glob("*.csv")):
        with open(f, newline="") as fh:
            rows = list(csv.DictReader(fh))
        ax.plot([int(r["iteration"]) for r in rows], [float(r["sum_rate"]) for r in rows],
                marker=".", label=f.stem.replace("__", " "))
    ax.set_xlabel("iteration")
    ax.set_ylabel("sum rate (bits/s/Hz)")
    if log_y:
        ax.set_yscale("log")


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description="plot simulate output")
    ap.add_argument("source", help="sweep CSV or trace directory")
    ap.add_argument("-o", "--output", default="plot.png")
    ap.add_argument("--log", action="store_true", help="logarithmic rate axis")
    args = ap.parse_args(argv)
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    src = pathlib.Path(args.source)
    (plot_traces if src.is_dir() else plot_sweep)(src, ax, args.log)
    ax.grid(alpha=0.3)
    ax.legend(fontsize="small")
    fig.tight_layout()
    fig.savefig(args.output, dpi=150)
    print(f"wrote {args.output}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

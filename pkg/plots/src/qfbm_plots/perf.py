"""Log-log timing comparison of the CE and CRMD samplers."""

from __future__ import annotations

import argparse
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .io import SchemaError, read_table


def build_figure(timings_path):
    meta, cols = read_table(timings_path, ("method", "mu", "N", "seconds_per_path"))
    methods = cols["method"]
    if methods.dtype.kind == "f":
        raise SchemaError(f"{timings_path}: method column is numeric")
    fig, ax = plt.subplots(figsize=(6, 4.5))
    mus = cols["mu"]
    labels = [m if not np.isfinite(mus[i]) else f"{m} (mu={int(mus[i])})"
              for i, m in enumerate(methods)]
    for label in dict.fromkeys(labels):
        keep = np.array([l == label for l in labels])
        order = np.argsort(cols["N"][keep])
        ax.plot(cols["N"][keep][order], cols["seconds_per_path"][keep][order],
                "o-", ms=4, lw=1, label=label)
    ax.set_xscale("log", base=2)
    ax.set_yscale("log")
    ax.set_xlabel("path length N")
    ax.set_ylabel("seconds per path")
    ax.set_title("CE vs CRMD sampling time (precomputation excluded)")
    ax.legend()
    fig.tight_layout()
    return fig


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("timings", help="timings CSV written by `qfbm bench`")
    parser.add_argument("--out", required=True)
    args = parser.parse_args(argv)
    try:
        fig = build_figure(args.timings)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 2
    fig.savefig(args.out, dpi=150)
    plt.close(fig)
    return 0


if __name__ == "__main__":
    sys.exit(main())

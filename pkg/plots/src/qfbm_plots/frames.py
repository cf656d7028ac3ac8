"""Grid of sphere-field heatmaps in an equirectangular projection.

Frames from one run (same run_id, i.e. shared temporal modes) form one row,
ordered by time, and share a single color scale so the temporal drift stays
visible; rows are ordered by Hurst parameter.
"""

from __future__ import annotations

import argparse
import math
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .io import SchemaError, read_frame


def _group_frames(paths):
    groups: dict = {}
    for path in paths:
        meta, values = read_frame(path)
        key = meta.get("run_id", meta.get("H", path))
        groups.setdefault(key, []).append((float(meta["t"]), meta, values))
    for frames in groups.values():
        frames.sort(key=lambda item: item[0])
    return dict(sorted(groups.items(),
                       key=lambda kv: float(kv[1][0][1].get("H", "0"))))


def build_figure(paths):
    groups = _group_frames(paths)
    n_rows = len(groups)
    n_cols = max(len(v) for v in groups.values())
    fig, axes = plt.subplots(n_rows, n_cols, figsize=(3.2 * n_cols, 1.9 * n_rows),
                             squeeze=False, constrained_layout=True)
    for row, (key, frames) in enumerate(groups.items()):
        lo = min(v.min() for _, _, v in frames)
        hi = max(v.max() for _, _, v in frames)
        if lo == hi:
            lo, hi = lo - 0.5, hi + 0.5
        last = None
        for col in range(n_cols):
            ax = axes[row][col]
            if col >= len(frames):
                ax.set_axis_off()
                continue
            t, meta, values = frames[col]
            n_theta, n_phi = values.shape
            theta_edges = np.linspace(0, math.pi, n_theta + 1)
            phi_edges = np.linspace(0, 2 * math.pi, n_phi + 1)
            last = ax.pcolormesh(phi_edges, theta_edges, values, vmin=lo, vmax=hi,
                                 cmap="viridis", shading="flat")
            ax.invert_yaxis()
            ax.set_title(f"H = {meta.get('H', '?')}, t = {t:g}", fontsize=9)
            ax.set_xticks([])
            ax.set_yticks([])
        fig.colorbar(last, ax=[axes[row][c] for c in range(n_cols)], shrink=0.85)
    return fig


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("frames", nargs="+", help="frame files written by `qfbm field`")
    parser.add_argument("--out", required=True)
    args = parser.parse_args(argv)
    try:
        fig = build_figure(args.frames)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 2
    fig.savefig(args.out, dpi=150)
    plt.close(fig)
    return 0


if __name__ == "__main__":
    sys.exit(main())

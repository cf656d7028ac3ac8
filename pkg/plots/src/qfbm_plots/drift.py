"""Temporal drift statistic of field runs: mean earliest-to-latest frame distance.

For every run (one seed, one H) the area-weighted L2 distance between its
last and first frame is computed; runs are aggregated per Hurst parameter.
Larger H means positively correlated temporal increments, so the mean drift
grows with H.
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from .io import SchemaError, read_frame


def sphere_l2(values: np.ndarray) -> float:
    """Area-weighted L2 norm of grid values on the equiangular grid."""
    n_theta, n_phi = values.shape
    thetas = math.pi * (np.arange(n_theta) + 0.5) / n_theta
    weights = np.sin(thetas) * (math.pi / n_theta) * (2 * math.pi / n_phi)
    return math.sqrt(float((values**2 * weights[:, None]).sum()))


def drift_table(paths):
    """Rows (H, n_runs, mean_drift, stderr) aggregated from frame files."""
    runs: dict = {}
    for path in paths:
        meta, values = read_frame(path)
        for key in ("H", "seed"):
            if key not in meta:
                raise SchemaError(f"{path}: missing {key} in metadata")
        runs.setdefault((float(meta["H"]), meta["seed"]), []).append((float(meta["t"]), values))
    per_h: dict = {}
    for (H, _seed), frames in runs.items():
        if len(frames) < 2:
            raise SchemaError(f"run H={H} has fewer than two frames")
        frames.sort(key=lambda item: item[0])
        per_h.setdefault(H, []).append(sphere_l2(frames[-1][1] - frames[0][1]))
    rows = []
    for H in sorted(per_h):
        drifts = np.array(per_h[H])
        se = drifts.std(ddof=1) / math.sqrt(drifts.size) if drifts.size > 1 else float("nan")
        rows.append((H, drifts.size, float(drifts.mean()), float(se)))
    return rows


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("frames", nargs="+")
    parser.add_argument("--out", default=None, help="optional CSV output path")
    args = parser.parse_args(argv)
    try:
        rows = drift_table(args.frames)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 2
    lines = ["H,n_runs,mean_drift,stderr"]
    for H, n, mean, se in rows:
        lines.append(f"{H!r},{n},{mean!r},{se!r}")
    text = "\n".join(lines) + "\n"
    print(text, end="")
    if args.out:
        with open(args.out, "w") as handle:
            handle.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Secondary acceptance: figure scripts driven end-to-end by qfbm CLI output.

One pass/fail line is printed per criterion.  The simulation side is invoked
strictly through the CLI (subprocess), never imported.
"""

import subprocess
import sys

from qfbm_plots.drift import drift_table
from qfbm_plots.error_decay import build_figure as error_figure
from qfbm_plots.frames import build_figure as frames_figure
from qfbm_plots.io import read_table


def report(num, name, ok, detail):
    status = "PASS" if ok else "FAIL"
    print(f"ACCEPTANCE {num} [{name}]: {status} - {detail}", file=sys.stderr, flush=True)
    assert ok, f"criterion {num} ({name}): {detail}"


def qfbm(*args):
    proc = subprocess.run([sys.executable, "-m", "qfbm.cli", *args],
                          capture_output=True, text=True)
    assert proc.returncode == 0, f"qfbm {' '.join(args)} failed: {proc.stderr}"


def test_criterion_9_error_decay_annotation(tmp_path):
    out = str(tmp_path / "rates")
    qfbm("rates", "--H", "0.8", "--N", "128", "--mu-list", "1,2,3,5,7,10,14,20,28,40,56",
         "--samples", "400", "--s", "10", "--seed", "5", "--out", out)
    curve_path = tmp_path / "rates_H0.8.csv"
    fits_path = tmp_path / "rates_fits.csv"
    fig, annotated = error_figure(curve_path, fits_path)
    png = tmp_path / "decay.png"
    fig.savefig(png, dpi=120)
    _, fcols = read_table(fits_path, ("H", "s", "r_H"))
    fitted = float(fcols["r_H"][0])
    ok = png.stat().st_size > 0 and f"{annotated:.2f}" == f"{fitted:.2f}"
    report(9, "plot-error-decay", ok,
           f"annotated slope {annotated:.2f} == fitted r_H {fitted:.2f}; figure rendered")


def test_criterion_10_sphere_frame_grid_and_drift(tmp_path):
    n_seeds = 50
    h_values = (0.1, 0.5, 0.9)
    for H in h_values:
        for seed in range(n_seeds):
            qfbm("field", "--H", str(H), "--kappa", "8", "--times", "1,2,3",
                 "--N", "48", "--grid", "12x24", "--seed", str(seed),
                 "--format", "bin", "--out", str(tmp_path / f"f_H{H}_s{seed}"))
    # Fig.-1-style 3x3 grid from one seed (rows: H, columns: t, shared modes per row)
    grid_inputs = [str(tmp_path / f"f_H{H}_s0_t{t}.0.bin") for H in h_values for t in (1, 2, 3)]
    fig = frames_figure(grid_inputs)
    png = tmp_path / "grid.png"
    fig.savefig(png, dpi=120)
    grid_ok = png.stat().st_size > 0 and len(fig.axes) >= 9
    # drift statistic over all seeds: mean ||frame(3) - frame(1)|| increasing in H
    drift_inputs = [str(p) for p in sorted(tmp_path.glob("f_H*.bin"))]
    rows = drift_table(drift_inputs)
    means = {H: m for H, n, m, _ in rows}
    counts = {H: n for H, n, m, _ in rows}
    drift_ok = (all(counts[H] == n_seeds for H in h_values)
                and means[0.1] < means[0.5] < means[0.9])
    report(10, "sphere-frames-drift", grid_ok and drift_ok,
           f"3x3 grid rendered; mean drift over {n_seeds} seeds: "
           + ", ".join(f"H={H}: {means[H]:.3f}" for H in h_values)
           + " (increasing in H)")

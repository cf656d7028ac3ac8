import math

import numpy as np
import pytest

from qfbm_plots.drift import drift_table, sphere_l2
from qfbm_plots.error_decay import build_figure as error_figure
from qfbm_plots.error_decay import main as error_main
from qfbm_plots.frames import build_figure as frames_figure
from qfbm_plots.frames import main as frames_main
from qfbm_plots.io import SchemaError, read_frame, read_table
from qfbm_plots.perf import build_figure as perf_figure
from qfbm_plots.perf import main as perf_main


def write_curve(path, mus, errors, meta=None):
    lines = [f"# {k}={v}" for k, v in (meta or {}).items()]
    lines.append("mu,error,stderr")
    for m, e in zip(mus, errors):
        lines.append(f"{m},{e!r},{e * 0.01!r}")
    path.write_text("\n".join(lines) + "\n")


def write_frame_csv(path, values, meta):
    n_theta, n_phi = values.shape
    lines = [f"# {k}={v}" for k, v in meta.items()]
    lines += [f"# n_theta={n_theta}", f"# n_phi={n_phi}"]
    lines.append("theta,phi,value")
    thetas = math.pi * (np.arange(n_theta) + 0.5) / n_theta
    phis = 2 * math.pi * np.arange(n_phi) / n_phi
    for i in range(n_theta):
        for j in range(n_phi):
            lines.append(f"{float(thetas[i])!r},{float(phis[j])!r},{float(values[i, j])!r}")
    path.write_text("\n".join(lines) + "\n")


def test_read_table_schema_errors(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("")
    with pytest.raises(SchemaError):
        read_table(p, ("mu",))
    p.write_text("# a=1\nmu,error\n")
    with pytest.raises(SchemaError):
        read_table(p, ("mu", "error"))  # header ok but no data rows
    p.write_text("mu,error\n1,0.5\n")
    with pytest.raises(SchemaError):
        read_table(p, ("mu", "error", "stderr"))
    with pytest.raises(SchemaError):
        read_table(tmp_path / "missing.csv", ("mu",))


def test_error_decay_synthetic_slope(tmp_path):
    mus = [1, 2, 4, 8, 16, 32, 64, 128]
    write_curve(tmp_path / "c.csv", mus, [1.0 / m for m in mus], meta={"H": 0.8, "fit_s": 1})
    fig, slope = error_figure(tmp_path / "c.csv")
    assert slope == pytest.approx(1.0, abs=1e-9)
    out = tmp_path / "c.png"
    assert error_main([str(tmp_path / "c.csv"), "--out", str(out)]) == 0
    assert out.stat().st_size > 0


def test_error_decay_prefers_embedded_fit(tmp_path):
    mus = [2, 4, 8]
    write_curve(tmp_path / "c.csv", mus, [0.3, 0.2, 0.1], meta={"H": 0.3, "fit_s": 2, "fit_r": 0.77})
    _, slope = error_figure(tmp_path / "c.csv")
    assert slope == 0.77


def test_error_decay_fits_file(tmp_path):
    write_curve(tmp_path / "c.csv", [2, 4, 8], [0.3, 0.2, 0.1], meta={"H": 0.3})
    fits = tmp_path / "fits.csv"
    fits.write_text("# schema=rate_fits\nH,s,r_H,intercept,residual\n0.3,2,0.91,0.0,0.0\n")
    _, slope = error_figure(tmp_path / "c.csv", fits)
    assert slope == 0.91
    fits.write_text("# schema=rate_fits\nH,s,r_H,intercept,residual\n0.9,2,0.91,0.0,0.0\n")
    with pytest.raises(SchemaError):
        error_figure(tmp_path / "c.csv", fits)


def test_error_decay_bad_inputs(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    assert error_main([str(empty), "--out", str(tmp_path / "x.png")]) == 2
    wrong = tmp_path / "wrong.csv"
    wrong.write_text("a,b\n1,2\n")
    assert error_main([str(wrong), "--out", str(tmp_path / "x.png")]) == 2


def test_perf_plot(tmp_path):
    p = tmp_path / "t.csv"
    rows = ["method,mu,N,seconds_per_path,memory_floats"]
    for k in range(10, 14):
        n = 2**k
        rows.append(f"ce,,{n},{1e-8 * n * k!r},{6 * n}")
        rows.append(f"crmd,5,{n},{4e-9 * n!r},{n}")
    p.write_text("# schema=timings\n" + "\n".join(rows) + "\n")
    fig = perf_figure(p)
    assert fig is not None
    assert perf_main([str(p), "--out", str(tmp_path / "t.png")]) == 0
    bad = tmp_path / "bad.csv"
    bad.write_text("method,N\nce,64\n")
    assert perf_main([str(bad), "--out", str(tmp_path / "b.png")]) == 2


def test_frame_readers(tmp_path):
    values = np.arange(12.0).reshape(3, 4)
    write_frame_csv(tmp_path / "f.csv", values, {"t": 1.0, "H": 0.5, "seed": 1, "run_id": "r"})
    meta, grid = read_frame(tmp_path / "f.csv")
    assert np.array_equal(grid, values)
    assert meta["t"] == "1.0"
    (tmp_path / "f.bin").write_bytes(values.astype("<f8").tobytes())
    (tmp_path / "f.bin.hdr").write_text(
        "# n_theta=3\n# n_phi=4\n# t=1.0\n# dtype=<f8\n# H=0.5\n# seed=1\n")
    meta2, grid2 = read_frame(tmp_path / "f.bin")
    assert np.array_equal(grid2, values)
    (tmp_path / "g.bin").write_bytes(values.astype("<f8").tobytes()[:-8])
    (tmp_path / "g.bin.hdr").write_text("# n_theta=3\n# n_phi=4\n# t=1.0\n# dtype=<f8\n")
    with pytest.raises(SchemaError):
        read_frame(tmp_path / "g.bin")


def test_frames_grid_and_constant_frame(tmp_path):
    paths = []
    for hi, H in enumerate((0.1, 0.5, 0.9)):
        for t in (1.0, 2.0, 3.0):
            values = np.full((4, 8), float(hi)) if t == 1.0 else np.random.default_rng(
                int(10 * H + t)).normal(size=(4, 8))
            p = tmp_path / f"h{hi}_t{t}.csv"
            write_frame_csv(p, values, {"t": t, "H": H, "seed": 0, "run_id": f"run{hi}"})
            paths.append(str(p))
    fig = frames_figure(paths)
    assert len(fig.axes) >= 9
    out = tmp_path / "grid.png"
    assert frames_main(paths + ["--out", str(out)]) == 0
    assert out.stat().st_size > 0
    # single constant frame renders with a non-degenerate color scale
    solo = tmp_path / "solo.csv"
    write_frame_csv(solo, np.full((3, 6), 2.5), {"t": 1.0, "H": 0.2, "seed": 3, "run_id": "s"})
    assert frames_main([str(solo), "--out", str(tmp_path / "solo.png")]) == 0
    bad = tmp_path / "nohdr.bin"
    bad.write_bytes(b"\x00" * 16)
    assert frames_main([str(bad), "--out", str(tmp_path / "no.png")]) == 2


def test_render_is_deterministic(tmp_path):
    mus = [1, 2, 4, 8]
    write_curve(tmp_path / "c.csv", mus, [1.0 / m for m in mus], meta={"H": 0.8, "fit_s": 1})
    payloads = []
    for i in range(2):
        out = tmp_path / f"o{i}.png"
        assert error_main([str(tmp_path / "c.csv"), "--out", str(out)]) == 0
        payloads.append(out.read_bytes())
    assert payloads[0] == payloads[1]


def test_sphere_l2_weighting():
    ones = np.ones((16, 32))
    # constant 1 has L2 norm sqrt(4 pi) over the sphere
    assert sphere_l2(ones) == pytest.approx(math.sqrt(4 * math.pi), rel=1e-3)


def test_drift_table(tmp_path):
    paths = []
    for H, scale in ((0.1, 0.5), (0.9, 2.0)):
        for seed in range(3):
            rng = np.random.default_rng(seed)
            base = rng.normal(size=(4, 8))
            for t in (1.0, 3.0):
                p = tmp_path / f"d_{H}_{seed}_{t}.csv"
                values = base if t == 1.0 else base + scale
                write_frame_csv(p, values, {"t": t, "H": H, "seed": seed})
                paths.append(str(p))
    rows = drift_table(paths)
    assert [r[0] for r in rows] == [0.1, 0.9]
    assert rows[0][1] == rows[1][1] == 3
    assert rows[1][2] > rows[0][2]
    with pytest.raises(SchemaError):
        drift_table(paths[:1])

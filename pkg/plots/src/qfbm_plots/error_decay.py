"""Log-log plot of CRMD strong-error decay against the window size mu."""

from __future__ import annotations

import argparse
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .io import SchemaError, read_table


def pick_slope(meta, cols, fits_path=None):
    """Fitted decay rate to annotate, with its fit window lower edge s.

    Preference order: explicit fits CSV (row matching the curve's H), the
    fit embedded in the curve metadata, and as a last resort an OLS refit
    over mu in [s, 128] of the plotted data.
    """
    if fits_path is not None:
        fmeta, fcols = read_table(fits_path, ("H", "s", "r_H"))
        match = np.isclose(fcols["H"], float(meta.get("H", "nan")))
        if not match.any():
            raise SchemaError(f"{fits_path}: no fit row for H={meta.get('H')}")
        idx = int(np.argmax(match))
        return float(fcols["r_H"][idx]), int(fcols["s"][idx])
    if "fit_r" in meta:
        return float(meta["fit_r"]), int(meta.get("fit_s", 1))
    s = int(meta.get("fit_s", 1))
    keep = (cols["mu"] >= s) & (cols["error"] > 0)
    if keep.sum() < 2:
        raise SchemaError("not enough points to fit a slope")
    slope = np.polyfit(np.log(cols["mu"][keep]), np.log(cols["error"][keep]), 1)[0]
    return float(-slope), s


def build_figure(curve_path, fits_path=None):
    meta, cols = read_table(curve_path, ("mu", "error", "stderr"))
    r, s = pick_slope(meta, cols, fits_path)
    fig, ax = plt.subplots(figsize=(6, 4.5))
    ax.errorbar(cols["mu"], cols["error"], yerr=cols["stderr"], fmt="o-",
                capsize=2, lw=1, ms=4, label=f"H = {meta.get('H', '?')}")
    keep = (cols["mu"] >= s) & (cols["error"] > 0)
    if keep.any():
        mu_fit = cols["mu"][keep]
        anchor = cols["error"][keep][0] * 1.4
        ax.plot(mu_fit, anchor * (mu_fit / mu_fit[0]) ** -r, "k--", lw=1,
                label=f"slope {r:.2f}")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel(r"window size $\mu$")
    ax.set_ylabel(r"$\sup_t\, \Vert \beta^{H,\mu}(t) - \beta^H(t) \Vert_{L^2(\Omega)}$")
    ax.set_title("CRMD error decay")
    ax.legend()
    fig.tight_layout()
    return fig, r


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("curve", help="error-curve CSV written by `qfbm rates`")
    parser.add_argument("--fits", default=None, help="rate-fits CSV for the slope annotation")
    parser.add_argument("--out", required=True, help="output image path")
    args = parser.parse_args(argv)
    try:
        fig, _ = build_figure(args.curve, args.fits)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 2
    fig.savefig(args.out, dpi=150)
    plt.close(fig)
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry point.

Subcommands: ``fbm`` (sample paths), ``field`` (sphere snapshots), ``rates``
(CRMD error curves and rate fits), ``trunc`` (truncation-rate experiment),
``bench`` (CE/CRMD timings).  Every output file embeds its resolved
configuration as ``# key=value`` header lines, including an ``args`` line
that reproduces the file bit-exactly when run again with the same seed.

Exit codes: 0 ok, 1 usage, 2 numeric-domain failure, 3 embedding failure.
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from . import circulant, crmd, harness
from .errors import DomainError, EmbeddingError
from .field import PowerLawSpectrum, QfbmSampler, synthesize_frame, write_frame_binary, write_frame_csv
from .io import atomic_write_bytes, atomic_write_text, fmt, meta_lines
from .kernel import TimeGrid
from .sphere import SphereGrid
from .streams import DOMAIN_FBM, substream


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _parse_ints(text: str) -> list[int]:
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if "^" in tok:
            base, _, exp = tok.partition("^")
            out.append(int(base) ** int(exp))
        else:
            out.append(int(tok))
    return out


def _parse_floats(text: str) -> list[float]:
    return [float(tok) for tok in text.split(",")]


def _parse_grid(text: str) -> tuple[int, int]:
    try:
        a, b = text.lower().split("x")
        return int(a), int(b)
    except ValueError as exc:
        raise UsageError(f"--grid expects NTHETAxNPHI, got {text!r}") from exc


def _require_pow2(N: int) -> int:
    n0 = int(round(math.log2(N)))
    if N < 2 or (1 << n0) != N:
        raise DomainError(f"CRMD methods need N = 2**n0 >= 2, got N = {N}")
    return n0


def _build_parser() -> _Parser:
    p = _Parser(prog="qfbm", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)

    fbm = sub.add_parser("fbm", help="sample fBm paths")
    fbm.add_argument("--method", choices=["ce", "crmd", "crmd-exact"], default="ce")
    fbm.add_argument("--H", type=float, required=True)
    fbm.add_argument("--N", type=int, default=1024)
    fbm.add_argument("--T", type=float, default=1.0)
    fbm.add_argument("--mu", type=int, default=10)
    fbm.add_argument("--nu", type=int, default=None)
    fbm.add_argument("--samples", type=int, default=1)
    fbm.add_argument("--seed", type=int, default=0)
    fbm.add_argument("--format", choices=["csv", "bin"], default="csv")
    fbm.add_argument("--out", required=True)

    field = sub.add_parser("field", help="Q-fBm field snapshots on the sphere")
    field.add_argument("--kappa", type=int, default=32)
    field.add_argument("--alpha", type=float, default=4.0)
    field.add_argument("--C", type=float, default=1.0)
    field.add_argument("--spectrum-offset", type=int, default=1, dest="offset")
    field.add_argument("--H", type=float, required=True)
    field.add_argument("--times", default="1,2,3")
    field.add_argument("--T", type=float, default=None)
    field.add_argument("--N", type=int, default=None)
    field.add_argument("--grid", default="64x128")
    field.add_argument("--method", choices=["ce", "crmd", "crmd-exact"], default="ce")
    field.add_argument("--mu", type=int, default=10)
    field.add_argument("--nu", type=int, default=None)
    field.add_argument("--seed", type=int, default=0)
    field.add_argument("--format", choices=["csv", "bin"], default="csv")
    field.add_argument("--out", required=True)

    rates = sub.add_parser("rates", help="CRMD strong-error curves and rate fits")
    rates.add_argument("--H", default="0.3,0.8")
    rates.add_argument("--N", type=int, default=512)
    rates.add_argument("--T", type=float, default=1.0)
    rates.add_argument("--mu-list", default="1,2,3,5,7,10,13,16,20,26,32,40,51,64,81,102,128")
    rates.add_argument("--samples", type=int, default=10000)
    rates.add_argument("--s", default="10")
    rates.add_argument("--seed", type=int, default=0)
    rates.add_argument("--threads", type=int, default=1)
    rates.add_argument("--out", required=True)

    trunc = sub.add_parser("trunc", help="spectral truncation-rate experiment")
    trunc.add_argument("--alpha", type=float, default=4.0)
    trunc.add_argument("--C", type=float, default=1.0)
    trunc.add_argument("--spectrum-offset", type=int, default=0, dest="offset")
    trunc.add_argument("--kappa-list", default="8,16,32,64")
    trunc.add_argument("--kappa-ref", type=int, default=256)
    trunc.add_argument("--H", type=float, default=0.8)
    trunc.add_argument("--t", type=float, default=1.0)
    trunc.add_argument("--samples", type=int, default=10000)
    trunc.add_argument("--seed", type=int, default=0)
    trunc.add_argument("--threads", type=int, default=1)
    trunc.add_argument("--out", required=True)

    bench = sub.add_parser("bench", help="CE/CRMD timing comparison")
    bench.add_argument("--methods", default="ce,crmd")
    bench.add_argument("--mu-list", default="5,20")
    bench.add_argument("--N-list", default="2^15,2^16,2^17,2^18,2^19,2^20")
    bench.add_argument("--reps", type=int, default=5)
    bench.add_argument("--H", type=float, default=0.8)
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--threads", type=int, default=1)
    bench.add_argument("--out", required=True)

    return p


# --------------------------------------------------------------------------#


def _cmd_fbm(args) -> int:
    if args.samples < 1:
        raise DomainError(f"--samples must be >= 1, got {args.samples}")
    grid = TimeGrid(args.T, args.N)
    rng = substream(args.seed, DOMAIN_FBM)
    if args.method == "ce":
        plan = circulant.build_ce_plan(args.N, args.H, grid.h)
        n_pairs = (args.samples + 1) // 2
        incr = circulant.sample_ce_increments(plan, rng, n_pairs)[: args.samples]
        paths = circulant.increments_to_path(incr)
    else:
        n0 = _require_pow2(args.N)
        if args.method == "crmd":
            plan = crmd.build_crmd_plan(args.H, n0, mu=args.mu, nu=args.nu, T=args.T)
        else:
            plan = crmd.build_exact_crmd_plan(args.H, n0, T=args.T)
        paths = crmd.sample_crmd_paths(plan, rng, args.samples)

    argv = ["fbm", "--method", args.method, "--H", fmt(args.H), "--N", str(args.N),
            "--T", fmt(args.T), "--samples", str(args.samples), "--seed", str(args.seed),
            "--format", args.format]
    if args.method == "crmd":
        argv += ["--mu", str(args.mu)]
        if args.nu is not None:
            argv += ["--nu", str(args.nu)]
    meta = {
        "tool": "qfbm", "schema": "fbm_paths", "method": args.method, "H": args.H,
        "N": args.N, "T": args.T, "samples": args.samples, "seed": args.seed,
        "args": " ".join(argv),
    }
    if args.method == "crmd":
        meta["mu"] = args.mu
        meta["nu"] = plan.nu
    times = grid.times()
    if args.format == "csv":
        header = "t,value\n" if args.samples == 1 else (
            "t," + ",".join(f"value_{i}" for i in range(args.samples)) + "\n")
        lines = [meta_lines(meta), header]
        for j in range(args.N + 1):
            lines.append(fmt(float(times[j])) + "," + ",".join(fmt(float(v)) for v in paths[:, j]) + "\n")
        atomic_write_text(args.out, "".join(lines))
    else:
        atomic_write_bytes(args.out, np.ascontiguousarray(paths, dtype="<f8").tobytes())
        meta.update({"dtype": "<f8", "rows": args.samples, "cols": args.N + 1, "order": "row-major"})
        atomic_write_text(args.out + ".hdr", meta_lines(meta))
    return 0


def _cmd_field(args) -> int:
    times = _parse_floats(args.times)
    if not times or any(t < 0 for t in times):
        raise DomainError("--times must be nonnegative")
    T = args.T if args.T is not None else max(times)
    if args.N is not None:
        N = args.N
    else:
        N = int(round(256 * T))
        if not math.isclose(N, 256 * T):
            raise DomainError(f"cannot pick a default grid for T = {T}; pass --N explicitly")
    grid_obj = TimeGrid(T, N)
    indices = []
    for t in times:
        j = int(round(t / grid_obj.h))
        if j > N or abs(j * grid_obj.h - t) > 1e-9 * max(1.0, T):
            raise DomainError(f"time {t} does not lie on the grid with N = {N}, T = {T}")
        indices.append(j)
    n_theta, n_phi = _parse_grid(args.grid)
    spectrum = PowerLawSpectrum(C=args.C, alpha=args.alpha, offset=args.offset)
    sampler = QfbmSampler(
        spectrum, kappa=args.kappa, H=args.H, T=T, N=N, engine=args.method,
        mu=args.mu, nu=args.nu, seed=args.seed, grid=SphereGrid(n_theta, n_phi),
    )
    sampler.draw(0)

    argv = ["field", "--kappa", str(args.kappa), "--alpha", fmt(args.alpha),
            "--C", fmt(args.C), "--spectrum-offset", str(args.offset),
            "--H", fmt(args.H), "--times", args.times, "--T", fmt(T), "--N", str(N),
            "--grid", args.grid, "--method", args.method, "--seed", str(args.seed),
            "--format", args.format]
    run_id = f"H{fmt(args.H)}-seed{args.seed}"
    for t, j in zip(times, indices):
        frame = synthesize_frame(sampler, j)
        meta = {
            "tool": "qfbm", "schema": "field_frame", "H": args.H, "kappa": args.kappa,
            "alpha": args.alpha, "C": args.C, "spectrum_offset": args.offset,
            "T": T, "N": N, "method": args.method, "seed": args.seed,
            "time_index": j, "run_id": run_id, "args": " ".join(argv),
        }
        stem = f"{args.out}_t{fmt(float(t))}"
        if args.format == "csv":
            write_frame_csv(frame, stem + ".csv", meta)
        else:
            write_frame_binary(frame, stem + ".bin", meta)
    return 0


def _cmd_rates(args) -> int:
    H_list = _parse_floats(args.H)
    mu_list = _parse_ints(args.mu_list)
    s_list = _parse_ints(args.s)
    n0 = _require_pow2(args.N)
    fits = []
    argv_base = ["rates", "--H", args.H, "--N", str(args.N), "--T", fmt(args.T),
                 "--mu-list", args.mu_list, "--samples", str(args.samples),
                 "--s", args.s, "--seed", str(args.seed), "--threads", str(args.threads)]
    for H in H_list:
        print(f"[qfbm rates] H={H} N={args.N} M={args.samples} ...", file=sys.stderr)
        curve = harness.crmd_error_curve(H, n0, mu_list, args.samples, args.seed,
                                         T=args.T, threads=args.threads)
        fit0 = harness.fit_rate(curve, s_list[0])
        for s in s_list:
            fits.append((H, harness.fit_rate(curve, s)))
        text = harness.error_curve_csv(curve, fit0, extra_meta={
            "tool": "qfbm", "args": " ".join(argv_base), "nu_rule": "ceil(mu/2)",
        })
        atomic_write_text(f"{args.out}_H{fmt(H)}.csv", text)
    atomic_write_text(f"{args.out}_fits.csv", harness.rate_fits_csv(fits, extra_meta={
        "tool": "qfbm", "N": args.N, "M": args.samples, "seed": args.seed,
        "args": " ".join(argv_base),
    }))
    return 0


def _cmd_trunc(args) -> int:
    spectrum = PowerLawSpectrum(C=args.C, alpha=args.alpha, offset=args.offset)
    kappa_list = _parse_ints(args.kappa_list)
    exp = harness.truncation_rate_experiment(
        spectrum, args.H, kappa_list, args.t, args.samples, args.seed,
        kappa_ref=args.kappa_ref, threads=args.threads,
    )
    argv = ["trunc", "--alpha", fmt(args.alpha), "--C", fmt(args.C),
            "--spectrum-offset", str(args.offset), "--kappa-list", args.kappa_list,
            "--kappa-ref", str(args.kappa_ref), "--H", fmt(args.H), "--t", fmt(args.t),
            "--samples", str(args.samples), "--seed", str(args.seed),
            "--threads", str(args.threads)]
    meta = {
        "tool": "qfbm", "schema": "truncation_curve", "alpha": args.alpha, "C": args.C,
        "spectrum_offset": args.offset, "kappa_ref": args.kappa_ref, "H": args.H,
        "t": args.t, "M": args.samples, "seed": args.seed,
        "fit_s": exp.fit.s, "fit_slope": -exp.fit.r, "args": " ".join(argv),
    }
    lines = [meta_lines(meta), "kappa,error,stderr,analytic_partial,analytic_full\n"]
    for k, e, s, ap, af in zip(exp.kappa_values, exp.mc_errors, exp.stderrs,
                               exp.analytic_partial, exp.analytic_full):
        lines.append(f"{k},{fmt(float(e))},{fmt(float(s))},{fmt(float(ap))},{fmt(float(af))}\n")
    atomic_write_text(args.out, "".join(lines))
    return 0


def _cmd_bench(args) -> int:
    if args.threads != 1:
        print("[qfbm bench] timing runs are single-threaded; forcing --threads 1", file=sys.stderr)
    methods = []
    for name in args.methods.split(","):
        name = name.strip()
        if name == "ce":
            methods.append(("ce", None))
        elif name == "crmd":
            methods.extend(("crmd", mu) for mu in _parse_ints(args.mu_list))
        else:
            raise UsageError(f"unknown method {name!r}")
    N_list = _parse_ints(args.N_list)
    rows = []
    for method, mu in methods:
        label = method if mu is None else f"{method}(mu={mu})"
        print(f"[qfbm bench] {label} ...", file=sys.stderr)
        rows.extend(harness.bench([(method, mu)], N_list, reps=args.reps,
                                  seed=args.seed, H=args.H))
    argv = ["bench", "--methods", args.methods, "--mu-list", args.mu_list,
            "--N-list", args.N_list, "--reps", str(args.reps), "--H", fmt(args.H),
            "--seed", str(args.seed)]
    text = harness.timings_csv(rows, extra_meta={
        "tool": "qfbm", "seed": args.seed, "reps": args.reps, "threads": 1,
        "memory_note": "ce: ~6N floats (eigenvalues + complex output); crmd: N + table floats",
        "args": " ".join(argv),
    })
    atomic_write_text(args.out, text)
    return 0


_COMMANDS = {
    "fbm": _cmd_fbm,
    "field": _cmd_field,
    "rates": _cmd_rates,
    "trunc": _cmd_trunc,
    "bench": _cmd_bench,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except DomainError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return 2
    except EmbeddingError as exc:
        print(f"embedding error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())

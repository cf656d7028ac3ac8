"""Monte Carlo experiments: CRMD error-vs-window curves with rate fits,
truncation-rate measurements, and CE/CRMD timing runs.

All experiments derive their noise from fixed per-batch substreams and reduce
partial results in deterministic batch order (compensated summation), so a
given (seed, parameters) pair yields bitwise identical results regardless of
the worker count.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import circulant, crmd
from .errors import DomainError
from .io import fmt, meta_lines
from .streams import DOMAIN_BENCH, DOMAIN_RATES, DOMAIN_TRUNC, substream

__all__ = [
    "ErrorCurve",
    "RateFit",
    "TimingRow",
    "TruncationExperiment",
    "crmd_error_curve",
    "fit_rate",
    "truncation_rate_experiment",
    "bench",
    "fit_complexity_models",
    "error_curve_csv",
    "rate_fits_csv",
    "timings_csv",
]

_BATCH = 2048  # fixed MC batch size; part of the deterministic stream layout


@dataclass(frozen=True)
class ErrorCurve:
    """sup-over-grid L2(Omega) errors against the exact reference, per window mu."""

    H: float
    N: int
    mu_values: tuple
    errors: tuple
    stderrs: tuple
    M: int
    seed: int
    T: float = 1.0

    def __post_init__(self):
        if not (len(self.mu_values) == len(self.errors) == len(self.stderrs)):
            raise DomainError("mu_values, errors and stderrs must have equal length")
        if any(e < 0 for e in self.errors):
            raise DomainError("errors must be nonnegative")


@dataclass(frozen=True)
class RateFit:
    """Least-squares slope of log(error) against log(mu) over [s, mu_max]."""

    r: float
    s: int
    intercept: float
    residual: float
    n_points: int


@dataclass(frozen=True)
class TimingRow:
    method: str
    mu: int | None
    N: int
    reps: int
    seconds_per_path: float
    memory_floats: int


@dataclass(frozen=True)
class TruncationExperiment:
    kappa_values: tuple
    mc_errors: tuple
    stderrs: tuple
    analytic_partial: tuple
    analytic_full: tuple
    fit: RateFit
    kappa_ref: int
    H: float
    t: float
    M: int
    seed: int


def _batches(M: int):
    return [(b, min(_BATCH, M - b * _BATCH)) for b in range((M + _BATCH - 1) // _BATCH)]


def _run_batches(batches, worker, threads: int):
    if threads <= 1:
        for item in batches:
            worker(item)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(worker, batches))


def _max_sqrt_mean_jackknife(dsq: np.ndarray) -> tuple[float, float]:
    """Estimate max_t sqrt(mean_i d2[i, t]) with a leave-one-out standard error."""
    M = dsq.shape[0]
    S = dsq.sum(axis=0)
    est = math.sqrt(S.max() / M)
    if M < 2:
        return est, float("nan")
    loo = np.sqrt(np.maximum(S[None, :] - dsq, 0.0) / (M - 1)).max(axis=1)
    se = math.sqrt((M - 1) / M * np.sum((loo - loo.mean()) ** 2))
    return est, se


def crmd_error_curve(H, n0, mu_list, M, seed, T=1.0, threads=1) -> ErrorCurve:
    """Couple CRMD windows to the exact sampler on common random numbers.

    Every Monte Carlo sample draws one level-major variate stream; the exact
    reference and each truncated window consume it identically, so the
    pathwise differences estimate the strong error directly.
    """
    N = 1 << n0
    mu_list = [int(m) for m in mu_list]
    if any(m >= N for m in mu_list):
        raise DomainError("windows mu >= N coincide with the exact reference")
    if any(m < 0 for m in mu_list):
        raise DomainError("mu must be >= 0")
    exact_plan = crmd.build_exact_crmd_plan(H, n0, T)
    plans = {m: crmd.build_crmd_plan(H, n0, mu=m, T=T) for m in mu_list}

    exact_paths = np.empty((M, N + 1))

    def draw(batch_index: int, size: int) -> np.ndarray:
        return substream(seed, DOMAIN_RATES, batch_index).standard_normal((N, size))

    def exact_worker(item):
        b, size = item
        Z = draw(b, size)
        exact_paths[b * _BATCH : b * _BATCH + size] = crmd.sample_crmd_paths(exact_plan, Z, size)

    _run_batches(_batches(M), exact_worker, threads)

    errors, stderrs = [], []
    for m in mu_list:
        dsq = np.empty((M, N + 1))

        def mu_worker(item, plan=plans[m]):
            b, size = item
            Z = draw(b, size)
            approx = crmd.sample_crmd_paths(plan, Z, size)
            lo = b * _BATCH
            dsq[lo : lo + size] = (approx - exact_paths[lo : lo + size]) ** 2

        _run_batches(_batches(M), mu_worker, threads)
        est, se = _max_sqrt_mean_jackknife(dsq)
        errors.append(est)
        stderrs.append(se)

    return ErrorCurve(
        H=float(H), N=N, mu_values=tuple(mu_list), errors=tuple(errors),
        stderrs=tuple(stderrs), M=int(M), seed=int(seed), T=float(T),
    )


def fit_rate(curve, s: int, mu_max: int = 128) -> RateFit:
    """OLS on (log mu, log error) over the window mu in [s, mu_max]; r = -slope."""
    mu = np.asarray(curve.mu_values, dtype=float)
    err = np.asarray(curve.errors, dtype=float)
    keep = (mu >= s) & (mu <= mu_max) & (err > 0.0)
    if np.count_nonzero(keep) < 3:
        raise DomainError(f"need at least 3 usable points with mu in [{s}, {mu_max}]")
    x = np.log(mu[keep])
    y = np.log(err[keep])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    return RateFit(
        r=float(-slope), s=int(s), intercept=float(intercept),
        residual=float(np.sqrt(np.mean(resid**2))), n_points=int(np.count_nonzero(keep)),
    )


def truncation_rate_experiment(spectrum, H, kappa_list, t, M, seed, kappa_ref, threads=1) -> TruncationExperiment:
    """Monte Carlo truncation errors against the kappa_ref reference field.

    The spatial L2 norm of the difference field is exact by orthonormality:
    ||B^ref - B^kappa||^2 = sum_{kappa < l <= ref} A_l sum_m beta_{l,m}(t)^2.
    The mode values at the single evaluation time are drawn directly from
    their marginal law beta_{l,m}(t) ~ N(0, t**(2H)), identical across all
    kappa (common randomness).  The analytic expectation of the same quantity
    and the full infinite tail are attached for comparison.
    """
    if not spectrum.is_power_law:
        raise DomainError("truncation experiment expects a power-law spectrum")
    kappa_list = sorted(int(k) for k in kappa_list)
    if kappa_ref <= max(kappa_list):
        raise DomainError(f"kappa_ref = {kappa_ref} must exceed max(kappa_list) = {max(kappa_list)}")
    from .field import truncation_error_exact
    from .kernel import check_hurst

    H = check_hurst(H)
    two_h = 2.0 * H
    n_modes = (kappa_ref + 1) ** 2
    ells = np.arange(kappa_ref + 1)
    weights = np.asarray(spectrum.A(ells)) * t**two_h
    offsets = ells**2  # mode block boundaries per degree

    per_sample = np.empty((M, len(kappa_list)))

    def worker(item):
        b, size = item
        rng = substream(seed, DOMAIN_TRUNC, b)
        z = rng.standard_normal((size, n_modes))
        s_l = np.add.reduceat(z * z, offsets, axis=1)  # chi2(2l+1) per degree
        weighted = s_l * weights
        suffix = np.cumsum(weighted[:, ::-1], axis=1)[:, ::-1]
        for j, kappa in enumerate(kappa_list):
            per_sample[b * _BATCH : b * _BATCH + size, j] = suffix[:, kappa + 1]

    _run_batches(_batches(M), worker, threads)

    mc, ses = [], []
    for j in range(len(kappa_list)):
        col = per_sample[:, j]
        mean = col.mean()
        mc.append(math.sqrt(mean))
        loo = np.sqrt(np.maximum((mean * M - col) / (M - 1), 0.0))
        ses.append(math.sqrt((M - 1) / M * np.sum((loo - loo.mean()) ** 2)))

    full = [truncation_error_exact(spectrum, k, t, H) for k in kappa_list]
    ref_sq = truncation_error_exact(spectrum, kappa_ref, t, H) ** 2
    partial = [math.sqrt(max(f * f - ref_sq, 0.0)) for f in full]

    curve = ErrorCurve(
        H=H, N=0, mu_values=tuple(kappa_list), errors=tuple(mc), stderrs=tuple(ses),
        M=int(M), seed=int(seed), T=float(t),
    )
    fit = fit_rate(curve, s=min(kappa_list), mu_max=max(kappa_list))
    return TruncationExperiment(
        kappa_values=tuple(kappa_list), mc_errors=tuple(mc), stderrs=tuple(ses),
        analytic_partial=tuple(partial), analytic_full=tuple(full), fit=fit,
        kappa_ref=int(kappa_ref), H=H, t=float(t), M=int(M), seed=int(seed),
    )


# --------------------------------------------------------------------------#
# Timing


def _crmd_table_floats(plan) -> int:
    return sum(e.size + 1 for e, _ in plan.table.values())


def bench(methods, N_list, reps=5, seed=0, H=0.8, T=1.0, warmup=1, min_warm_seconds=0.25) -> list[TimingRow]:
    """Median wall time per sampled path; plans are prebuilt outside the clock.

    ``methods`` is a list of ("ce", None) / ("crmd", mu) pairs.  Timing is
    single-threaded; drawing the normals is part of the timed region, the
    plan construction is not.  CE produces two paths per transform, so its
    per-path time is half the pair time.  Warmup repeats until at least
    ``min_warm_seconds`` have elapsed so short runs are not measured on an
    unramped CPU clock; warmup reps are discarded.
    """
    rows = []
    rng = substream(seed, DOMAIN_BENCH)
    for method, mu in methods:
        for N in N_list:
            if method == "ce":
                plan = circulant.build_ce_plan(N, H, T / N)
                sample = lambda: circulant.sample_ce_pair(plan, rng)
                per_call_paths = 2
                mem = 6 * N
            elif method == "crmd":
                n0 = int(round(math.log2(N)))
                if 1 << n0 != N:
                    raise DomainError(f"CRMD timing needs N = 2**n0, got {N}")
                plan = crmd.build_crmd_plan(H, n0, mu=mu, T=T)
                sample = lambda: crmd.sample_crmd(plan, rng)
                per_call_paths = 1
                mem = N + _crmd_table_floats(plan)
            else:
                raise DomainError(f"unknown method {method!r}")
            done = 0
            t_warm = time.perf_counter()
            while done < warmup or time.perf_counter() - t_warm < min_warm_seconds:
                sample()
                done += 1
            times = []
            for _ in range(reps):
                t0 = time.perf_counter()
                sample()
                times.append(time.perf_counter() - t0)
            rows.append(TimingRow(
                method=method, mu=mu, N=int(N), reps=int(reps),
                seconds_per_path=float(np.median(times)) / per_call_paths,
                memory_floats=int(mem),
            ))
    return rows


def fit_complexity_models(N_values, seconds) -> dict:
    """Through-origin least squares of t against N and N*log2(N).

    Returns the relative RMS residual of each model and which fits better.
    """
    N = np.asarray(N_values, dtype=float)
    t = np.asarray(seconds, dtype=float)
    out = {}
    for name, f in (("n", N), ("nlogn", N * np.log2(N))):
        a = float(f @ t / (f @ f))
        resid = t - a * f
        out[name] = float(np.sqrt(np.mean((resid / t) ** 2)))
    out["best"] = "nlogn" if out["nlogn"] < out["n"] else "n"
    return out


# --------------------------------------------------------------------------#
# CSV serialization (schemas consumed by the plotting package)


def error_curve_csv(curve: ErrorCurve, fit: RateFit | None = None, extra_meta: dict | None = None) -> str:
    meta = {
        "schema": "error_curve", "H": curve.H, "N": curve.N, "T": curve.T,
        "M": curve.M, "seed": curve.seed,
    }
    if fit is not None:
        meta.update({"fit_s": fit.s, "fit_r": fit.r, "fit_intercept": fit.intercept,
                     "fit_residual": fit.residual})
    if extra_meta:
        meta.update(extra_meta)
    lines = [meta_lines(meta), "mu,error,stderr\n"]
    for m, e, s in zip(curve.mu_values, curve.errors, curve.stderrs):
        lines.append(f"{m},{fmt(float(e))},{fmt(float(s))}\n")
    return "".join(lines)


def rate_fits_csv(rows, extra_meta: dict | None = None) -> str:
    """rows: iterable of (H, RateFit)."""
    meta = {"schema": "rate_fits"}
    if extra_meta:
        meta.update(extra_meta)
    lines = [meta_lines(meta), "H,s,r_H,intercept,residual\n"]
    for H, f in rows:
        lines.append(f"{fmt(float(H))},{f.s},{fmt(f.r)},{fmt(f.intercept)},{fmt(f.residual)}\n")
    return "".join(lines)


def timings_csv(rows, extra_meta: dict | None = None) -> str:
    meta = {"schema": "timings"}
    if extra_meta:
        meta.update(extra_meta)
    lines = [meta_lines(meta), "method,mu,N,seconds_per_path,memory_floats\n"]
    for r in rows:
        mu = "" if r.mu is None else r.mu
        lines.append(f"{r.method},{mu},{r.N},{fmt(r.seconds_per_path)},{r.memory_floats}\n")
    return "".join(lines)

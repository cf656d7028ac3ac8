"""Conditionalized random midpoint displacement (CRMD) sampling of fBm.

The path on a dyadic grid of ``N = 2**n0`` steps over ``[0, T]`` is built by
refinement: the total increment ``X_{0,1} ~ N(0, T**(2H))`` is split level by
level, each left child ``X_{n,2k-1}`` drawn conditionally on the window

    M = (X_{n-1,k}, ..., X_{n-1,min(k+nu, 2**(n-1))},
         X_{n,max(2k-1-mu, 1)}, ..., X_{n,2k-2})

(coarse block first, then fine block), and the right child recovered as
``X_{n,2k} = X_{n-1,k} - X_{n,2k-1}``.  Full windows (``mu, nu >= N``)
reproduce the exact O(N^2) construction; truncated windows cost O((mu+nu) N).

By self-similarity the regression vector ``e`` of a window depends only on
the window shape ``(p, q)`` = (available fine increments on the left,
available coarse increments on the right), never on the level; the
conditional variance rescales by ``(T * 2**(1-n))**(2H)`` at level ``n``.
Windows are solved once at unit coarse spacing and cached.

One path consumes exactly ``N`` standard normals: the top-level increment
first, then midpoints in level-major, left-to-right order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .errors import DomainError
from .kernel import check_hurst, interval_cov_matrix

__all__ = [
    "CrmdPlan",
    "build_crmd_plan",
    "build_exact_crmd_plan",
    "sample_crmd",
    "sample_crmd_paths",
    "sample_crmd_exact",
    "normals_required",
    "case_geometry",
]

# Window solutions keyed by (H, p, q); geometry is level- and plan-independent.
_case_cache: dict[tuple[float, int, int], tuple[np.ndarray, float]] = {}
_exact_plan_cache: dict[tuple[float, int, float], "CrmdPlan"] = {}


def normals_required(n0: int) -> int:
    """Standard normals one CRMD path consumes: 2**n0, independent of mu, nu."""
    return 1 << n0


def case_geometry(p: int, q: int) -> tuple[np.ndarray, np.ndarray, float, float]:
    """Conditioning intervals for window shape (p, q) at unit coarse spacing.

    Returns (starts, ends, target_start, target_end).  The fine block sits
    left of the target with spacing 1/2, the coarse block starts at the
    target's left edge with spacing 1; everything is shifted right by p/2 so
    all endpoints are nonnegative.
    """
    s0 = 0.5 * p
    fine_starts = 0.5 * np.arange(p)
    coarse_starts = s0 + np.arange(q)
    starts = np.concatenate([coarse_starts, fine_starts])
    ends = np.concatenate([coarse_starts + 1.0, fine_starts + 0.5])
    return starts, ends, s0, s0 + 0.5


def _solve_case(H: float, p: int, q: int) -> tuple[np.ndarray, float]:
    """Regression vector e and unit-scale conditional variance for (p, q)."""
    key = (H, p, q)
    hit = _case_cache.get(key)
    if hit is not None:
        return hit
    starts, ends, t0, t1 = case_geometry(p, q)
    gamma = interval_cov_matrix(starts, ends, starts, ends, H)
    cross = interval_cov_matrix([t0], [t1], starts, ends, H)[0]
    try:
        e = cho_solve(cho_factor(gamma, lower=True), cross)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - not reachable for fBm
        raise RuntimeError(f"conditioning system not SPD for case (p={p}, q={q})") from exc
    v = 0.5 ** (2.0 * H) - float(cross @ e)
    if not v > 0.0:  # pragma: no cover - theory guarantees positivity
        raise RuntimeError(f"nonpositive conditional variance {v} for case (p={p}, q={q})")
    _case_cache[key] = (e, v)
    return e, v


@dataclass(eq=False)
class CrmdPlan:
    """Precomputed conditioning table for CRMD sampling.

    ``table`` maps the window shape ``(p, q)`` to ``(e, v_unit)`` where ``e``
    holds the coarse-block coefficients first (q entries) followed by the
    fine-block coefficients (p entries), and ``v_unit`` is the conditional
    variance at unit coarse spacing.
    """

    H: float
    n0: int
    mu: int
    nu: int
    T: float
    table: dict[tuple[int, int], tuple[np.ndarray, float]] = field(repr=False)
    _packed: tuple | None = field(default=None, repr=False)

    @property
    def N(self) -> int:
        return 1 << self.n0

    def level_sigma(self, n: int) -> float:
        """Std-dev scale factor at level n: (T * 2**(1-n))**H."""
        return (self.T * 2.0 ** (1 - n)) ** self.H

    def window(self, n: int, k: int) -> tuple[int, int]:
        """Window shape (p, q) used for midpoint k at level n."""
        half = 1 << (n - 1)
        return min(self.mu, 2 * k - 2), min(self.nu + 1, half - k + 1)


def _reachable_windows(n0: int, mu: int, nu: int):
    """All distinct (p, q) window shapes arising for levels 1..n0."""
    cap = max((mu + 3) // 2, nu + 2) + 1
    seen = set()
    for n in range(1, n0 + 1):
        half = 1 << (n - 1)
        if half <= 2 * cap:
            ks = range(1, half + 1)
        else:
            ks = list(range(1, cap + 1)) + list(range(half - cap, half + 1))
        for k in ks:
            seen.add((min(mu, 2 * k - 2), min(nu + 1, half - k + 1)))
    return sorted(seen)


def build_crmd_plan(H: float, n0: int, mu: int, nu: int | None = None, T: float = 1.0) -> CrmdPlan:
    """Solve and tabulate every conditioning window the sampler can hit.

    ``nu`` defaults to ``ceil(mu/2)``, matching the symmetric influence of
    the fine left and coarse right windows.
    """
    H = check_hurst(H)
    if n0 < 1:
        raise DomainError(f"need n0 >= 1 refinement levels, got {n0}")
    if mu < 0:
        raise DomainError(f"mu must be >= 0, got {mu}")
    if nu is None:
        nu = math.ceil(mu / 2)
    if nu < 0:
        raise DomainError(f"nu must be >= 0, got {nu}")
    if not T > 0.0:
        raise DomainError(f"horizon T must be positive, got {T}")
    table = {pq: _solve_case(H, *pq) for pq in _reachable_windows(n0, mu, nu)}
    return CrmdPlan(H=H, n0=int(n0), mu=int(mu), nu=int(nu), T=float(T), table=table)


def build_exact_crmd_plan(H: float, n0: int, T: float = 1.0) -> CrmdPlan:
    """Plan whose windows always cover everything known: the exact sampler."""
    key = (float(H), int(n0), float(T))
    plan = _exact_plan_cache.get(key)
    if plan is None:
        plan = build_crmd_plan(H, n0, mu=1 << n0, nu=1 << (n0 - 1), T=T)
        _exact_plan_cache[key] = plan
    return plan


def _noise_matrix(noise, N: int, n_paths: int) -> np.ndarray:
    """Normals of shape (N, n_paths); row j is the j-th level-major variate."""
    if isinstance(noise, np.random.Generator):
        return noise.standard_normal((N, n_paths))
    z = np.asarray(noise, dtype=float)
    if z.shape == (N,) and n_paths == 1:
        return z[:, None]
    if z.shape != (N, n_paths):
        raise DomainError(f"expected normals of shape ({N}, {n_paths}), got {z.shape}")
    return z


def sample_crmd_paths(plan: CrmdPlan, noise, n_paths: int, return_levels: bool = False):
    """Sample ``n_paths`` CRMD paths at once; returns shape (n_paths, N+1).

    ``noise`` is a Generator or an array of shape (N, n_paths) whose row j
    holds, for every path, the j-th variate in level-major order; passing the
    same array to plans with different windows couples them per increment.
    With ``return_levels`` the increment arrays of every refinement level are
    returned as well.
    """
    N = plan.N
    Z = _noise_matrix(noise, N, n_paths)
    cur = np.empty((Z.shape[1], 1))
    cur[:, 0] = plan.T**plan.H * Z[0]
    levels = [cur]
    for n in range(1, plan.n0 + 1):
        half = 1 << (n - 1)
        nxt = np.empty((cur.shape[0], 2 * half))
        sig_n = plan.level_sigma(n)
        base = half  # variate index of the first midpoint at this level
        for k in range(1, half + 1):
            p, q = plan.window(n, k)
            e, v = plan.table[(p, q)]
            mean = cur[:, k - 1 : k - 1 + q] @ e[:q]
            if p:
                mean += nxt[:, 2 * k - 2 - p : 2 * k - 2] @ e[q:]
            x = mean + math.sqrt(v) * sig_n * Z[base + k - 1]
            nxt[:, 2 * k - 2] = x
            nxt[:, 2 * k - 1] = cur[:, k - 1] - x
        cur = nxt
        if return_levels:
            levels.append(cur)
    paths = np.zeros((cur.shape[0], N + 1))
    np.cumsum(cur, axis=1, out=paths[:, 1:])
    if return_levels:
        return paths, levels
    return paths


def _pack(plan: CrmdPlan):
    """Flatten the case table into arrays for the compiled kernel."""
    if plan._packed is not None:
        return plan._packed
    keys = sorted(plan.table)
    lut = np.full((plan.mu + 1, plan.nu + 2), -1, dtype=np.int64)
    offs = np.zeros(len(keys) + 1, dtype=np.int64)
    vsqrt = np.empty(len(keys))
    chunks = []
    for i, (p, q) in enumerate(keys):
        e, v = plan.table[(p, q)]
        lut[p, q] = i
        offs[i + 1] = offs[i] + e.size
        vsqrt[i] = math.sqrt(v)
        chunks.append(e)
    e_flat = np.concatenate(chunks) if chunks else np.zeros(0)
    sig = np.array([0.0] + [plan.level_sigma(n) for n in range(1, plan.n0 + 1)])
    packed = (lut, e_flat, offs, vsqrt, sig)
    plan._packed = packed
    return packed


def _kernel(z, n0, mu, nu, lut, e_flat, offs, vsqrt, sig, init_sigma, out):
    N = 1 << n0
    cur = np.empty(N)
    nxt = np.empty(N)
    cur[0] = init_sigma * z[0]
    idx = 1
    for n in range(1, n0 + 1):
        half = 1 << (n - 1)
        sig_n = sig[n]
        for k in range(1, half + 1):
            p = min(mu, 2 * k - 2)
            q = min(nu + 1, half - k + 1)
            cid = lut[p, q]
            base = offs[cid]
            m = 0.0
            for i in range(q):
                m += e_flat[base + i] * cur[k - 1 + i]
            for i in range(p):
                m += e_flat[base + q + i] * nxt[2 * k - 2 - p + i]
            x = m + vsqrt[cid] * sig_n * z[idx]
            idx += 1
            nxt[2 * k - 2] = x
            nxt[2 * k - 1] = cur[k - 1] - x
        cur, nxt = nxt, cur
    out[0] = 0.0
    acc = 0.0
    for j in range(N):
        acc += cur[j]
        out[j + 1] = acc


_compiled_kernel = None


def _get_kernel():
    global _compiled_kernel
    if _compiled_kernel is None:
        import numba

        _compiled_kernel = numba.njit(cache=True)(_kernel)
    return _compiled_kernel


def sample_crmd(plan: CrmdPlan, noise) -> np.ndarray:
    """Sample one path on [0, T]; returns 2**n0 + 1 values starting at 0.

    Consumes exactly ``N = 2**n0`` standard normals (top-level increment,
    then midpoints level-major, left to right), regardless of mu and nu.
    """
    N = plan.N
    if isinstance(noise, np.random.Generator):
        z = noise.standard_normal(N)
    else:
        z = np.asarray(noise, dtype=float)
        if z.shape != (N,):
            raise DomainError(f"expected normals of shape ({N},), got {z.shape}")
    lut, e_flat, offs, vsqrt, sig = _pack(plan)
    out = np.empty(N + 1)
    _get_kernel()(
        z, plan.n0, plan.mu, plan.nu, lut, e_flat, offs, vsqrt, sig,
        plan.T**plan.H, out,
    )
    return out


def sample_crmd_exact(H: float, n0: int, T: float = 1.0, noise=None) -> np.ndarray:
    """Exact fBm path via full conditioning, O(N^2) per path.

    Consumes variates in the same order as :func:`sample_crmd`, so passing
    the same stream to both couples them per increment.
    """
    plan = build_exact_crmd_plan(H, n0, T)
    if noise is None:
        noise = np.random.default_rng()
    return sample_crmd(plan, noise)

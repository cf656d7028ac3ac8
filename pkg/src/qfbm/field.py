"""Q-fBm synthesis on the sphere: spectra, truncated expansion, error formulas.

A field sample truncated at degree kappa is

    B(t, x) = sum_{l <= kappa} sum_{|m| <= l} sqrt(A_l) beta_{l,m}(t) Y_{l,m}(x)

with one independent fBm path per mode.  The angular power spectrum A_l,
its trace sum_l (2l+1) A_l, the exact L2 truncation error, and the general
hypersphere dimension/summability/rate formulas live here as well.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import circulant, crmd
from .errors import DomainError
from .kernel import TimeGrid, check_hurst
from .sphere import SphereGrid, legendre_table
from .streams import DOMAIN_FIELD, substream

__all__ = [
    "PowerLawSpectrum",
    "ExplicitSpectrum",
    "trace_q",
    "check_summability",
    "SummabilityReport",
    "hyper_dim",
    "rate_formula",
    "truncation_error_exact",
    "QfbmSampler",
    "FieldFrame",
    "synthesize_frame",
    "write_frame_csv",
    "write_frame_binary",
]


@dataclass(frozen=True)
class PowerLawSpectrum:
    """Algebraically decaying angular power spectrum A_l = C * (l + offset)**(-alpha).

    ``offset=1`` is the default family; ``offset=0`` gives the bare l**(-alpha)
    tail with the l = 0 entry capped at C (the decay hypothesis constrains
    only the tail beyond ell0).
    """

    C: float
    alpha: float
    ell0: int = 0
    offset: int = 1

    def __post_init__(self):
        if not self.C > 0.0:
            raise DomainError(f"spectrum amplitude C must be positive, got {self.C}")
        if not self.alpha > 2.0:
            raise DomainError(f"power-law spectra require alpha > 2, got {self.alpha}")
        if self.offset not in (0, 1):
            raise DomainError(f"offset must be 0 or 1, got {self.offset}")
        if self.ell0 < 0:
            raise DomainError(f"ell0 must be >= 0, got {self.ell0}")

    @property
    def is_power_law(self) -> bool:
        return True

    @property
    def max_degree(self):
        return None

    def A(self, ell):
        ell = np.asarray(ell, dtype=float)
        base = np.maximum(ell + self.offset, 1.0)
        out = self.C * base**-self.alpha
        return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class ExplicitSpectrum:
    """Finite user-supplied spectrum; A_l = values[l], zero beyond the list."""

    values: tuple

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        if len(vals) == 0:
            raise DomainError("explicit spectrum needs at least one entry")
        if any(v < 0.0 for v in vals):
            raise DomainError("angular power spectrum entries must be >= 0")
        object.__setattr__(self, "values", vals)

    @property
    def is_power_law(self) -> bool:
        return False

    @property
    def max_degree(self) -> int:
        return len(self.values) - 1

    def A(self, ell):
        ell = np.asarray(ell)
        arr = np.asarray(self.values)
        out = np.where(ell <= self.max_degree, arr[np.minimum(ell, self.max_degree)], 0.0)
        return float(out) if out.ndim == 0 else out


def _power_tail_sum(s: float, a: int) -> float:
    """sum_{n >= a} n**(-s) for s > 1, adaptively to relative 1e-12.

    Terms up to a moving cutoff are summed explicitly; the remainder uses the
    Euler-Maclaurin expansion, with the cutoff doubled until two consecutive
    evaluations agree to 1e-13.
    """
    if not s > 1.0:
        raise DomainError(f"tail sum diverges for exponent {s} <= 1")

    def em(a0: float) -> float:
        return (
            a0 ** (1.0 - s) / (s - 1.0)
            + 0.5 * a0**-s
            + s * a0 ** (-s - 1.0) / 12.0
            - s * (s + 1.0) * (s + 2.0) * a0 ** (-s - 3.0) / 720.0
            + s * (s + 1.0) * (s + 2.0) * (s + 3.0) * (s + 4.0) * a0 ** (-s - 5.0) / 30240.0
        )

    cut = max(a, 64)
    explicit = float(np.sum(np.arange(a, cut, dtype=float) ** -s))
    total = explicit + em(cut)
    while True:
        new_cut = 2 * cut
        explicit += float(np.sum(np.arange(cut, new_cut, dtype=float) ** -s))
        new_total = explicit + em(new_cut)
        if abs(new_total - total) <= 1e-13 * abs(new_total):
            return new_total
        cut, total = new_cut, new_total


def _weighted_tail(spectrum, start: int) -> float:
    """sum_{l >= start} (2l+1) A_l."""
    if not spectrum.is_power_law:
        top = spectrum.max_degree
        if start > top:
            return 0.0
        ell = np.arange(start, top + 1)
        return float(np.sum((2.0 * ell + 1.0) * spectrum.A(ell)))
    C, alpha, off = spectrum.C, spectrum.alpha, spectrum.offset
    if not alpha > 2.0:
        raise DomainError("weighted tail diverges for alpha <= 2")
    head = 0.0
    if start == 0 and off == 0:
        head = spectrum.A(0)  # capped l = 0 entry sits outside the power tail
        start = 1
    # substitute n = l + offset: (2l+1) A_l = 2 C n**(1-alpha) + (1-2*off) C n**(-alpha)
    a = start + off
    return head + 2.0 * C * _power_tail_sum(alpha - 1.0, a) + (1.0 - 2.0 * off) * C * _power_tail_sum(alpha, a)


def trace_q(spectrum, kappa=None) -> float:
    """trace Q = sum_l (2l+1) A_l, up to degree kappa or fully summed.

    ``kappa=None`` (or infinity) requests the converged infinite sum, which
    for power-law spectra is evaluated by adaptive tail summation to relative
    1e-12.
    """
    if kappa is None or (isinstance(kappa, float) and math.isinf(kappa)) or kappa == "inf":
        return _weighted_tail(spectrum, 0)
    kappa = int(kappa)
    if kappa < 0:
        raise DomainError(f"truncation degree must be >= 0, got {kappa}")
    ell = np.arange(kappa + 1)
    return float(np.sum((2.0 * ell + 1.0) * spectrum.A(ell)))


@dataclass(frozen=True)
class SummabilityReport:
    converges: bool
    eta: float
    d: int
    criterion: str
    space_holder: float | None
    partial_sums: tuple


def check_summability(spectrum, eta: float, d: int = 3) -> SummabilityReport:
    """Does sum_l A_l l**(d-2+eta) converge?  Implies C^{H-,(eta/2)-} regularity.

    Power-law spectra are decided analytically (alpha > d - 1 + eta); finite
    explicit spectra always converge.  Partial sums at a few checkpoints are
    reported either way.
    """
    if not eta > 0.0:
        raise DomainError(f"eta must be positive, got {eta}")
    if d < 3:
        raise DomainError(f"ambient dimension d must be >= 3, got {d}")
    w = d - 2.0 + eta
    if spectrum.is_power_law:
        converges = spectrum.alpha > d - 1.0 + eta
        criterion = f"alpha > d - 1 + eta ({spectrum.alpha} > {d - 1 + eta})"
    else:
        converges = True
        criterion = "finite spectrum"
    checkpoints = []
    for top in (16, 64, 256, 1024):
        ell = np.arange(1, top + 1)
        checkpoints.append((top, float(np.sum(spectrum.A(ell) * ell**w))))
    return SummabilityReport(
        converges=converges,
        eta=float(eta),
        d=int(d),
        criterion=criterion,
        space_holder=eta / 2.0 if converges else None,
        partial_sums=tuple(checkpoints),
    )


def hyper_dim(ell: int, d: int) -> int:
    """Number of degree-ell real spherical harmonics on S^{d-1}.

    h(ell, d) = (2*ell + d - 2) * (ell + d - 3)! / ((d - 2)! * ell!), evaluated
    exactly in integer arithmetic.
    """
    if ell < 0:
        raise DomainError(f"degree must be >= 0, got {ell}")
    if d < 3:
        raise DomainError(f"ambient dimension d must be >= 3, got {d}")
    num = (2 * ell + d - 2) * math.comb(ell + d - 3, ell)
    q, r = divmod(num, d - 2)
    if r:  # pragma: no cover - h is an integer for all valid inputs
        raise ArithmeticError(f"h({ell}, {d}) is not an integer")
    return q


def rate_formula(alpha: float, d: int = 3) -> float:
    """Strong convergence rate (alpha - d + 1)/2 of the degree-kappa truncation."""
    if d < 3:
        raise DomainError(f"ambient dimension d must be >= 3, got {d}")
    if not alpha > d - 1.0:
        raise DomainError(f"no convergence rate for alpha = {alpha} <= d - 1 = {d - 1}")
    return (alpha - d + 1.0) / 2.0


def truncation_error_exact(spectrum, kappa: int, t: float, H: float) -> float:
    """Exact L2(Omega; L2(S^2)) distance between the field and its truncation.

    E || B(t) - B^kappa(t) ||^2 = t**(2H) * sum_{l > kappa} (2l+1) A_l by
    orthonormality and E[beta(t)^2] = t**(2H); returns the square root.
    """
    H = check_hurst(H)
    if t < 0.0:
        raise DomainError(f"time must be >= 0, got {t}")
    if kappa < 0:
        raise DomainError(f"truncation degree must be >= 0, got {kappa}")
    return math.sqrt(t ** (2.0 * H) * _weighted_tail(spectrum, kappa + 1))


# --------------------------------------------------------------------------#
# Sampling


class QfbmSampler:
    """Draws truncated Q-fBm field samples with reproducible substreams.

    Mode (l, m) owns block ``l*l + l + m`` of the per-sample variate stream
    (``substream(seed, DOMAIN_FIELD, sample_index)``), so enlarging kappa
    leaves the paths of existing modes unchanged and different samples and
    modes never share variates.

    Engines: ``"ce"`` (circulant embedding; each mode consumes a
    ``(2N-2, 2)`` block and keeps the real part), ``"crmd"`` (windows mu/nu)
    and ``"crmd-exact"``; both CRMD engines consume N variates per mode in
    level-major order and require N to be a power of two.
    """

    def __init__(self, spectrum, kappa, H, T=1.0, N=256, engine="ce",
                 mu=10, nu=None, seed=0, grid=None):
        self.spectrum = spectrum
        self.kappa = int(kappa)
        if self.kappa < 0:
            raise DomainError(f"kappa must be >= 0, got {self.kappa}")
        self.H = check_hurst(H)
        self.time_grid = TimeGrid(T, N)
        self.engine = engine
        self.seed = int(seed)
        self.grid = grid if grid is not None else SphereGrid(64, 128)
        self.n_modes = (self.kappa + 1) ** 2
        ells = np.repeat(np.arange(self.kappa + 1), 2 * np.arange(self.kappa + 1) + 1)
        self._sqrt_a = np.sqrt(np.asarray(self.spectrum.A(ells), dtype=float))
        if engine == "ce":
            self._ce_plan = circulant.build_ce_plan(N, self.H, self.time_grid.h)
        elif engine in ("crmd", "crmd-exact"):
            n0 = int(round(math.log2(N)))
            if 1 << n0 != N:
                raise DomainError(f"CRMD engines need N = 2**n0, got N = {N}")
            if engine == "crmd":
                self._crmd_plan = crmd.build_crmd_plan(self.H, n0, mu=mu, nu=nu, T=T)
            else:
                self._crmd_plan = crmd.build_exact_crmd_plan(self.H, n0, T=T)
        else:
            raise DomainError(f"unknown temporal engine {engine!r}")
        self.paths = None

    def draw(self, sample_index: int = 0) -> np.ndarray:
        """Draw all (kappa+1)**2 mode paths for one field sample; (modes, N+1)."""
        rng = substream(self.seed, DOMAIN_FIELD, sample_index)
        N = self.time_grid.N
        if self.engine == "ce":
            z = rng.standard_normal((self.n_modes, self._ce_plan.size, 2))
            incr = circulant.ce_transform(self._ce_plan, z).real[:, :N]
            paths = circulant.increments_to_path(incr)
        else:
            z = rng.standard_normal((self.n_modes, N))
            paths = crmd.sample_crmd_paths(self._crmd_plan, z.T, self.n_modes)
        self.paths = paths
        return paths

    def coefficients(self, time_index: int) -> np.ndarray:
        """sqrt(A_l) * beta_{l,m}(t_j) for every mode, at one grid time."""
        if self.paths is None:
            raise RuntimeError("draw() must run before synthesis")
        return self._sqrt_a * self.paths[:, time_index]

    def values_at(self, directions, time_index: int) -> np.ndarray:
        """Field values at arbitrary directions (used for point statistics)."""
        from .sphere import sph_harm_row

        c = self.coefficients(time_index)
        out = np.empty(len(directions))
        for i, d in enumerate(directions):
            acc = 0.0
            pos = 0
            for ell in range(self.kappa + 1):
                row = sph_harm_row(ell, d)
                acc += float(row @ c[pos : pos + 2 * ell + 1])
                pos += 2 * ell + 1
            out[i] = acc
        return out


@dataclass(frozen=True)
class FieldFrame:
    """Field values on a latitude-longitude grid at one time."""

    t: float
    grid: SphereGrid
    values: np.ndarray = field(repr=False)


def _coeff_matrices(kappa: int, coeffs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Reshape flat mode coefficients into cos/sin matrices indexed [l, m]."""
    cc = np.zeros((kappa + 1, kappa + 1))
    cs = np.zeros((kappa + 1, kappa + 1))
    sqrt2 = math.sqrt(2.0)
    pos = 0
    for ell in range(kappa + 1):
        row = coeffs[pos : pos + 2 * ell + 1]
        cc[ell, 0] = row[ell]
        if ell:
            cc[ell, 1 : ell + 1] = sqrt2 * row[ell + 1 :]
            cs[ell, 1 : ell + 1] = sqrt2 * row[ell - 1 :: -1][:ell]
        pos += 2 * ell + 1
    return cc, cs


# Repeated synthesis on one grid reuses the Legendre tables and trig matrices;
# entries are kept only while they stay reasonably small.
_synth_cache: dict = {}
_SYNTH_CACHE_FLOATS = 16_000_000


def _synth_tables(kappa: int, grid: SphereGrid):
    key = (kappa, grid)
    hit = _synth_cache.get(key)
    if hit is not None:
        return hit
    tabs = np.stack([legendre_table(kappa, math.cos(t)) for t in grid.thetas()])
    m = np.arange(kappa + 1)
    phis = grid.phis()
    cos_m = np.cos(np.outer(m, phis))
    sin_m = np.sin(np.outer(m, phis))
    if tabs.size <= _SYNTH_CACHE_FLOATS:
        _synth_cache[key] = (tabs, cos_m, sin_m)
    return tabs, cos_m, sin_m


def synthesize_frame(sampler: QfbmSampler, time_index: int, grid: SphereGrid | None = None) -> FieldFrame:
    """Evaluate the truncated expansion on the sampler's grid at grid time j.

    Ring by ring: the Legendre table collapses the degree sums into per-order
    cosine/sine coefficients, and the longitude pass is two dense trig-matrix
    products.
    """
    grid = grid if grid is not None else sampler.grid
    kappa = sampler.kappa
    if grid.n_phi < 2 * kappa + 1:
        raise DomainError(f"n_phi = {grid.n_phi} cannot resolve orders up to kappa = {kappa}")
    cc, cs = _coeff_matrices(kappa, sampler.coefficients(time_index))
    tabs, cos_m, sin_m = _synth_tables(kappa, grid)
    a = np.einsum("ilm,lm->im", tabs, cc)
    b = np.einsum("ilm,lm->im", tabs, cs)
    values = a @ cos_m + b @ sin_m
    t = sampler.time_grid.times()[time_index]
    return FieldFrame(t=float(t), grid=grid, values=values)


# --------------------------------------------------------------------------#
# Frame export (formats consumed by the plotting package)


def _format_meta(metadata: dict) -> str:
    return "".join(f"# {k}={v}\n" for k, v in metadata.items())


def frame_csv_text(frame: FieldFrame, metadata: dict) -> str:
    """CSV serialization: metadata comments, then theta,phi,value rows."""
    lines = [_format_meta(metadata), "theta,phi,value\n"]
    thetas, phis = frame.grid.thetas(), frame.grid.phis()
    for i in range(frame.grid.n_theta):
        for j in range(frame.grid.n_phi):
            lines.append(f"{float(thetas[i])!r},{float(phis[j])!r},{float(frame.values[i, j])!r}\n")
    return "".join(lines)


def write_frame_csv(frame: FieldFrame, path, metadata: dict) -> None:
    from .io import atomic_write_text

    meta = {"n_theta": frame.grid.n_theta, "n_phi": frame.grid.n_phi, "t": repr(frame.t)}
    meta.update(metadata)
    atomic_write_text(path, frame_csv_text(frame, meta))


def write_frame_binary(frame: FieldFrame, path, metadata: dict) -> None:
    """Raw little-endian float64 values, theta-major, plus a text sidecar."""
    from .io import atomic_write_bytes, atomic_write_text

    payload = np.ascontiguousarray(frame.values, dtype="<f8").tobytes()
    meta = {
        "n_theta": frame.grid.n_theta,
        "n_phi": frame.grid.n_phi,
        "t": repr(frame.t),
        "dtype": "<f8",
        "order": "theta-major",
    }
    meta.update(metadata)
    atomic_write_bytes(path, payload)
    atomic_write_text(str(path) + ".hdr", _format_meta(meta))

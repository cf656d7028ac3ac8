"""Exact fBm increment sampling by circulant embedding.

The Toeplitz increment-covariance matrix is embedded into a circulant matrix
of size ``2N - 2`` whose eigenvalues are the DFT of its first row.  One
forward FFT of ``sqrt(lambda_k / (2N-2)) * w_k`` with complex standard normal
``w`` produces two independent exact increment vectors in the real and
imaginary parts.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, EmbeddingError
from .kernel import check_hurst, increment_cov

__all__ = [
    "CePlan",
    "build_ce_plan",
    "sample_ce_pair",
    "sample_ce_increments",
    "ce_transform",
    "increments_to_path",
]

# Eigenvalues below -NEG_EIG_TOL * gamma(0) abort; tiny negatives are clamped.
NEG_EIG_TOL = 1e-10
_IMAG_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class CePlan:
    """Precomputed circulant eigenvalues, reusable for any number of samples."""

    N: int
    H: float
    h: float
    lam: np.ndarray = field(repr=False)
    clamped: int = 0

    @property
    def size(self) -> int:
        """Length of the embedding (2N - 2)."""
        return 2 * self.N - 2

    def normals_required(self) -> tuple[int, int]:
        """Shape of the standard-normal block one pair sample consumes."""
        return (self.size, 2)


def build_ce_plan(N: int, H: float, h: float) -> CePlan:
    """Eigendecompose the circulant embedding of the increment covariance.

    The first row of the circulant matrix is
    ``[gamma(0), gamma(h), ..., gamma((N-1)h), gamma((N-2)h), ..., gamma(h)]``
    and the eigenvalues are its (unnormalized, forward) DFT.
    """
    H = check_hurst(H)
    if N < 2:
        raise DomainError(f"circulant embedding needs N >= 2, got {N}")
    if not h > 0.0:
        raise DomainError(f"step h must be positive, got {h}")
    gamma = increment_cov(np.arange(N), h, H)
    row = np.concatenate([gamma, gamma[N - 2 : 0 : -1]])
    spec = np.fft.fft(row)
    lam = spec.real.copy()
    scale = np.max(np.abs(lam))
    if np.max(np.abs(spec.imag)) > _IMAG_TOL * scale:
        raise EmbeddingError("DFT of the symmetric first row is not real")
    floor = -NEG_EIG_TOL * gamma[0]
    if np.min(lam) < floor:
        raise EmbeddingError(
            f"embedding not nonnegative definite: min eigenvalue {lam.min():.3e} "
            f"< {floor:.3e} (N={N}, H={H})"
        )
    neg = lam < 0.0
    clamped = int(np.count_nonzero(neg))
    lam[neg] = 0.0
    return CePlan(N=int(N), H=H, h=float(h), lam=lam, clamped=clamped)


def _normals(noise, shape) -> np.ndarray:
    """Resolve a Generator or pre-drawn array into normals of ``shape``."""
    if isinstance(noise, np.random.Generator):
        return noise.standard_normal(shape)
    z = np.asarray(noise, dtype=float)
    if z.shape != shape:
        raise DomainError(f"expected normals of shape {shape}, got {z.shape}")
    return z


def ce_transform(plan: CePlan, z: np.ndarray) -> np.ndarray:
    """FFT of sqrt(lam/(2N-2)) * (z[...,0] + i z[...,1]); shape (..., 2N-2)."""
    w = z[..., 0] + 1j * z[..., 1]
    return np.fft.fft(np.sqrt(plan.lam / plan.size) * w, axis=-1)


def sample_ce_pair(plan: CePlan, noise) -> tuple[np.ndarray, np.ndarray]:
    """Draw two independent exact increment vectors of length N.

    ``noise`` is either a ``numpy.random.Generator`` or an array of shape
    ``(2N-2, 2)``; column 0 feeds the real part and column 1 the imaginary
    part of the complex normal vector, i.e. the variates are consumed
    interleaved per index.
    """
    z = _normals(noise, (plan.size, 2))
    Z = ce_transform(plan, z)
    return Z.real[: plan.N].copy(), Z.imag[: plan.N].copy()


def sample_ce_increments(plan: CePlan, noise, n_pairs: int) -> np.ndarray:
    """Batched sampling: (2*n_pairs, N) increment vectors.

    Row ``2i`` is the real part and row ``2i+1`` the imaginary part of the
    i-th transformed pair, so consecutive rows are independent samples.
    """
    z = _normals(noise, (n_pairs, plan.size, 2))
    Z = ce_transform(plan, z)
    out = np.empty((2 * n_pairs, plan.N))
    out[0::2] = Z.real[:, : plan.N]
    out[1::2] = Z.imag[:, : plan.N]
    return out


def increments_to_path(incr) -> np.ndarray:
    """Cumulative sum with a leading zero: increments (..., N) -> path (..., N+1)."""
    incr = np.asarray(incr, dtype=float)
    if incr.shape[-1] == 0:
        raise DomainError("cannot build a path from an empty increment vector")
    if not np.all(np.isfinite(incr)):
        raise DomainError("increments must be finite")
    shape = incr.shape[:-1] + (incr.shape[-1] + 1,)
    path = np.zeros(shape)
    np.cumsum(incr, axis=-1, out=path[..., 1:])
    return path

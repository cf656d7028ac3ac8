"""Real spherical harmonics on S^2 and stable associated-Legendre recurrences.

The harmonics use the real orthonormal convention

    Y_{l,0}  = Nbar_{l,0},
    Y_{l,m}  = sqrt(2) * Nbar_{l,m} * cos(m*phi),   m > 0,
    Y_{l,-m} = sqrt(2) * Nbar_{l,m} * sin(m*phi),   m > 0,

where Nbar_{l,m} are the fully normalized associated Legendre functions.
Normalization is folded directly into the three-term recurrence (raw P_l^m
overflow near l ~ 150), which keeps every intermediate bounded by
sqrt((2l+1)/(4*pi)) and stable up to l of a few thousand.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError

__all__ = [
    "Direction",
    "SphereGrid",
    "geodesic_distance",
    "legendre_p",
    "legendre_p_all",
    "legendre_table",
    "real_sph_harm",
    "sph_harm_row",
    "addition_theorem_residual",
    "addition_theorem_residuals",
    "gauss_legendre_colatitudes",
]

_INV_SQRT_4PI = 0.5 / math.sqrt(math.pi)


@dataclass(frozen=True)
class Direction:
    """Point on S^2 given by colatitude theta in [0, pi], longitude phi in [0, 2*pi)."""

    theta: float
    phi: float

    def __post_init__(self):
        if not 0.0 <= self.theta <= math.pi:
            raise DomainError(f"colatitude must lie in [0, pi], got {self.theta}")
        if not 0.0 <= self.phi < 2.0 * math.pi:
            raise DomainError(f"longitude must lie in [0, 2*pi), got {self.phi}")

    def vector(self) -> np.ndarray:
        st = math.sin(self.theta)
        return np.array([st * math.cos(self.phi), st * math.sin(self.phi), math.cos(self.theta)])


@dataclass(frozen=True)
class SphereGrid:
    """Equiangular latitude-longitude product grid (synthesis/output grid)."""

    n_theta: int
    n_phi: int

    def __post_init__(self):
        if self.n_theta < 1 or self.n_phi < 1:
            raise DomainError("grid sizes must be positive")

    def thetas(self) -> np.ndarray:
        return math.pi * (np.arange(self.n_theta) + 0.5) / self.n_theta

    def phis(self) -> np.ndarray:
        return 2.0 * math.pi * np.arange(self.n_phi) / self.n_phi


def geodesic_distance(x: Direction, y: Direction) -> float:
    """Great-circle distance arccos(<x, y>) in [0, pi]."""
    dot = float(x.vector() @ y.vector())
    return math.acos(min(1.0, max(-1.0, dot)))


def legendre_p(ell: int, x):
    """Legendre polynomial P_ell(x) by the three-term recurrence."""
    return legendre_p_all(ell, x)[ell]


def legendre_p_all(lmax: int, x) -> np.ndarray:
    """P_0(x) ... P_lmax(x); scalar x gives shape (lmax+1,)."""
    if lmax < 0:
        raise DomainError(f"degree must be >= 0, got {lmax}")
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > 1.0):
        raise DomainError("Legendre argument must lie in [-1, 1]")
    out = np.empty((lmax + 1,) + x.shape)
    out[0] = 1.0
    if lmax >= 1:
        out[1] = x
    for l in range(2, lmax + 1):
        out[l] = ((2 * l - 1) * x * out[l - 1] - (l - 1) * out[l - 2]) / l
    return out


@lru_cache(maxsize=8)
def _recurrence_coeffs(lmax: int):
    """a, b coefficient tables of the normalized order recurrence."""
    l = np.arange(lmax + 1, dtype=float)[:, None]
    m = np.arange(lmax + 1, dtype=float)[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        a = np.sqrt((4.0 * l * l - 1.0) / (l * l - m * m))
        b = -np.sqrt((2.0 * l + 1.0) * ((l - 1.0) ** 2 - m * m) / ((2.0 * l - 3.0) * (l * l - m * m)))
    return a, b


def legendre_table(lmax: int, x: float) -> np.ndarray:
    """Fully normalized associated Legendre values Nbar_{l,m}(x).

    Returns an (lmax+1, lmax+1) array whose [l, m] entry is valid for
    m <= l (the upper triangle is zero).
    """
    if lmax < 0:
        raise DomainError(f"degree must be >= 0, got {lmax}")
    x = float(x)
    if abs(x) > 1.0:
        raise DomainError("argument must lie in [-1, 1]")
    s = math.sqrt(max(0.0, 1.0 - x * x))
    tab = np.zeros((lmax + 1, lmax + 1))
    tab[0, 0] = _INV_SQRT_4PI
    for m in range(1, lmax + 1):
        tab[m, m] = math.sqrt((2 * m + 1.0) / (2 * m)) * s * tab[m - 1, m - 1]
    for m in range(lmax):
        tab[m + 1, m] = math.sqrt(2 * m + 3.0) * x * tab[m, m]
    a, b = _recurrence_coeffs(lmax)
    for l in range(2, lmax + 1):
        mm = l - 1  # orders 0 .. l-2 updated vectorized
        tab[l, :mm] = a[l, :mm] * x * tab[l - 1, :mm] + b[l, :mm] * tab[l - 2, :mm]
    return tab


def real_sph_harm(ell: int, m: int, direction: Direction) -> float:
    """Real orthonormal spherical harmonic Y_{ell,m} at a direction."""
    if abs(m) > ell:
        raise DomainError(f"order |m| = {abs(m)} exceeds degree {ell}")
    return float(sph_harm_row(ell, direction)[m + ell])


def sph_harm_row(ell: int, direction: Direction) -> np.ndarray:
    """All orders of degree ell: [Y_{ell,-ell}, ..., Y_{ell,ell}]."""
    tab = legendre_table(ell, math.cos(direction.theta))
    nbar = tab[ell, : ell + 1]
    m = np.arange(1, ell + 1)
    row = np.empty(2 * ell + 1)
    row[ell] = nbar[0]
    if ell:
        row[ell + 1 :] = math.sqrt(2.0) * nbar[1:] * np.cos(m * direction.phi)
        row[ell - 1 :: -1][: ell] = math.sqrt(2.0) * nbar[1:] * np.sin(m * direction.phi)
    return row


def addition_theorem_residuals(lmax: int, x: Direction, y: Direction) -> np.ndarray:
    """|sum_m Y_{l,m}(x) Y_{l,m}(y) - (2l+1)/(4pi) P_l(cos d(x,y))| for l <= lmax."""
    tx = legendre_table(lmax, math.cos(x.theta))
    ty = legendre_table(lmax, math.cos(y.theta))
    m = np.arange(lmax + 1)
    cosd = np.cos(m * (x.phi - y.phi))
    prod = tx * ty
    lhs = prod[:, 0] + 2.0 * np.sum(prod[:, 1:] * cosd[1:], axis=1)
    ell = np.arange(lmax + 1)
    z = math.cos(geodesic_distance(x, y))
    rhs = (2.0 * ell + 1.0) * _INV_SQRT_4PI**2 * legendre_p_all(lmax, z)
    return np.abs(lhs - rhs)


def addition_theorem_residual(ell: int, x: Direction, y: Direction) -> float:
    """Addition-theorem residual for a single degree."""
    if ell < 0:
        raise DomainError(f"degree must be >= 0, got {ell}")
    return float(addition_theorem_residuals(ell, x, y)[ell])


def gauss_legendre_colatitudes(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre colatitude nodes and weights for exact quadrature tests."""
    x, w = np.polynomial.legendre.leggauss(n)
    return np.arccos(x), w

import math

import numpy as np
import pytest

from qfbm.errors import DomainError
from qfbm.sphere import (
    Direction,
    SphereGrid,
    addition_theorem_residual,
    addition_theorem_residuals,
    gauss_legendre_colatitudes,
    geodesic_distance,
    legendre_p,
    legendre_table,
    real_sph_harm,
    sph_harm_row,
)


def random_direction(rng):
    return Direction(math.acos(rng.uniform(-1, 1)), rng.uniform(0, 2 * math.pi))


def test_direction_validation_and_vector():
    d = Direction(0.5, 1.0)
    assert np.linalg.norm(d.vector()) == pytest.approx(1.0, abs=1e-14)
    with pytest.raises(DomainError):
        Direction(-0.1, 0.0)
    with pytest.raises(DomainError):
        Direction(0.5, 2 * math.pi)


def test_geodesic_distance():
    north = Direction(0.0, 0.0)
    south = Direction(math.pi, 0.0)
    x = Direction(math.pi / 2, 0.0)
    y = Direction(math.pi / 2, math.pi / 2)
    assert geodesic_distance(north, north) == 0.0
    assert geodesic_distance(north, south) == pytest.approx(math.pi, abs=1e-15)
    assert geodesic_distance(x, y) == pytest.approx(math.pi / 2, abs=1e-15)
    assert geodesic_distance(x, y) == geodesic_distance(y, x)


def test_legendre_p():
    rng = np.random.default_rng(2)
    xs = rng.uniform(-1, 1, 20)
    for ell in (0, 1, 5, 12):
        assert legendre_p(ell, 1.0) == pytest.approx(1.0, abs=1e-13)
    assert legendre_p(1, xs) == pytest.approx(xs, abs=0.0)
    # extended-precision recurrence oracle (mpmath, 50 digits)
    assert legendre_p(10, 0.3) == pytest.approx(0.251476349516015625, rel=1e-13)
    with pytest.raises(DomainError):
        legendre_p(3, 1.5)


def test_sph_harm_values():
    rng = np.random.default_rng(3)
    d = random_direction(rng)
    assert real_sph_harm(0, 0, d) == pytest.approx(0.28209479177387814, rel=1e-14)
    assert real_sph_harm(1, 0, Direction(0.0, 0.0)) == pytest.approx(
        math.sqrt(3 / (4 * math.pi)), rel=1e-14
    )
    with pytest.raises(DomainError):
        real_sph_harm(2, 3, d)


def test_sum_of_squares_matches_addition_theorem_diagonal():
    rng = np.random.default_rng(4)
    for ell in (1, 7, 50, 200):
        d = random_direction(rng)
        total = float(np.sum(sph_harm_row(ell, d) ** 2))
        assert total == pytest.approx((2 * ell + 1) / (4 * math.pi), rel=1e-11)


def test_addition_theorem_residuals():
    rng = np.random.default_rng(5)
    for _ in range(25):
        x, y = random_direction(rng), random_direction(rng)
        assert addition_theorem_residuals(200, x, y).max() <= 1e-11
    x, y = random_direction(rng), random_direction(rng)
    assert addition_theorem_residual(0, x, y) == 0.0
    assert addition_theorem_residual(50, x, y) <= 1e-11
    assert addition_theorem_residual(50, x, x) <= 1e-11


def test_no_overflow_up_to_degree_2000():
    bound = math.sqrt((2 * 2000 + 1) / (4 * math.pi))
    for theta in (1e-6, 0.3, math.pi / 2, math.pi - 1e-6):
        tab = legendre_table(2000, math.cos(theta))
        assert np.all(np.isfinite(tab))
        assert np.abs(tab).max() <= bound * (1 + 1e-12)


def test_quadrature_orthonormality():
    kappa = 32
    thetas, w = gauss_legendre_colatitudes(kappa + 2)
    n_phi = 2 * kappa + 1
    phis = 2 * math.pi * np.arange(n_phi) / n_phi
    n_modes = (kappa + 1) ** 2
    Y = np.empty((n_modes, thetas.size * n_phi))
    for it, theta in enumerate(thetas):
        cols = slice(it * n_phi, (it + 1) * n_phi)
        tab = legendre_table(kappa, math.cos(theta))
        pos = 0
        for ell in range(kappa + 1):
            m = np.arange(1, ell + 1)
            Y[pos + ell, cols] = tab[ell, 0]
            if ell:
                c = math.sqrt(2.0) * tab[ell, 1 : ell + 1]
                Y[pos + ell + 1 : pos + 2 * ell + 1, cols] = c[:, None] * np.cos(np.outer(m, phis))
                Y[pos + ell - 1 :: -1, :][:ell, cols] = c[:, None] * np.sin(np.outer(m, phis))
            pos += 2 * ell + 1
    weights = np.repeat(w, n_phi) * (2 * math.pi / n_phi)
    gram = (Y * weights) @ Y.T
    assert np.abs(gram - np.eye(n_modes)).max() <= 1e-10


def test_sphere_grid_nodes():
    g = SphereGrid(8, 16)
    assert g.thetas()[0] == pytest.approx(math.pi / 16)
    assert g.thetas()[-1] == pytest.approx(math.pi * 15 / 16)
    assert g.phis()[0] == 0.0
    with pytest.raises(DomainError):
        SphereGrid(0, 4)

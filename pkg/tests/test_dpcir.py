import numpy as np
import pytest

from slprobust.constellation import mpsk
from slprobust.dpcir import SingularGramError, dpcir_for, inv_sqrt_gram, psi


def region_samples(const, symbol, scale, count, rng, reach=5.0):
    """Points in the scaled region: vertex plus nonnegative boundary-ray moves.

    The rays at theta -+ pi/M have nonnegative inner product with both
    normals, so every sample satisfies A x >= scale*b by construction.
    """
    theta = 2 * np.pi * symbol / const.order
    half = np.pi / const.order
    e1 = np.array([np.cos(theta + half), np.sin(theta + half)])
    e2 = np.array([np.cos(theta - half), np.sin(theta - half)])
    vertex = scale * np.array([np.cos(theta), np.sin(theta)])
    t = rng.uniform(0.0, reach, size=(count, 2))
    return vertex[None, :] + t[:, :1] * e1[None, :] + t[:, 1:] * e2[None, :]


def test_descriptor_8psk_symbol0():
    # geometry oracle: normals annihilate the boundary rays and map the
    # symbol to sin(pi/M) on both hyperplanes
    d = dpcir_for(mpsk(8), 0)
    assert np.allclose(d.A[0], [0.38268, -0.92388], atol=1e-5)
    assert np.allclose(d.A[1], [0.38268, 0.92388], atol=1e-5)
    assert np.allclose(d.b, [0.38268, 0.38268], atol=1e-5)
    assert np.all(d.c == 0.0)
    upper = np.array([np.cos(np.pi / 8), np.sin(np.pi / 8)])
    lower = np.array([np.cos(-np.pi / 8), np.sin(-np.pi / 8)])
    assert abs(d.A[0] @ upper) <= 1e-12
    assert abs(d.A[1] @ lower) <= 1e-12
    assert abs(d.A[0] @ [1, 0] - np.sin(np.pi / 8)) <= 1e-12
    assert abs(d.A[1] @ [1, 0] - np.sin(np.pi / 8)) <= 1e-12


def test_descriptor_bpsk_collapses():
    d = dpcir_for(mpsk(2), 0)
    assert np.allclose(d.A[0], [1.0, 0.0], atol=1e-12)
    assert np.allclose(d.A[1], [1.0, 0.0], atol=1e-12)
    assert np.allclose(d.b, [1.0, 1.0], atol=1e-12)


def test_descriptor_qpsk():
    d = dpcir_for(mpsk(4), 0)
    r = np.sqrt(0.5)
    assert np.allclose(d.A, [[r, -r], [r, r]], atol=1e-12)
    assert np.allclose(d.b, [r, r], atol=1e-12)


def test_rows_unit_norm_and_symbol_inside():
    for order in (2, 3, 4, 8, 16):
        c = mpsk(order)
        for m in range(order):
            d = dpcir_for(c, m)
            assert np.allclose(np.linalg.norm(d.A, axis=1), 1.0, atol=1e-12)
            s = c.point_xy(m)
            assert (d.A @ s >= d.b - 1e-12).all()


def test_descriptor_bad_symbol():
    with pytest.raises(ValueError):
        dpcir_for(mpsk(4), 4)


def test_psi_values():
    d = dpcir_for(mpsk(2), 0)
    p = psi(d, sigma=1.0, gamma=4.0)
    assert np.allclose(p.value, [2.0, 2.0], atol=1e-12)
    p = psi(d, sigma=1.0, gamma=0.0)
    assert np.all(p.value == 0.0)
    # derived: sqrt(10)*sin(pi/8)
    d8 = dpcir_for(mpsk(8), 0)
    p = psi(d8, sigma=1.0, gamma=10.0)
    assert np.allclose(p.value, np.sqrt(10) * np.sin(np.pi / 8), atol=1e-5)
    assert np.allclose(p.value, [1.21014, 1.21014], atol=1e-5)


def test_psi_rejects_bad_sigma():
    d = dpcir_for(mpsk(4), 0)
    with pytest.raises(ValueError):
        psi(d, sigma=0.0, gamma=1.0)
    with pytest.raises(ValueError):
        psi(d, sigma=1.0, gamma=-1.0)


def test_inv_sqrt_gram():
    # QPSK rows are orthonormal, so the gram is the identity
    w4 = inv_sqrt_gram(dpcir_for(mpsk(4), 0))
    assert np.allclose(w4, np.eye(2), atol=1e-12)
    d8 = dpcir_for(mpsk(8), 0)
    g = d8.A @ d8.A.T
    assert np.allclose(g, [[1, -0.70711], [-0.70711, 1]], atol=1e-5)
    w8 = inv_sqrt_gram(d8)
    assert np.allclose(w8 @ g @ w8, np.eye(2), atol=1e-10)
    assert np.allclose(w8, w8.T, atol=1e-12)
    assert np.all(np.linalg.eigvalsh(w8) > 0)


def test_inv_sqrt_gram_bpsk_singular():
    with pytest.raises(SingularGramError):
        inv_sqrt_gram(dpcir_for(mpsk(2), 0))


def test_membership_implies_detection():
    rng = np.random.default_rng(3)
    for order in (3, 4, 8):
        c = mpsk(order)
        for m in range(order):
            d = dpcir_for(c, m)
            scale = 2.5  # sigma*sqrt(gamma)
            x = region_samples(c, m, scale, 10_000, rng)
            assert (x @ d.A.T >= scale * d.b[None, :] - 1e-9).all()
            dets = np.argmin(np.abs((x[:, 0] + 1j * x[:, 1])[:, None] - c.points), axis=1)
            assert (dets == m).all()


def test_scaled_vertex_on_both_hyperplanes():
    for order in (3, 4, 8):
        c = mpsk(order)
        for m in range(order):
            d = dpcir_for(c, m)
            scale = 3.7
            x = scale * c.point_xy(m)
            assert np.allclose(d.A @ x, scale * d.b, atol=1e-12)


def test_distance_preservation_sampled():
    # defining property: inter-region distances at least the scaled
    # constellation distances, checked on 1e5 random pairs per symbol pair
    rng = np.random.default_rng(4)
    c = mpsk(8)
    scale = 1.8
    pairs = [(0, 1), (0, 3), (0, 4), (2, 7)]
    for i, j in pairs:
        xi = region_samples(c, i, scale, 100_000, rng)
        xj = region_samples(c, j, scale, 100_000, rng)
        dist = np.linalg.norm(xi - xj, axis=1)
        floor = scale * abs(c.points[i] - c.points[j])
        assert (dist >= floor - 1e-9).all()


def test_rotational_covariance():
    c = mpsk(8)
    d0 = dpcir_for(c, 0)
    for m in range(8):
        dm = dpcir_for(c, m)
        th = 2 * np.pi * m / 8
        rot = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
        assert np.allclose(dm.A, d0.A @ rot.T, atol=1e-12)
        assert np.allclose(dm.b, d0.b, atol=1e-12)

import numpy as np
import pytest

from slprobust.channel import (
    UncertaintyModel,
    realize,
    sample_error_gaussian,
    sample_error_spherical,
    sample_rayleigh,
    stack_real,
    t_expand,
    unstack_complex,
)


def test_t_expand_examples():
    assert np.allclose(t_expand([1 + 2j]), [[1, -2], [2, 1]])
    assert np.allclose(t_expand([1j, 1]), [[0, 1, -1, 0], [1, 0, 0, 1]])


def test_t_expand_frobenius_identity():
    # ||T(x)||_F^2 = 2 ||x||^2: every entry appears exactly twice
    assert abs(np.linalg.norm(t_expand([1 + 2j])) - np.sqrt(10)) <= 1e-12
    rng = np.random.default_rng(0)
    for _ in range(50):
        x = rng.standard_normal(6) + 1j * rng.standard_normal(6)
        assert abs(np.linalg.norm(t_expand(x)) - np.sqrt(2) * np.linalg.norm(x)) <= 1e-12


def test_t_expand_linear():
    rng = np.random.default_rng(1)
    x = rng.standard_normal(5) + 1j * rng.standard_normal(5)
    y = rng.standard_normal(5) + 1j * rng.standard_normal(5)
    assert np.allclose(t_expand(x + y), t_expand(x) + t_expand(y), atol=1e-14)


def test_t_expand_product_compatibility():
    # T(x) [Re u; Im u] = [Re(x u); Im(x u)]; this identity is what makes
    # the row-error covariance closed form exact
    rng = np.random.default_rng(2)
    for _ in range(100):
        x = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        u = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        prod = x @ u
        got = t_expand(x) @ stack_real(u)
        assert np.allclose(got, [prod.real, prod.imag], atol=1e-12)


def test_stack_round_trip():
    rng = np.random.default_rng(3)
    u = rng.standard_normal(7) + 1j * rng.standard_normal(7)
    assert np.allclose(unstack_complex(stack_real(u)), u)


def test_rayleigh_statistics():
    rng = np.random.default_rng(4)
    h = sample_rayleigh(1_000_000, 1, rng)[0]
    assert abs(np.mean(np.abs(h) ** 2) - 1.0) <= 0.01
    assert abs(np.mean(h.real * h.imag)) <= 0.01
    # cross-user decorrelation
    h2 = sample_rayleigh(1_000_000, 2, rng)
    corr = np.vdot(h2[0], h2[1]) / 1_000_000
    assert abs(corr) <= 0.01


def test_rayleigh_deterministic():
    a = sample_rayleigh(8, 3, np.random.default_rng(5))
    b = sample_rayleigh(8, 3, np.random.default_rng(5))
    assert np.array_equal(a, b)


def test_spherical_zero_radius():
    e = sample_error_spherical(4, 0.0, np.random.default_rng(6))
    assert np.all(e == 0)


def test_spherical_bound_and_moment():
    rng = np.random.default_rng(7)
    delta = 1.3
    e = sample_error_spherical(4, delta, rng, size=1_000_000)
    fro2 = 2.0 * np.sum(np.abs(e) ** 2, axis=1)
    assert (np.sqrt(fro2) <= delta + 1e-12).all()
    # uniform-ball moment in R^(2N): E r^2 / R^2 = 2N/(2N+2) = 0.8 for N=4
    assert abs(np.mean(fro2) / delta**2 - 0.8) <= 0.005


def test_spherical_lift_bound_per_draw():
    rng = np.random.default_rng(8)
    for _ in range(200):
        e = sample_error_spherical(3, 0.7, rng)
        assert np.linalg.norm(t_expand(e)) <= 0.7 + 1e-12


def test_gaussian_statistics():
    rng = np.random.default_rng(9)
    xi = 0.1
    e = sample_error_gaussian(1, xi, rng, size=1_000_000)[:, 0]
    var = np.mean(np.abs(e) ** 2)
    assert abs(var - 2 * xi**2) <= 0.01 * 2 * xi**2
    assert abs(np.mean(e.real * e.imag)) <= 3e-5
    assert np.all(sample_error_gaussian(5, 0.0, rng) == 0)


def test_realize_identity_and_models():
    rng = np.random.default_rng(10)
    r = realize(4, 3, UncertaintyModel.none(), rng)
    assert np.array_equal(r.true, r.estimates)
    assert np.all(r.errors == 0)

    r = realize(4, 3, UncertaintyModel.spherical(0.5), rng)
    assert np.abs(r.true - (r.estimates + r.errors)).max() <= 1e-14
    assert np.abs(r.true_lifts - (r.estimate_lifts + r.error_lifts)).max() <= 1e-14
    for k in range(3):
        assert np.linalg.norm(t_expand(r.true[k] - r.estimates[k])) <= 0.5 + 1e-12

    r = realize(4, 3, UncertaintyModel.stochastic(0.1), rng)
    assert np.abs(r.true - (r.estimates + r.errors)).max() <= 1e-14


def test_model_validation():
    with pytest.raises(ValueError):
        UncertaintyModel("ball")
    with pytest.raises(ValueError):
        UncertaintyModel.spherical(-1.0)

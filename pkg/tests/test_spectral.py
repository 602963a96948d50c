import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gevrey_nse.fields import random_scalar, random_solenoidal
from gevrey_nse.oracles import brute_force_dft
from gevrey_nse.spectral import (ExponentCapError, Grid, SpectralScalar, SpectralVector, dealias,
                                 divergence, exact_product, fft3, gevrey_multiplier, gradient,
                                 hermitian_defect, high_pass, ifft3, imag_residue, leray_project,
                                 low_pass, max_divergence, pad_coeffs, strip_nyquist,
                                 transform_forward, transform_inverse, truncate_coeffs)


def test_grid_validation():
    with pytest.raises(ValueError):
        Grid(7)
    with pytest.raises(ValueError):
        Grid(2)
    with pytest.raises(ValueError):
        Grid(8, -1.0)
    assert Grid(8) == Grid(8, 2 * math.pi)
    assert Grid(8) != Grid(8, 4 * math.pi)
    assert hash(Grid(8)) == hash(Grid(8))


def test_wavenumbers_scale_with_box():
    g = Grid(8, 4 * math.pi)
    assert g.spacing == pytest.approx(0.5)
    assert sorted(g.index_1d) == list(range(-4, 4))
    assert g.kmax == pytest.approx(4 * 0.5 * math.sqrt(3))


def test_fft_matches_brute_force_dft(rng):
    x = rng.standard_normal((4, 4, 4))
    np.testing.assert_allclose(fft3(x), brute_force_dft(x), atol=1e-14)


def test_round_trip(rng, grid16):
    x = rng.standard_normal(grid16.shape)
    back = transform_inverse(transform_forward(x, grid16))
    assert np.abs(back - x).max() <= 1e-12 * np.abs(x).max()
    v = rng.standard_normal((3,) + grid16.shape)
    fv = transform_forward(v, grid16)
    assert isinstance(fv, SpectralVector)
    np.testing.assert_allclose(transform_inverse(fv), v, atol=1e-12)


def test_transform_rejects_bad_shape(grid8):
    with pytest.raises(ValueError):
        transform_forward(np.zeros((8, 8)), grid8)


def test_single_mode_coefficient(grid8):
    x, y, z = grid8.coordinates
    f = transform_forward(np.broadcast_to(np.cos(2 * x + z), grid8.shape), grid8)
    c = f.coeffs
    assert c[2, 0, 1] == pytest.approx(0.5)
    assert c[-2, 0, -1] == pytest.approx(0.5)
    assert np.count_nonzero(np.abs(c) > 1e-12) == 2


def test_real_field_is_hermitian(rng, grid8):
    f = transform_forward(rng.standard_normal(grid8.shape), grid8)
    assert hermitian_defect(f) < 1e-15
    assert imag_residue(f) < 1e-15


def test_coeffs_are_read_only(grid8):
    f = SpectralScalar(grid8, np.zeros(grid8.shape, complex))
    with pytest.raises(ValueError):
        f.coeffs[0, 0, 0] = 1


def test_strip_nyquist(rng, grid8):
    f = transform_forward(rng.standard_normal(grid8.shape), grid8)
    g = strip_nyquist(f)
    assert np.all(g.coeffs[grid8.nyquist_mask] == 0)


def test_leray_idempotent_and_solenoidal(rng, grid16):
    raw = SpectralVector(grid16, rng.standard_normal((3,) + grid16.shape) + 0j)
    p = leray_project(raw)
    assert p.divergence_free
    assert max_divergence(p) < 1e-12
    np.testing.assert_allclose(leray_project(p).coeffs, p.coeffs, atol=1e-14)


def test_leray_removes_gradients(rng, grid16):
    phi = random_scalar(grid16, rng)
    assert np.abs(leray_project(gradient(phi)).coeffs).max() < 1e-14


def test_divergence_of_gradient_is_minus_laplacian(rng, grid8):
    phi = random_scalar(grid8, rng)
    np.testing.assert_allclose(divergence(gradient(phi)).coeffs, -grid8.k2 * phi.coeffs, atol=1e-14)


@pytest.mark.parametrize("delta", [0.5, 1.0, math.sqrt(2), 2.0, 3.0, 50.0])
def test_low_high_partition_is_exact(rng, grid8, delta):
    f = random_solenoidal(grid8, rng)
    lo, hi = low_pass(f, delta), high_pass(f, delta)
    assert np.array_equal((lo + hi).coeffs, f.coeffs)
    assert not np.any((lo.coeffs != 0) & (hi.coeffs != 0))


def test_tie_goes_to_high_pass(grid8):
    c = np.zeros(grid8.shape, complex)
    c[1, 0, 0] = c[-1, 0, 0] = 1.0
    f = SpectralScalar(grid8, c)
    assert np.all(low_pass(f, 1.0).coeffs == 0)
    assert np.array_equal(high_pass(f, 1.0).coeffs, c)


def test_dealias_rule(grid16):
    m = grid16.dealias_mask
    i = grid16.index_1d
    assert m[np.flatnonzero(i == 5)[0], 0, 0]
    assert not m[np.flatnonzero(i == 6)[0], 0, 0]
    f = SpectralScalar(grid16, np.ones(grid16.shape, complex))
    assert np.array_equal(dealias(f).coeffs != 0, m)


@settings(max_examples=25, deadline=None)
@given(t1=st.floats(0, 0.5), t2=st.floats(0, 0.5), rho=st.sampled_from([0.5, 1.0]))
def test_gevrey_semigroup(t1, t2, rho):
    g = Grid(8)
    u = random_solenoidal(g, np.random.default_rng(0))
    a = gevrey_multiplier(gevrey_multiplier(u, t1, rho), t2, rho).coeffs
    b = gevrey_multiplier(u, t1 + t2, rho).coeffs
    np.testing.assert_allclose(a, b, rtol=1e-10, atol=1e-16)


def test_gevrey_rejects_negative_tau(rng, grid8):
    u = random_solenoidal(grid8, rng)
    with pytest.raises(ValueError):
        gevrey_multiplier(u, -0.3)


def test_exponent_cap(grid16):
    u = SpectralVector(grid16, np.zeros((3,) + grid16.shape, complex))
    with pytest.raises(ExponentCapError):
        gevrey_multiplier(u, 10.0)
    gevrey_multiplier(u, 10.0, cap=200.0)


def test_exact_product_matches_pointwise(rng, grid8):
    u, v = random_scalar(grid8, rng), random_scalar(grid8, rng)
    w = exact_product(u, v)
    assert w.grid.n == 16
    big = Grid(16)
    uu = ifft3(pad_coeffs(u.coeffs, 8, 16))
    vv = ifft3(pad_coeffs(v.coeffs, 8, 16))
    np.testing.assert_allclose(transform_inverse(w), (uu * vv).real, atol=1e-13)
    # the product of band-limited fields is exactly representable on the doubled grid
    assert big == w.grid


def test_pad_truncate_round_trip(rng, grid8):
    u = random_solenoidal(grid8, rng)
    np.testing.assert_allclose(truncate_coeffs(pad_coeffs(u.coeffs, 8, 16), 16, 8), u.coeffs)
    with pytest.raises(ValueError):
        pad_coeffs(u.coeffs, 8, 4)
    with pytest.raises(ValueError):
        truncate_coeffs(u.coeffs, 8, 16)


def test_multiplier_must_be_finite(grid8):
    from gevrey_nse.spectral import apply_multiplier
    f = SpectralScalar(grid8, np.ones(grid8.shape, complex))
    with pytest.raises(ValueError):
        apply_multiplier(f, lambda k: np.full(k.shape, np.inf))

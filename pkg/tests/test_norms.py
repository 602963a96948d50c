import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gevrey_nse.fields import random_scalar, random_solenoidal
from gevrey_nse.norms import (GevreyParams, NormValue, fourier_l1, gevrey_inner,
                              gevrey_sobolev_norm, l2_norm, linf_norm, oversampled_linf,
                              sobolev_inner, sobolev_norm)
from gevrey_nse.spectral import Grid, SpectralScalar, SpectralVector, transform_forward


def _single_mode(grid, index, amplitude=1.0):
    c = np.zeros(grid.shape, complex)
    c[index] = amplitude
    c[tuple(-i for i in index)] = np.conj(amplitude)
    return SpectralScalar(grid, c)


def test_norm_value_is_tagged_float():
    v = NormValue(2.0, "L2")
    assert v == 2.0 and v.kind == "L2"
    assert v + 1 == 3.0
    assert "L2" in repr(v)


def test_gevrey_params_validation():
    with pytest.raises(ValueError):
        GevreyParams(-0.1, 2.0)
    with pytest.raises(ValueError):
        GevreyParams(0.5, 1.0)


def test_plancherel(rng, grid16):
    x = rng.standard_normal(grid16.shape)
    f = transform_forward(x, grid16)
    assert float(l2_norm(f)) ** 2 == pytest.approx(np.mean(x**2), rel=1e-10)


def test_single_mode_norms():
    g = Grid(8)
    f = _single_mode(g, (2, 1, 0), 0.5)  # cos(2x + y)
    k2 = 5.0
    assert l2_norm(f) == pytest.approx(math.sqrt(0.5))
    assert sobolev_norm(f, 1.0) == pytest.approx(math.sqrt(0.5 * (1 + k2)))
    assert sobolev_norm(f, 1.0, homogeneous=True) == pytest.approx(math.sqrt(0.5 * k2))
    p = GevreyParams(0.5, 2.0, 1.0)
    expected = math.sqrt(0.5 * (1 + k2)) * math.exp(0.5 * k2**0.25)
    assert gevrey_sobolev_norm(f, p) == pytest.approx(expected, rel=1e-12)
    assert fourier_l1(f) == pytest.approx(1.0)
    assert linf_norm(f) == pytest.approx(1.0)


def test_homogeneous_ignores_mean():
    g = Grid(8)
    c = np.zeros(g.shape, complex)
    c[0, 0, 0] = 3.0
    f = SpectralScalar(g, c)
    assert sobolev_norm(f, 2.0, homogeneous=True) == 0.0
    assert sobolev_norm(f, 2.0) == pytest.approx(3.0)


def test_gevrey_with_zero_weight_is_sobolev(rng, grid8):
    u = random_solenoidal(grid8, rng)
    assert gevrey_sobolev_norm(u, GevreyParams(0.0, 2.0, 1.0)) == pytest.approx(
        float(sobolev_norm(u, 1.0)), rel=1e-14)


def test_inner_products_are_consistent(rng, grid8):
    u, v = random_solenoidal(grid8, rng), random_solenoidal(grid8, rng)
    assert sobolev_inner(u, u, 1.0).real == pytest.approx(float(sobolev_norm(u, 1.0)) ** 2)
    assert sobolev_inner(u, v, 1.0) == pytest.approx(np.conj(sobolev_inner(v, u, 1.0)))
    p = GevreyParams(0.4, 3.0, 1.0)
    assert gevrey_inner(u, u, p).real == pytest.approx(float(gevrey_sobolev_norm(u, p)) ** 2)


@settings(max_examples=30, deadline=None)
@given(s1=st.floats(0, 3), ds=st.floats(0, 2), seed=st.integers(0, 2**31))
def test_sobolev_norms_monotone_in_s(s1, ds, seed):
    u = random_solenoidal(Grid(8), np.random.default_rng(seed))
    assert sobolev_norm(u, s1) <= sobolev_norm(u, s1 + ds) * (1 + 1e-12)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**31), slope=st.floats(0, 3))
def test_linf_below_fourier_l1(seed, slope):
    f = random_scalar(Grid(8), np.random.default_rng(seed), slope)
    assert linf_norm(f) <= fourier_l1(f) * (1 + 1e-12)
    assert oversampled_linf(f) <= fourier_l1(f) * (1 + 1e-12)


def test_oversampled_linf_sees_between_nodes():
    g = Grid(8)
    # cos(3x - pi/8) never peaks on a node of the 8-point grid
    c = np.zeros(g.shape, complex)
    c[3, 0, 0] = 0.5 * np.exp(-1j * np.pi / 8)
    c[-3, 0, 0] = np.conj(c[3, 0, 0])
    f = SpectralScalar(g, c)
    assert linf_norm(f) == pytest.approx(math.cos(math.pi / 8))
    assert oversampled_linf(f, 4) == pytest.approx(1.0, abs=1e-12)


def test_vector_linf_is_euclidean():
    g = Grid(8)
    c = np.zeros((3,) + g.shape, complex)
    c[0, 0, 0, 0], c[1, 0, 0, 0] = 3.0, 4.0
    assert linf_norm(SpectralVector(g, c)) == pytest.approx(5.0)

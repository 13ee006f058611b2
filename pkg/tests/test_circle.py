import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from apbench.circle import (
    CircleGrid, GridFunction, ResolutionError, Spectrum, ap_norm, band_of,
    band_projection, convolve, dirichlet_kernel, evaluate, fejer_kernel,
    fourier_coefficients, lq_norm, partial_sum, quadrature_inner,
    spectral_inner, synthesize,
)


def random_spectrum(rng, M):
    return Spectrum(rng.normal(size=2 * M + 1) + 1j * rng.normal(size=2 * M + 1))


def test_grid_validation():
    for bad in (4, 12, 0, -8):
        with pytest.raises(ValueError):
            CircleGrid(bad)
    g = CircleGrid(16)
    assert np.all(np.diff(g.points) > 0)
    assert g.points[0] == 0 and g.points[-1] < 2 * math.pi


def test_grid_function_rejects_bad_values():
    g = CircleGrid(8)
    with pytest.raises(ValueError):
        GridFunction(g, np.ones(7))
    with pytest.raises(ValueError):
        GridFunction(g, np.array([np.nan] + [0.0] * 7))


def test_single_exponential_coefficients():
    g = CircleGrid(64)
    f = g.sample(lambda x: np.exp(3j * x))
    s = fourier_coefficients(f, 4)
    expect = np.zeros(9)
    expect[3 + 4] = 1
    assert np.allclose(s.coeffs, expect, atol=1e-14)
    one = fourier_coefficients(g.function(np.ones(64)), 2)
    assert np.allclose(one.coeffs, [0, 0, 1, 0, 0], atol=1e-15)


def test_resolution_error():
    g = CircleGrid(16)
    with pytest.raises(ResolutionError):
        fourier_coefficients(g.function(np.ones(16)), 8)
    with pytest.raises(ResolutionError):
        synthesize(Spectrum.zeros(8), g)


def test_direct_sum_matches_fft(rng):
    g = CircleGrid(64)
    f = g.function(rng.normal(size=64) + 1j * rng.normal(size=64))
    a = fourier_coefficients(f, 20, method="direct")
    b = fourier_coefficients(f, 20, method="fft")
    assert a.allclose(b, atol=1e-13)


def test_roundtrip_degree8(rng):
    g = CircleGrid(64)
    s = random_spectrum(rng, 8)
    f = synthesize(s, g)
    back = fourier_coefficients(f, 8)
    assert np.max(np.abs(back.coeffs - s.coeffs)) < 1e-12
    # synthesis agrees with pointwise evaluation of the polynomial
    assert np.allclose(f.values, evaluate(s, g.points), atol=1e-12)


def test_synthesize_basis():
    g = CircleGrid(32)
    assert np.allclose(synthesize(Spectrum.from_dict({0: 1}), g).values, 1)
    assert np.allclose(synthesize(Spectrum.from_dict({1: 1}), g).values, np.exp(1j * g.points))


@given(st.integers(0, 16), st.integers(0, 2**31 - 1))
def test_roundtrip_property(M, seed):
    rng = np.random.default_rng(seed)
    g = CircleGrid(64)
    s = random_spectrum(rng, M)
    assert fourier_coefficients(synthesize(s, g), M).allclose(s, atol=1e-11)


def test_ap_norm_examples():
    assert ap_norm(Spectrum.from_dict({5: 1j}), 3.3) == pytest.approx(1)
    s = Spectrum.from_dict({-1: 3, 2: 4})
    assert ap_norm(s, 1) == pytest.approx(7)
    assert ap_norm(s, 2) == pytest.approx(5)
    for N in (0, 3, 10):
        for p in (1, 1.5, 2, 4):
            assert ap_norm(dirichlet_kernel(N), p) == pytest.approx((2 * N + 1) ** (1 / p))
    with pytest.raises(ValueError):
        ap_norm(s, 0.5)


def test_lq_norm_examples():
    g = CircleGrid(32)
    assert lq_norm(g.function(np.full(32, -2.5)), 3) == pytest.approx(2.5)
    e = g.sample(lambda x: np.exp(1j * x))
    for q in (1, 2, 7.5):
        assert lq_norm(e, q) == pytest.approx(1)
    half = g.function((np.arange(32) < 16).astype(float))
    assert lq_norm(half, 2) == pytest.approx(math.sqrt(0.5))


def test_partial_sum():
    d3 = dirichlet_kernel(3)
    assert partial_sum(d3, 1).allclose(dirichlet_kernel(1))
    s = Spectrum.from_dict({-2: 1, 0: 5, 1: 2})
    assert partial_sum(s, 0).allclose(Spectrum.from_dict({0: 5}))
    assert partial_sum(s, s.max_freq).allclose(s)
    assert partial_sum(s, 100).allclose(s)


@given(st.integers(0, 12), st.integers(0, 12), st.integers(0, 4), st.integers(0, 2**31 - 1))
def test_partial_sum_projection_commutes(M, N, j, seed):
    s = random_spectrum(np.random.default_rng(seed), M)
    sn = partial_sum(s, N)
    assert partial_sum(sn, N).allclose(sn)
    assert partial_sum(band_projection(s, j), N).allclose(band_projection(sn, j))


def test_fejer():
    assert np.allclose(fejer_kernel(0).coeffs, [1])
    # oracle: average of Dirichlet kernels D_0, D_1, D_2
    avg = (dirichlet_kernel(0) + dirichlet_kernel(1) + dirichlet_kernel(2)) * (1 / 3)
    assert fejer_kernel(2).allclose(avg)
    assert np.allclose(fejer_kernel(2).coeffs, [1 / 3, 2 / 3, 1, 2 / 3, 1 / 3])
    g = CircleGrid(256)
    for m in range(65):
        assert synthesize(fejer_kernel(m), g).values.real.min() > -1e-10


def test_band_projection():
    e5 = Spectrum.from_dict({5: 1})
    assert band_projection(e5, 2).allclose(e5)
    e8 = Spectrum.from_dict({8: 1})
    assert band_projection(e8, 2).allclose(Spectrum.zeros(8))
    assert list(band_of([0, 1, 2, 3, 4, 7, 8, -8, 1023, 1024])) == [-1, 0, 1, 1, 2, 2, 3, 3, 9, 10]


@given(st.integers(0, 40), st.integers(0, 2**31 - 1))
def test_bands_partition(M, seed):
    s = random_spectrum(np.random.default_rng(seed), M)
    total = partial_sum(s, 0)
    masks = []
    for j in range(8):
        total = total + band_projection(s, j)
        masks.append(band_of(np.arange(1, 200)) == j)
    assert total.allclose(s)
    cover = np.sum(masks, axis=0)
    assert np.all(cover == 1)


def test_convolution():
    g = CircleGrid(64)
    rng = np.random.default_rng(3)
    f = g.function(rng.normal(size=64))
    one = g.function(np.ones(64))
    assert np.allclose(convolve(f, one).values, f.mean())
    e = g.sample(lambda x: np.exp(1j * x))
    assert np.allclose(convolve(e, e).values, e.values)
    h = g.function(rng.normal(size=64) + 1j * rng.normal(size=64))
    c = fourier_coefficients(convolve(f, h), 31)
    prod = fourier_coefficients(f, 31).coeffs * fourier_coefficients(h, 31).coeffs
    assert np.max(np.abs(c.coeffs - prod)) < 1e-10
    with pytest.raises(ValueError):
        convolve(f, CircleGrid(32).function(np.ones(32)))


def test_convolution_direct_oracle():
    g = CircleGrid(16)
    rng = np.random.default_rng(7)
    f, h = rng.normal(size=16), rng.normal(size=16)
    direct = np.array([np.mean(f * h[(j - np.arange(16)) % 16]) for j in range(16)])
    assert np.allclose(convolve(g.function(f), g.function(h)).values, direct)


def test_hausdorff_young_1000_polynomials():
    rng = np.random.default_rng(11)
    g = CircleGrid(128)
    worst = -np.inf
    for _ in range(1000):
        M = int(rng.integers(0, 40))
        s = random_spectrum(rng, M) * rng.exponential()
        p = rng.uniform(1.0001, 2.0)
        f = synthesize(s, g)
        worst = max(worst, lq_norm(f, p / (p - 1)) - ap_norm(s, p))
    assert worst <= 1e-9


@given(st.integers(0, 30), st.integers(0, 2**31 - 1))
def test_parseval(M, seed):
    s = random_spectrum(np.random.default_rng(seed), M)
    f = synthesize(s, CircleGrid(64))
    assert lq_norm(f, 2) ** 2 == pytest.approx(ap_norm(s, 2) ** 2, rel=1e-10, abs=1e-10)


def test_inner_products_agree(rng):
    g = CircleGrid(32)
    f = g.function(rng.normal(size=32))
    h = g.function(rng.normal(size=32) + 1j * rng.normal(size=32))
    assert spectral_inner(f, h) == pytest.approx(quadrature_inner(f, h), abs=1e-12)


def test_spectrum_algebra():
    a = Spectrum.from_dict({1: 1})
    b = Spectrum.from_dict({-1: 1})
    assert (a * b).allclose(Spectrum.from_dict({0: 1}))
    assert (a + 2).allclose(Spectrum.from_dict({0: 2, 1: 1}))
    assert a[5] == 0 and a[1] == 1
    assert Spectrum.from_dict({3: 0, 2: 1}).degree == 2
    with pytest.raises(ValueError):
        Spectrum(np.ones(4))

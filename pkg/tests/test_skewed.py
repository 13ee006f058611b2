import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from apbench.circle import CircleGrid, ResolutionError, Spectrum, evaluate
from apbench.measures import Interval
from apbench.skewed import (
    ScaleParams, SkewedSegment, convolve_direct, cor30_check, doubling_ratio, eta_hat,
    fb_area, fb_functional, fi, fourier_variation, in_ou, integrate_against, lemma31_check,
    majorant_check, ou_bounds, partial_sum_expansion, sai, sk_multiplier, sk_operator,
    skew_average, ssi, symmetric_segment,
)

TWO_PI = 2 * math.pi


def corners():
    return st.lists(st.floats(-3.0, 3.0), min_size=4, max_size=4, unique=True).map(sorted).filter(
        lambda v: min(np.diff(v)) > 1e-3)


# --- the trapezoid ----------------------------------------------------------------------

def test_shape_and_flags():
    eta = SkewedSegment(0, 1, 2, 3)
    assert eta.area == 2.0
    assert eta.symmetric and eta.center == 1.5 and eta.proportional
    assert np.allclose(eta(np.array([0.5, 1.5, 2.75, 3.5])), [0.5, 1.0, 0.25, 0.0])
    lop = SkewedSegment(0, 1e-4, 2, 3)
    assert not lop.symmetric and not lop.proportional
    with pytest.raises(ValueError):
        lop.center
    with pytest.raises(ValueError):
        SkewedSegment(0, 2, 1, 3)
    with pytest.raises(ValueError):
        SkewedSegment(0, 1, 2, 7)


@given(corners(), st.floats(0.01, 2.0), st.floats(0.01, 2.0))
def test_additivity_identity(v, e_gap, f_gap):
    a, b, c, d = v
    e, f = d + e_gap, d + e_gap + f_gap
    if f - a > TWO_PI:
        return
    x = np.linspace(a - 1, f + 1, 801)
    lhs = SkewedSegment(a, b, c, d)(x) + SkewedSegment(c, d, e, f)(x)
    assert np.max(np.abs(lhs - SkewedSegment(a, b, e, f)(x))) <= 1e-12


@given(corners())
def test_eta_hat_against_quadrature(v):
    eta = SkewedSegment(*v)
    x = np.linspace(eta.a, eta.d, 20001)
    for k in (0, 1, 3, 7):
        vals = eta(x) * np.exp(-1j * k * x)
        direct = np.trapezoid(vals, x) / TWO_PI
        assert abs(eta_hat(eta, np.array([k]))[0] - direct) < 1e-6


def test_primitive_totals_area():
    eta = SkewedSegment(-0.3, 0.1, 0.2, 1.0)
    assert eta.primitive(5.0) == pytest.approx(eta.area)
    assert eta.primitive(-5.0) == 0.0


# --- averages and SK ------------------------------------------------------------------

def test_average_of_constant_and_area():
    g = CircleGrid(256)
    one = g.function(np.ones(256))
    eta = SkewedSegment(0.4, 1.0, 2.0, 3.1)
    assert skew_average(eta, one) == pytest.approx(1.0)
    assert integrate_against(SkewedSegment(0, 1, 2, 3), one) == pytest.approx(2.0)


def test_integral_matches_fine_quadrature(rng):
    g = CircleGrid(128)
    f = g.function(rng.standard_normal(128))
    eta = SkewedSegment(5.0, 5.6, 6.6, 7.5)  # wraps past 2pi
    x = np.linspace(eta.a, eta.d, 400001)
    vals = f.values[np.floor(np.mod(x, TWO_PI) / g.step).astype(int) % 128] * eta(x)
    assert integrate_against(eta, f) == pytest.approx(np.trapezoid(vals, x), abs=1e-4)


def test_degenerate_ramp_is_resolution_error():
    g = CircleGrid(64)
    with pytest.raises(ResolutionError):
        integrate_against(SkewedSegment(0, g.step / 2, 1, 2), g.function(np.ones(64)))


def test_sk_constant_and_wrap_error():
    g = CircleGrid(128)
    out = sk_operator(g.function(np.ones(128)), 0.7, 0.2)
    assert np.allclose(out.values, 1.0, atol=1e-13)
    with pytest.raises(ValueError):
        sk_operator(g.function(np.ones(128)), 3.3, 0.2)
    with pytest.raises(ValueError):
        sk_operator(g.function(np.ones(128)), 0.2, 0.3)


@given(st.integers(0, 10**6), st.floats(0.1, 3.0), st.floats(0.05, 0.95))
def test_sk_two_routes_agree(seed, a, frac):
    rng = np.random.default_rng(seed)
    g = CircleGrid(512)
    b = a * frac
    if a - b < g.step:
        return
    f = g.function(rng.standard_normal(512))
    sk = sk_operator(f, a, b)
    for i in rng.integers(0, 512, 32):
        x = g.points[i]
        direct = skew_average(SkewedSegment(x - a, x - b, x + b, x + a), f)
        assert abs(sk.values[i] - direct) < 1e-8


def test_sk_eigenfunction(rng):
    g = CircleGrid(1024)
    a, b = 0.6, 0.25
    for k in (1, 5, 12):
        f = g.function(np.exp(1j * k * g.points))
        ratio = sk_operator(f, a, b).values / f.values
        assert np.ptp(ratio.real) < 1e-12 and np.ptp(ratio.imag) < 1e-12
        # cell averaging against left-endpoint samples shifts the phase by O(k h)
        assert ratio[0] == pytest.approx(sk_multiplier(a, b, [k])[0], abs=k * g.step)


# --- Fourier variation and expansion --------------------------------------------------

def test_fourier_variation_example_and_symmetry():
    eta = symmetric_segment(0.25, 0.5)
    fv = fourier_variation(eta)
    assert math.isfinite(fv.total) and fv.ratio < 10
    assert fv.tail_bound < 1e-3
    k = np.arange(1, 50)
    h = eta_hat(eta, k)
    assert np.max(np.abs(h.imag)) < 1e-15
    assert np.allclose(h, eta_hat(eta, -k))


@pytest.mark.parametrize("s", [0.5, 0.25])
def test_fourier_variation_scales_linearly(s):
    base = fourier_variation(symmetric_segment(0.3, 0.6)).total
    scaled = fourier_variation(symmetric_segment(0.3 * s, 0.6 * s), K_cut=40_000).total
    assert scaled / base == pytest.approx(s, rel=0.05)


def test_fourier_variation_needs_centered():
    with pytest.raises(ValueError):
        fourier_variation(SkewedSegment(0, 0.1, 0.2, 0.5))


def test_expansion_single_mode_and_zero():
    eta = symmetric_segment(0.2, 0.5)
    F = Spectrum.from_dict({3: 1.0})
    ex = partial_sum_expansion(eta, F, 3)
    assert ex.reconstruction[3] == pytest.approx(eta_hat(eta, [3])[0].real, abs=1e-15)
    assert ex.alphas[3:].sum() + eta_hat(eta, [ex.alphas.size])[0].real == pytest.approx(
        eta_hat(eta, [3])[0].real)
    zero = partial_sum_expansion(eta, Spectrum.zeros(4), 4)
    assert np.all(zero.reconstruction.coeffs == 0)


def test_expansion_rejects_high_degree():
    with pytest.raises(ValueError):
        partial_sum_expansion(symmetric_segment(0.2, 0.5), Spectrum.from_dict({9: 1.0}), 4)


@given(st.integers(0, 10**6))
def test_expansion_matches_direct_convolution(seed):
    rng = np.random.default_rng(seed)
    d = rng.uniform(0.2, 1.5)
    c = d * rng.uniform(0.2, 0.6)
    eta = symmetric_segment(c, d)
    F = Spectrum(rng.standard_normal(129) + 1j * rng.standard_normal(129))
    ex = partial_sum_expansion(eta, F, 64)
    x = rng.uniform(0, TWO_PI, 24)
    err = np.max(np.abs(evaluate(ex.reconstruction, x) - convolve_direct(eta, F, x)))
    assert err < 1e-6
    assert ex.ratio <= 10


# --- FB and the interval functionals --------------------------------------------------

def test_fb_zero_and_constant():
    g = CircleGrid(1024)
    zero = g.function(np.zeros(1024))
    one = g.function(np.ones(1024))
    assert fb_functional(0.05, 2.0, 1.0, 1.0, zero) == 0.0
    a, b, c = 0.05, 2.0, 0.6
    expected = fb_area(a, b, c) / a**2
    assert fb_functional(a, b, c, 1.0, one) == pytest.approx(expected, rel=1e-12)
    assert fb_functional(a, b, c, 1.0, one, n_fb=128) == pytest.approx(expected, rel=1e-12)
    # region by direct integration: c' in (0, d'), d' - c' in (a, c), d' < b/2
    D = b / 2
    w = np.linspace(a, c, 200001)
    assert fb_area(a, b, c) == pytest.approx(np.trapezoid(D - w, w), rel=1e-9)


def test_fb_empty_region():
    g = CircleGrid(64)
    with pytest.raises(ValueError):
        fb_functional(0.5, 0.4, 1.0, 0.0, g.function(np.ones(64)))


def test_fb_mesh_refinement_converges(rng):
    g = CircleGrid(1024)
    B = g.function(np.repeat(rng.standard_normal(32), 32))
    coarse = fb_functional(0.02, 2.0, 0.8, 2.0, B, n_fb=64)
    fine = fb_functional(0.02, 2.0, 0.8, 2.0, B, n_fb=128)
    assert fine == pytest.approx(coarse, rel=0.02)


def test_doubling_ratio_bounded(rng):
    g = CircleGrid(1024)
    B = g.function(np.repeat(rng.standard_normal(64), 16))
    ratios = [doubling_ratio(0.02, 3.0, c, z, B) for c in (0.2, 0.5, 1.0) for z in (0.5, 3.0)]
    assert all(1.0 <= r < 10 for r in ratios)
    with pytest.raises(ValueError):
        doubling_ratio(0.3, 3.0, 0.5, 0.0, B)


def test_interval_functionals_trivial_cases(rng):
    g = CircleGrid(2048)
    I = Interval(256, 384, 2048)
    zero = g.function(np.zeros(2048))
    one = g.function(np.ones(2048))
    B = g.function(rng.standard_normal(2048))
    assert ssi(I, zero) == 0.0 and fi(I, zero) == 0.0
    assert sai(I, one, B) == 0.0


def test_fi_constant_matches_ou_volume():
    g = CircleGrid(2048)
    I = Interval(256, 384, 2048)
    x, _, z = ou_bounds(I)
    Z = z - 2 * x
    expected = Z**4 / 24 / I.length**4
    assert fi(I, g.function(np.ones(2048)), n=24) == pytest.approx(expected, rel=0.02)


def test_in_ou_membership():
    I = Interval(256, 384, 2048)
    x, y, z = ou_bounds(I)
    r = 1.2 * x
    inside = SkewedSegment(I.lo - 0.1 * x - r, I.lo - 0.1 * x, I.hi, I.hi + r)
    assert in_ou(inside, I)
    short = SkewedSegment(I.lo - 0.5 * x, I.lo, I.hi, I.hi + r)
    assert not in_ou(short, I)
    uncovered = SkewedSegment(I.lo - r + 0.01, I.lo + 0.01, I.hi, I.hi + r)
    assert not in_ou(uncovered, I)


def test_scale_ordering_enforced():
    with pytest.raises(ValueError):
        ScaleParams(s_in=1 / 8)
    sp = ScaleParams()
    assert sp.small(600) < sp.small(400) < sp.small(300) < sp.small(200)
    assert sp.large(200) < sp.large(400) < sp.large(600)
    assert "ssi" in sp.report()


# --- inequalities with measured constants ---------------------------------------------

@given(st.integers(0, 10**6))
def test_cor30_fit(seed):
    rng = np.random.default_rng(seed)
    G = Spectrum((rng.standard_normal(33) + 1j * rng.standard_normal(33)) / (1 + np.abs(np.arange(-16, 17))))
    pts = rng.uniform(0, TWO_PI, 12)
    w = rng.random(12)
    a = rng.uniform(0.2, 1.0)
    lhs, rhs = cor30_check(G, a, a * rng.uniform(0.1, 0.9), pts, w)
    assert lhs <= 8 * rhs


def test_lemma31_fit(rng):
    g = CircleGrid(1024)
    B = g.function(np.repeat(rng.standard_normal(32), 32) * 0.5)
    A = g.function(0.3 * rng.random(1024))
    fam = [Interval(s, s + 64, 1024) for s in range(0, 1024, 128)]
    lhs, rhs, scale = lemma31_check(fam, A, B, N=32)
    assert rhs > 0 and lhs / (scale * rhs) < 10


def test_lemma35_and_lemma39_fits(rng):
    g = CircleGrid(2048)
    B = g.function(np.repeat(rng.standard_normal(64), 32))
    A = g.function(0.3 * rng.random(2048))  # far from dense everywhere
    for start in (0, 640, 1280):
        I = Interval(start, start + 128, 2048)
        s = ssi(I, B)
        assert s <= 1.0 * sai(I, A, B)
        assert I.length * fi(I, B) <= s


@pytest.mark.parametrize("u, v", [(0.2, 0.1), (0.06, 0.03), (0.03, 0.02)])
def test_majorant_holds(rng, u, v):
    g = CircleGrid(4096)
    B = g.function(np.repeat(rng.standard_normal(128), 32))
    I = Interval(1024, 1280, 4096)
    M = rng.random(256) > 0.01
    for y in (I.lo + I.length / 3, I.hi - I.length / 3):
        chk = majorant_check(B, I, M, y, u, v)
        assert chk.lhs <= 2 * chk.D


def test_majorant_sum_case_is_exact_bound(rng):
    g = CircleGrid(4096)
    B = g.function(rng.standard_normal(4096))
    I = Interval(1024, 1280, 4096)
    chk = majorant_check(B, I, np.ones(256, bool), I.lo + 0.2, 0.2, 0.1)
    assert chk.case == "sum" and chk.lhs <= chk.D + 1e-12

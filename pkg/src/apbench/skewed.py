"""Trapezoid functions on the circle and the functionals built from their averages.

A skewed segment ``eta(a, b, c, d)`` vanishes outside ``[a, d]``, equals one on
``[b, c]`` and is linear on both ramps.  Grid functions are cellwise constant,
so every average below is computed exactly through the second antiderivative
``T`` of the function:

    int f eta = (T(a) - T(b))/(b - a) + (T(d) - T(c))/(d - c).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .balanced import Antiderivatives
from .circle import (CircleGrid, GridFunction, ResolutionError, Spectrum, evaluate,
                     fourier_coefficients, lq_norm, partial_sum, synthesize)
from .measures import Interval

__all__ = [
    "SkewedSegment",
    "symmetric_segment",
    "eta_hat",
    "SecondAntiderivative",
    "integrate_against",
    "skew_average",
    "sk_operator",
    "sk_multiplier",
    "FourierVariation",
    "fourier_variation",
    "Expansion",
    "partial_sum_expansion",
    "convolve_direct",
    "ScaleParams",
    "fb_functional",
    "fb_area",
    "ssi",
    "sai",
    "fi",
    "in_ou",
    "ou_bounds",
    "doubling_ratio",
    "cor30_check",
    "lemma31_check",
    "MajorantCheck",
    "majorant_check",
]

TWO_PI = 2 * math.pi


@dataclass(frozen=True)
class SkewedSegment:
    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        if not self.a < self.b < self.c < self.d:
            raise ValueError(f"need a < b < c < d, got {(self.a, self.b, self.c, self.d)}")
        if self.d - self.a > TWO_PI * (1 + 1e-12):
            raise ValueError("support longer than the circle")

    @property
    def symmetric(self) -> bool:
        return math.isclose(self.b - self.a, self.d - self.c, rel_tol=1e-12, abs_tol=1e-15)

    @property
    def proportional(self) -> bool:
        w = self.d - self.a
        return (self.b - self.a) / w > 1e-3 and (self.d - self.c) / w > 1e-3

    @property
    def center(self) -> float:
        if not self.symmetric:
            raise ValueError("center is defined for symmetric segments only")
        return (self.b + self.c) / 2

    @property
    def area(self) -> float:
        return (self.d + self.c - self.b - self.a) / 2

    @property
    def ramp_ratio(self) -> float:
        """``(b - a)/(d - c)``."""
        return (self.b - self.a) / (self.d - self.c)

    @property
    def middle(self) -> tuple[float, float]:
        return self.b, self.c

    def _lift(self, x):
        return self.a + np.mod(np.asarray(x, dtype=float) - self.a, TWO_PI)

    def __call__(self, x):
        """Value at ``x`` read on the circle."""
        y = self._lift(x)
        up = (y - self.a) / (self.b - self.a)
        down = (self.d - y) / (self.d - self.c)
        return np.clip(np.minimum(np.minimum(up, down), 1.0), 0.0, None)

    def derivative(self, x):
        """Slope away from the four corners."""
        y = self._lift(x)
        out = np.zeros_like(y)
        out[(y > self.a) & (y < self.b)] = 1 / (self.b - self.a)
        out[(y > self.c) & (y < self.d)] = -1 / (self.d - self.c)
        return out

    def primitive(self, x):
        """``int_a^x eta`` on the line (no wrap)."""
        x = np.asarray(x, dtype=float)
        r1, r2 = self.b - self.a, self.d - self.c
        t = np.clip(x, self.a, self.b) - self.a
        out = t * t / (2 * r1)
        out = out + np.clip(x, self.b, self.c) - self.b
        s = np.clip(x, self.c, self.d) - self.c
        return out + s - s * s / (2 * r2)


def symmetric_segment(c: float, d: float, center: float = 0.0) -> SkewedSegment:
    """``eta(center - d, center - c, center + c, center + d)``."""
    return SkewedSegment(center - d, center - c, center + c, center + d)


def eta_hat(eta: SkewedSegment, k) -> np.ndarray:
    """Normalized Fourier coefficients ``(1/2pi) int eta e^{-ikx}`` in closed form."""
    k = np.asarray(k, dtype=float)
    out = np.empty(k.shape, dtype=complex)
    zero = k == 0
    out[zero] = eta.area / TWO_PI
    kk = k[~zero]
    r1, r2 = eta.b - eta.a, eta.d - eta.c
    e = lambda x: np.exp(-1j * kk * x)  # noqa: E731
    out[~zero] = -((e(eta.a) - e(eta.b)) / r1 - (e(eta.c) - e(eta.d)) / r2) / (TWO_PI * kk * kk)
    return out


class SecondAntiderivative:
    """``T`` with ``T'' = f`` for a cellwise-constant, possibly complex ``f``."""

    def __init__(self, f: GridFunction):
        self.re = Antiderivatives(f)
        vals = np.asarray(f.values)
        self.im = Antiderivatives(f.grid.function(vals.imag)) if np.iscomplexobj(vals) else None
        self.step = f.grid.step

    def T(self, x):
        out = self.re.T(x)
        return out if self.im is None else out + 1j * self.im.T(x)

    def integral(self, a, b, c, d):
        """``int f eta(a, b, c, d)``, vectorized over the corners."""
        T = self.T
        a, b, c, d = (np.asarray(v, dtype=float) for v in (a, b, c, d))
        return (T(a) - T(b)) / (b - a) + (T(d) - T(c)) / (d - c)

    def average(self, a, b, c, d):
        a, b, c, d = (np.asarray(v, dtype=float) for v in (a, b, c, d))
        return self.integral(a, b, c, d) / ((d + c - b - a) / 2)


def _check_ramps(eta: SkewedSegment, step: float):
    if min(eta.b - eta.a, eta.d - eta.c) < step:
        raise ResolutionError("a ramp is shorter than one grid cell")


def integrate_against(eta: SkewedSegment, f: GridFunction) -> complex:
    """``int f eta`` (unnormalized measure)."""
    _check_ramps(eta, f.grid.step)
    val = SecondAntiderivative(f).integral(eta.a, eta.b, eta.c, eta.d)
    return complex(val)


def skew_average(eta: SkewedSegment, f: GridFunction) -> complex:
    """``E(a, b, c, d) f = int f eta / int eta``."""
    return integrate_against(eta, f) / eta.area


def _cell_weights(eta: SkewedSegment, grid: CircleGrid) -> np.ndarray:
    """``w_m = int over [x_m - h, x_m] of eta`` (periodized)."""
    x = grid.points
    h = grid.step
    w = np.zeros(grid.n)
    for shift in (-TWO_PI, 0.0, TWO_PI):
        w += eta.primitive(x + shift) - eta.primitive(x - h + shift)
    return w


def _sk_segment(a: float, b: float) -> SkewedSegment:
    if not 0 < b < a:
        raise ValueError(f"need 0 < b < a, got a={a}, b={b}")
    if a > math.pi:
        raise ValueError(f"outer half-width {a} exceeds pi; the support would wrap onto itself")
    return SkewedSegment(-a, -b, b, a)


def sk_operator(f: GridFunction, a: float, b: float) -> GridFunction:
    """``SK_{a,b} f`` on the grid: ``x -> E(x - a, x - b, x + b, x + a) f``.

    Computed as a circular convolution of the cell values with the exact cell
    weights of ``eta(-a, -b, b, a)``.
    """
    eta = _sk_segment(a, b)
    w = _cell_weights(eta, f.grid)
    conv = np.fft.ifft(np.fft.fft(f.values) * np.fft.fft(w))
    if not np.iscomplexobj(f.values):
        conv = conv.real
    return f.grid.function(conv / eta.area)


def sk_multiplier(a: float, b: float, k) -> np.ndarray:
    """Fourier multiplier of ``SK_{a,b}`` on trigonometric polynomials, ``2pi eta_hat(k)/area``."""
    eta = _sk_segment(a, b)
    return (TWO_PI * eta_hat(eta, k) / eta.area).real


# --- Fourier variation and partial-sum expansion ---------------------------------------

@dataclass
class FourierVariation:
    total: float
    head: float
    tail_bound: float
    K_cut: int
    d: float

    @property
    def ratio(self) -> float:
        """``total / d``."""
        return self.total / self.d


def _require_centered(eta: SkewedSegment):
    if not (eta.symmetric and math.isclose(eta.center, 0.0, abs_tol=1e-12)):
        raise ValueError("expected a symmetric segment centered at 0")


def fourier_variation(eta: SkewedSegment, K_cut: int = 10_000) -> FourierVariation:
    """``sum_k |eta_hat(k+1) - eta_hat(k)|`` over ``|k| <= K_cut`` plus a certified tail.

    For a centered symmetric segment ``|eta_hat(k)| <= 1/(pi k^2 (d - c))``,
    which bounds the omitted differences by ``4/(pi (d - c) K_cut)``.
    """
    _require_centered(eta)
    k = np.arange(-K_cut - 1, K_cut + 2)
    h = eta_hat(eta, k).real
    head = float(np.sum(np.abs(np.diff(h))))
    tail = 4 / (math.pi * (eta.d - eta.c) * K_cut)
    return FourierVariation(head + tail, head, tail, K_cut, eta.d)


@dataclass
class Expansion:
    alphas: np.ndarray
    reconstruction: Spectrum
    alpha_l1: float
    d: float

    @property
    def ratio(self) -> float:
        return self.alpha_l1 / self.d


def partial_sum_expansion(eta: SkewedSegment, F: Spectrum, n: int,
                          truncation: int | None = None) -> Expansion:
    """``F * eta = sum_i alpha_i S_i(F)`` with ``alpha_i = eta_hat(i) - eta_hat(i+1)``.

    The convolution is normalized so that coefficients multiply.  Terms up to
    ``truncation`` (default ``4n``) are summed; the remainder
    ``sum_{i > N} alpha_i = eta_hat(N + 1)`` multiplies ``F`` exactly because
    ``S_i F = F`` once ``i >= deg F``.
    """
    _require_centered(eta)
    if F.degree > n:
        raise ValueError(f"degree {F.degree} exceeds n = {n}")
    N = 4 * max(n, 1) if truncation is None else truncation
    if N < n:
        raise ValueError("truncation must be at least n")
    h = eta_hat(eta, np.arange(N + 2)).real
    alphas = h[:-1] - h[1:]
    out = Spectrum.zeros(F.max_freq)
    for i in range(n):
        out = out + alphas[i] * partial_sum(F, i)
    out = out + (float(alphas[n:].sum()) + h[N + 1]) * F
    return Expansion(alphas, out, float(np.abs(alphas).sum()), eta.d)


def convolve_direct(eta: SkewedSegment, F: Spectrum, x, nodes: int | None = None) -> np.ndarray:
    """``(1/2pi) int F(x - y) eta(y) dy`` by Gauss-Legendre on the three linear pieces."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    deg = max(F.degree, 1)
    total = np.zeros(x.shape, dtype=complex)
    for lo, hi in ((eta.a, eta.b), (eta.b, eta.c), (eta.c, eta.d)):
        m = nodes or int(deg * (hi - lo) / 2) + 40
        t, w = np.polynomial.legendre.leggauss(m)
        y = 0.5 * (hi - lo) * t + 0.5 * (hi + lo)
        wy = 0.5 * (hi - lo) * w * eta(y)
        total += evaluate(F, np.subtract.outer(x, y)) @ wy
    return total / TWO_PI


# --- FB and friends ---------------------------------------------------------------------

@dataclass(frozen=True)
class ScaleParams:
    """Instantiation of the symbolic separations ``2^(+-e)``.

    ``2^(-400)`` becomes ``s_in`` and ``2^(400)`` becomes ``s_out``; other
    exponents scale geometrically, so ``2^(-e) -> s_in^(e/400)``.  The
    external skewed set needs two minimal ramps to fit inside the maximal
    total overhang, ``2 s_in^(3/4) < s_in^(1/2)``, i.e. ``s_in < 1/16``.
    """

    s_in: float = 1 / 64
    s_out: float = 8.0
    d_cap: float = math.pi / 2

    def __post_init__(self):
        if not (0 < self.s_in < 1 < self.s_out):
            raise ValueError("need 0 < s_in < 1 < s_out")
        if not 2 * self.small(300) < self.small(200):
            raise ValueError("s_in must be below 1/16 for the external skewed set to be nonempty")

    def small(self, e: float) -> float:
        return self.s_in ** (e / 400)

    def large(self, e: float) -> float:
        return self.s_out ** (e / 400)

    def report(self) -> dict:
        sym = {"ssi": 400, "sai": 600, "ou_ramp_min": 300, "ou_ramp_max": 200}
        return {name: {"symbolic": f"2^-{e}|I| .. 2^{e}|I|",
                       "instantiated": (self.small(e), self.large(e))}
                for name, e in sym.items()} | {"d_cap": self.d_cap}


def _fb_mesh(a: float, b: float, c: float, n_fb: int, d_cap: float):
    D = min(b / 2, d_cap)
    W = min(c, D)
    if not (a > 0 and W > a):
        raise ValueError(f"empty FB region for a={a}, b={b}, c={c}")
    s = (np.arange(n_fb) + 0.5) / n_fb
    w = a + (W - a) * s
    wgrid, sgrid = np.meshgrid(w, s, indexing="ij")
    dprime = wgrid + sgrid * (D - wgrid)
    weight = (W - a) / n_fb * (D - wgrid) / n_fb
    return wgrid.ravel(), dprime.ravel(), weight.ravel()


def fb_area(a: float, b: float, c: float, d_cap: float = math.pi / 2) -> float:
    """Area of ``{a < d' - c' < c, 0 < 2 d' < b, c' > 0}`` with ``d' <= d_cap``."""
    D = min(b / 2, d_cap)
    W = min(c, D)
    if W <= a:
        return 0.0
    return (D * (W - a) - (W * W - a * a) / 2)


def fb_functional(a: float, b: float, c: float, z, B: GridFunction, q: float = 3.0,
                  n_fb: int = 64, d_cap: float = math.pi / 2, _T: SecondAntiderivative | None = None):
    """``(1/a^2) int |E(z - d', z - c', z + c', z + d') B|^q dc' dd'``.

    The region is ``a < d' - c' < c``, ``0 < 2d' < b`` with ``c' > 0`` and
    ``d' <= d_cap``; it is integrated by the midpoint rule in the coordinates
    ``(d' - c', d')``.  ``z`` may be an array.
    """
    T = SecondAntiderivative(B) if _T is None else _T
    w, dp, weight = _fb_mesh(a, b, c, n_fb, d_cap)
    cp = dp - w
    z = np.asarray(z, dtype=float)
    zz = z[..., None]
    E = T.average(zz - dp, zz - cp, zz + cp, zz + dp)
    return np.sum(np.abs(E) ** q * weight, axis=-1) / (a * a)


def _z_nodes(I: Interval, n_z: int | None):
    m = I.cells if n_z is None else min(n_z, I.cells * 4)
    z = I.lo + (np.arange(m) + 0.5) * I.length / m
    cells = np.minimum(I.start + ((z - I.lo) / I.step).astype(int), I.stop - 1)
    return z, cells, I.length / m


def ssi(I: Interval, B: GridFunction, scales: ScaleParams = ScaleParams(), q: float = 3.0,
        n_fb: int = 64, n_z: int | None = 32) -> float:
    """``int_I FB(z) dz`` with inner scale ``2^-400 |I|`` and outer ``2^400 |I|``."""
    L = I.length
    z, _, dz = _z_nodes(I, n_z)
    fb = fb_functional(scales.small(400) * L, scales.large(400) * L, scales.large(400) * L,
                       z, B, q, n_fb, scales.d_cap)
    return float(np.sum(fb) * dz)


def sai(I: Interval, A: GridFunction, B: GridFunction, scales: ScaleParams = ScaleParams(),
        q: float = 3.0, n_fb: int = 64, n_z: int | None = 32) -> float:
    """``int_I FB(z) |1 - A(z)|^q dz`` at the deeper separation ``2^(+-600)``."""
    L = I.length
    z, cells, dz = _z_nodes(I, n_z)
    fb = fb_functional(scales.small(600) * L, scales.large(600) * L, scales.large(600) * L,
                       z, B, q, n_fb, scales.d_cap)
    return float(np.sum(fb * np.abs(1 - A.values[cells]) ** q) * dz)


def ou_bounds(I: Interval, scales: ScaleParams = ScaleParams()) -> tuple[float, float, float]:
    """``(x, y, z)`` of the ramp/length window: ``x <= ramps <= z`` and ``d - a <= y``."""
    L = I.length
    return scales.small(300) * L, (1 + scales.small(200)) * L, scales.small(200) * L


def in_ou(eta: SkewedSegment, I: Interval, scales: ScaleParams = ScaleParams()) -> bool:
    """Ramps in ``[x, z]``, total length at most ``y`` and ``I`` inside the middle."""
    x, y, z = ou_bounds(I, scales)
    tol = 1e-12 * max(1.0, I.length)
    r1, r2 = eta.b - eta.a, eta.d - eta.c
    return bool(x - tol <= r1 <= z + tol and x - tol <= r2 <= z + tol
                and eta.d - eta.a <= y + tol
                and eta.b <= I.lo + tol and eta.c >= I.hi - tol)


def fi(I: Interval, B: GridFunction, scales: ScaleParams = ScaleParams(), q: float = 3.0,
       n: int = 8) -> float:
    """``|I|^-4 int over OU(I) of |E(a, b, c, d) B|^q`` (4-D midpoint rule).

    Coordinates: ramps ``u, v`` in ``[x, z]`` and overhangs ``e_l, e_r >= 0``
    with ``e_l + e_r <= z - u - v``; ``b = lo - e_l``, ``c = hi + e_r``.
    """
    x, y, zb = ou_bounds(I, scales)
    if y > TWO_PI:
        raise ValueError("scale parameters push OU(I) beyond the circle")
    T = SecondAntiderivative(B)
    s = (np.arange(n) + 0.5) / n
    u, v, p, r = np.meshgrid(x + (zb - x) * s, x + (zb - x) * s, s, s, indexing="ij")
    R = zb - u - v
    ok = R > 0
    u, v, p, r, R = u[ok], v[ok], p[ok], r[ok], R[ok]
    el = R * p
    er = (R - el) * r
    jac = ((zb - x) / n) ** 2 * (R / n) * ((R - el) / n)
    b = I.lo - el
    c = I.hi + er
    E = T.average(b - u, b, c, c + v)
    return float(np.sum(np.abs(E) ** q * jac) / I.length**4)


# --- checks -----------------------------------------------------------------------------

def doubling_ratio(a: float, b: float, c: float, z: float, B: GridFunction, q: float = 3.0,
                   n_fb: int = 64) -> float:
    """``FB_{a,b,c}(z) / FB_{a,b,c/2}(z)``; needs ``2a < c``."""
    if not 2 * a < c:
        raise ValueError("doubling needs 2a < c")
    T = SecondAntiderivative(B)
    num = fb_functional(a, b, c, z, B, q, n_fb, _T=T)
    den = fb_functional(a, b, c / 2, z, B, q, n_fb, _T=T)
    return float(num / den) if den > 0 else (0.0 if num == 0 else math.inf)


def cor30_check(G: Spectrum, a: float, b: float, points, weights, q: float = 3.0,
                N: int | None = None) -> tuple[float, float]:
    """``(int |SK_{a,b} G|^q dmu, max_{n <= N} int |S_n G|^q dmu)`` for a discrete ``mu``."""
    points = np.asarray(points, dtype=float)
    weights = np.asarray(weights, dtype=float)
    mult = sk_multiplier(a, b, np.abs(G.freqs))
    sk = evaluate(Spectrum(G.coeffs * mult), points)
    lhs = float(np.sum(weights * np.abs(sk) ** q))
    N = G.degree if N is None else N
    rhs = max(float(np.sum(weights * np.abs(evaluate(partial_sum(G, n), points)) ** q))
              for n in range(N + 1))
    return lhs, rhs


def lemma31_check(intervals, A: GridFunction, B: GridFunction, scales: ScaleParams = ScaleParams(),
                  q: float = 3.0, N: int = 128, n_fb: int = 32,
                  n_z: int = 16) -> tuple[float, float, float]:
    """``(sum_I SAI(I), max_{n <= N} ||S_n(B)(1 - A)||_q^q, scale)``.

    ``scale`` is ``FB`` of the constant one at the shortest interval's scales,
    the size the symbolic constants absorb; compare ``lhs / (scale * rhs)``.
    """
    intervals = list(intervals)
    lhs = sum(sai(I, A, B, scales, q, n_fb, n_z) for I in intervals)
    L = min(I.length for I in intervals)
    a, b = scales.small(600) * L, scales.large(600) * L
    scale = fb_area(a, b, b, scales.d_cap) / a**2
    N = min(N, B.n // 2 - 1)
    spec = fourier_coefficients(B, N)
    one_minus = 1 - A.values
    rhs = 0.0
    for n in range(N + 1):
        Sn = synthesize(partial_sum(spec, n), B.grid)
        rhs = max(rhs, lq_norm(B.grid.function(Sn.values * one_minus), q) ** q)
    return float(lhs), float(rhs), float(scale)


@dataclass
class MajorantCheck:
    lhs: float
    D: float
    case: str
    n_t: int


def majorant_check(B: GridFunction, I: Interval, M_mask: np.ndarray, y: float, u: float, v: float,
                   n_t: int = 64) -> MajorantCheck:
    """Bound ``|E(y-u, y-v, y+v, y+u) B|`` by the average split majorant ``D(u, v)``.

    With ``w = u - v`` the outer trapezoid is split at a ramp ``[y+t-w/2, y+t+w/2]``
    into a sum (``v >= |I|/6``, ``|t| <= |I|/30``) or a difference (``v < |I|/6``,
    ``t`` in ``[2|I|/5, |I|/2]`` mirrored for ``y`` in the right half).  ``D``
    averages the two partial averages over ``t`` whose split centres lie in
    ``M`` (a boolean cell mask over ``I``).
    """
    if not 0 < v < u:
        raise ValueError("need 0 < v < u")
    L = I.length
    if not I.lo <= y <= I.hi:
        raise ValueError("y must lie in I")
    vals = np.asarray(B.values)
    mask = np.zeros(B.n, dtype=bool)
    mask[I.start:I.stop] = M_mask
    if y > I.lo + L / 2:
        # mirror x -> 2pi - x; cell j maps to cell n-1-j
        B = B.grid.function(vals[::-1])
        mask = mask[::-1]
        y = TWO_PI - y
    T = SecondAntiderivative(B)
    w = u - v
    lhs = float(abs(T.average(y - u, y - v, y + v, y + u)))
    if v >= L / 6:
        case, ts = "sum", np.linspace(-L / 30, L / 30, n_t)
        if not (ts[0] - w / 2 > -v and ts[-1] + w / 2 < v):
            raise ValueError("split ramp leaves the middle of the outer trapezoid")
    else:
        case, ts = "difference", np.linspace(2 * L / 5, L / 2, n_t)
        if ts[0] - w / 2 <= u:
            raise ValueError("split ramp overlaps the outer ramp; u is too large for this case")
    step = B.grid.step

    def in_M(x):
        j = np.floor(np.mod(x, TWO_PI) / step).astype(int)
        return mask[np.clip(j, 0, B.n - 1)]

    c1 = y + (ts - (u + v) / 2) / 2
    c2 = y + (ts + (u + v) / 2) / 2
    keep = in_M(c1) & in_M(c2)
    ts = ts[keep]
    if ts.size == 0:
        raise ValueError("no admissible split positions inside M")
    lo_r, hi_r = y + ts - w / 2, y + ts + w / 2
    E1 = T.average(np.full_like(ts, y - u), np.full_like(ts, y - v), lo_r, hi_r)
    if case == "sum":
        E2 = T.average(lo_r, hi_r, np.full_like(ts, y + v), np.full_like(ts, y + u))
    else:
        E2 = T.average(np.full_like(ts, y + v), np.full_like(ts, y + u), lo_r, hi_r)
    D = float(np.mean(np.abs(E1) + np.abs(E2)))
    return MajorantCheck(lhs, D, case, int(ts.size))

"""Functions on the discretized circle and their Fourier coefficients.

Conventions used throughout the package:

* the circle is [0, 2*pi) sampled at ``x_j = 2*pi*j/n``;
* ``f_hat(k) = (1/2pi) int f(t) exp(-ikt) dt``, discretized as the mean of
  ``f(x_j) exp(-ik x_j)`` over the grid;
* ``L_q`` norms and convolutions use the normalized measure ``dt/2pi``.

With these normalizations the Hausdorff-Young inequality
``||f||_{L_q} <= |f|_{A_p}`` holds with constant one.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

__all__ = [
    "ResolutionError",
    "CircleGrid",
    "GridFunction",
    "Spectrum",
    "fourier_coefficients",
    "dft_spectrum",
    "synthesize",
    "evaluate",
    "ap_norm",
    "lq_norm",
    "partial_sum",
    "dirichlet_kernel",
    "fejer_kernel",
    "band_projection",
    "band_of",
    "convolve",
    "spectral_inner",
    "quadrature_inner",
]


class ResolutionError(ValueError):
    """The requested quantity is not resolvable on the given grid."""


def _is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class CircleGrid:
    """Uniform grid ``x_j = 2*pi*j/n`` on the circle; ``n`` a power of two >= 8."""

    n_samples: int

    def __post_init__(self):
        n = self.n_samples
        if not isinstance(n, (int, np.integer)) or n < 8 or not _is_power_of_two(int(n)):
            raise ValueError(f"n_samples must be a power of two >= 8, got {n!r}")

    @property
    def n(self) -> int:
        return int(self.n_samples)

    @property
    def step(self) -> float:
        return 2 * math.pi / self.n

    @cached_property
    def points(self) -> np.ndarray:
        return self.step * np.arange(self.n)

    def function(self, values) -> "GridFunction":
        return GridFunction(self, values)

    def sample(self, func) -> "GridFunction":
        """Evaluate a vectorized callable at the grid points."""
        return GridFunction(self, func(self.points))


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Samples of a function on a :class:`CircleGrid`.

    Sample ``j`` also stands for the value on the cell ``[x_j, x_{j+1})``, so
    integrals over grid-aligned intervals are exact cell sums.
    """

    grid: CircleGrid
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values)
        if not np.iscomplexobj(vals):
            vals = vals.astype(float)
        if vals.shape != (self.grid.n,):
            raise ValueError(f"expected {self.grid.n} samples, got shape {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("grid function values must be finite")
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def n(self) -> int:
        return self.grid.n

    @property
    def real(self) -> "GridFunction":
        return GridFunction(self.grid, self.values.real)

    def mean(self):
        return self.values.mean()

    @cached_property
    def prefix(self) -> np.ndarray:
        """``prefix[i]`` is the integral over cells ``0..i-1``."""
        out = np.zeros(self.n + 1, dtype=self.values.dtype)
        np.cumsum(self.values, out=out[1:])
        return out * self.grid.step

    def integral(self, start: int, stop: int):
        """Integral over cells ``start..stop-1`` (no wrap-around)."""
        return self.prefix[stop] - self.prefix[start]

    def __add__(self, other):
        if isinstance(other, GridFunction):
            _same_grid(self, other)
            return GridFunction(self.grid, self.values + other.values)
        return GridFunction(self.grid, self.values + other)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, GridFunction):
            _same_grid(self, other)
            return GridFunction(self.grid, self.values - other.values)
        return GridFunction(self.grid, self.values - other)

    def __rsub__(self, other):
        return GridFunction(self.grid, other - self.values)

    def __mul__(self, other):
        if isinstance(other, GridFunction):
            _same_grid(self, other)
            return GridFunction(self.grid, self.values * other.values)
        return GridFunction(self.grid, self.values * other)

    __rmul__ = __mul__


def _same_grid(f: GridFunction, g: GridFunction):
    if f.grid != g.grid:
        raise ValueError(f"grid mismatch: {f.grid.n} vs {g.grid.n} samples")


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Fourier coefficients ``coeffs[k + M]`` for ``k = -M..M``."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.ndim != 1 or c.size % 2 != 1:
            raise ValueError("a spectrum needs an odd number (2M+1) of coefficients")
        if not np.all(np.isfinite(c)):
            raise ValueError("spectrum coefficients must be finite")
        c = c.copy()
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_dict(cls, terms: dict, max_freq: int | None = None) -> "Spectrum":
        """Build from ``{k: coefficient}``."""
        M = max((abs(k) for k in terms), default=0) if max_freq is None else max_freq
        c = np.zeros(2 * M + 1, dtype=complex)
        for k, v in terms.items():
            c[k + M] += v
        return cls(c)

    @classmethod
    def zeros(cls, max_freq: int) -> "Spectrum":
        return cls(np.zeros(2 * max_freq + 1, dtype=complex))

    @property
    def max_freq(self) -> int:
        return (self.coeffs.size - 1) // 2

    @property
    def freqs(self) -> np.ndarray:
        M = self.max_freq
        return np.arange(-M, M + 1)

    def __getitem__(self, k: int) -> complex:
        M = self.max_freq
        if abs(k) > M:
            return 0j
        return self.coeffs[k + M]

    @property
    def degree(self) -> int:
        """Largest ``|k|`` with a nonzero coefficient (0 for the zero spectrum)."""
        nz = np.nonzero(self.coeffs)[0]
        if nz.size == 0:
            return 0
        return int(np.max(np.abs(self.freqs[nz])))

    def padded(self, max_freq: int) -> "Spectrum":
        M = self.max_freq
        if max_freq < M:
            return Spectrum(self.coeffs[M - max_freq: M + max_freq + 1])
        c = np.zeros(2 * max_freq + 1, dtype=complex)
        c[max_freq - M: max_freq + M + 1] = self.coeffs
        return Spectrum(c)

    def _aligned(self, other: "Spectrum"):
        M = max(self.max_freq, other.max_freq)
        return self.padded(M).coeffs, other.padded(M).coeffs

    def __add__(self, other):
        if isinstance(other, Spectrum):
            a, b = self._aligned(other)
            return Spectrum(a + b)
        return self + Spectrum(np.array([other], dtype=complex))

    __radd__ = __add__

    def __neg__(self):
        return Spectrum(-self.coeffs)

    def __sub__(self, other):
        return self + (-other if isinstance(other, Spectrum) else -other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        """Scalar multiple, or the product of the two trigonometric polynomials."""
        if isinstance(other, Spectrum):
            return Spectrum(np.convolve(self.coeffs, other.coeffs))
        return Spectrum(self.coeffs * other)

    __rmul__ = __mul__

    def allclose(self, other: "Spectrum", atol: float = 1e-12) -> bool:
        a, b = self._aligned(other)
        return bool(np.allclose(a, b, rtol=0, atol=atol))


def fourier_coefficients(f: GridFunction, M: int, method: str = "fft") -> Spectrum:
    """Coefficients ``k = -M..M`` of the grid function ``f``.

    ``method="direct"`` evaluates the O(n*M) defining sum; ``"fft"`` gives the
    same numbers through ``numpy.fft``.
    """
    n = f.n
    if M < 0 or 2 * M >= n:
        raise ResolutionError(f"max_freq {M} needs fewer than n/2 = {n // 2}")
    if method == "direct":
        k = np.arange(-M, M + 1)
        phase = np.exp(-1j * np.outer(k, f.grid.points))
        return Spectrum(phase @ f.values / n)
    if method != "fft":
        raise ValueError(f"unknown method {method!r}")
    full = np.fft.fft(f.values) / n
    return Spectrum(np.concatenate([full[n - M:], full[: M + 1]]))


def dft_spectrum(f: GridFunction) -> Spectrum:
    """All resolvable coefficients, ``M = n/2 - 1`` (the Nyquist term is dropped)."""
    return fourier_coefficients(f, f.n // 2 - 1)


def synthesize(s: Spectrum, grid: CircleGrid) -> GridFunction:
    """Evaluate ``sum_k coeffs[k] exp(ikx)`` on the grid."""
    M, n = s.max_freq, grid.n
    if 2 * M >= n:
        raise ResolutionError(f"max_freq {M} needs fewer than n/2 = {n // 2}")
    full = np.zeros(n, dtype=complex)
    full[: M + 1] = s.coeffs[M:]
    if M:
        full[n - M:] = s.coeffs[:M]
    return GridFunction(grid, np.fft.ifft(full) * n)


def evaluate(s: Spectrum, x) -> np.ndarray:
    """Evaluate the trigonometric polynomial at arbitrary points ``x``."""
    x = np.asarray(x, dtype=float)
    return np.exp(1j * np.multiply.outer(x, s.freqs)) @ s.coeffs


def ap_norm(s: Spectrum, p: float) -> float:
    """``(sum_k |coeffs[k]|^p)^(1/p)``; ``p = inf`` gives the max modulus."""
    if not p >= 1:
        raise ValueError(f"A_p norm needs p >= 1, got {p}")
    a = np.abs(s.coeffs)
    if math.isinf(p):
        return float(a.max(initial=0.0))
    return float(np.sum(a ** p) ** (1.0 / p))


def lq_norm(f: GridFunction, q: float) -> float:
    """``L_q`` norm with respect to the normalized measure ``dt/2pi``."""
    if not q >= 1:
        raise ValueError(f"L_q norm needs q >= 1, got {q}")
    a = np.abs(f.values)
    top = float(a.max())
    if math.isinf(q) or top == 0.0:
        return top
    # scale by the max so large exponents do not overflow
    return top * float(np.mean((a / top) ** q) ** (1.0 / q))


def partial_sum(s: Spectrum, N: int) -> Spectrum:
    """``S_N``: zero every coefficient with ``|k| > N``."""
    if N < 0:
        raise ValueError("partial sum order must be >= 0")
    c = np.array(s.coeffs)
    c[np.abs(s.freqs) > N] = 0
    return Spectrum(c)


def dirichlet_kernel(m: int) -> Spectrum:
    """``D_m``: unit coefficients for ``|k| <= m`` (no factor 1/2)."""
    if m < 0:
        raise ValueError("kernel order must be >= 0")
    return Spectrum(np.ones(2 * m + 1))


def fejer_kernel(m: int) -> Spectrum:
    """``(D_0 + ... + D_m)/(m+1)``, coefficients ``1 - |k|/(m+1)``."""
    if m < 0:
        raise ValueError("kernel order must be >= 0")
    k = np.arange(-m, m + 1)
    return Spectrum(1 - np.abs(k) / (m + 1))


def band_of(k) -> np.ndarray:
    """Dyadic band index ``j`` with ``2^j <= |k| < 2^(j+1)``; -1 for ``k = 0``."""
    k = np.abs(np.asarray(k))
    out = np.full(k.shape, -1, dtype=int)
    nz = k > 0
    out[nz] = np.floor(np.log2(k[nz])).astype(int)
    # guard against log2 rounding at exact powers of two
    lo = np.left_shift(1, np.maximum(out, 0))
    out[nz & (lo > k)] -= 1
    out[nz & (2 * lo <= k)] += 1
    return out


def band_projection(s: Spectrum, j: int) -> Spectrum:
    """``P_j``: keep exactly the frequencies ``2^j <= |k| < 2^(j+1)``."""
    if j < 0:
        raise ValueError("band index must be >= 0")
    c = np.array(s.coeffs)
    c[band_of(s.freqs) != j] = 0
    return Spectrum(c)


def convolve(f: GridFunction, g: GridFunction) -> GridFunction:
    """Normalized circular convolution ``(1/2pi) int f(y) g(x - y) dy``."""
    _same_grid(f, g)
    n = f.n
    out = np.fft.ifft(np.fft.fft(f.values) * np.fft.fft(g.values)) / n
    if not (np.iscomplexobj(f.values) or np.iscomplexobj(g.values)):
        out = out.real
    return GridFunction(f.grid, out)


def quadrature_inner(f: GridFunction, g: GridFunction) -> complex:
    """``E(f g)``: mean of the pointwise product over the grid."""
    _same_grid(f, g)
    return complex(np.mean(f.values * g.values))


def spectral_inner(f: GridFunction, g: GridFunction) -> complex:
    """``sum_l f_hat(l) g_hat(-l)`` over the full DFT (Nyquist term included).

    Equals :func:`quadrature_inner` by discrete Parseval.
    """
    _same_grid(f, g)
    n = f.n
    fh = np.fft.fft(f.values) / n
    gh = np.fft.fft(g.values) / n
    g_neg = np.roll(gh[::-1], 1)  # g_hat(-l) at index l
    return complex(np.sum(fh * g_neg))

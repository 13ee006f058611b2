"""Almost midpoints and balanced points of difference quotients.

For a function ``T`` on a segment ``J`` the difference quotient
``G(a, b) = (T(b) - T(a)) / (b - a)`` is averaged over triangles in the
``(a, b)`` plane.  A nested search over translated triangles converges to a
point ``t0`` whose derivative ``T'(t0)`` is such an average.

Triangle coordinates are fractions of ``|J|`` measured from its left end.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np
from scipy.optimize import brentq

from .circle import GridFunction

__all__ = [
    "M_MINUS",
    "M_PLUS",
    "U_TRIANGLE",
    "Segment",
    "Antiderivatives",
    "QuotientField",
    "MidpointReport",
    "BalanceError",
    "BalancedResult",
    "almost_midpoint_check",
    "find_balanced_point",
    "circle_balanced_point",
    "triangle_nodes",
]

# vertices as (a, b) fractions of |J|
M_MINUS = ((0.0, 0.04), (0.0, 0.52), (0.48, 0.52))
M_PLUS = ((0.48, 0.52), (0.48, 1.0), (0.96, 1.0))
U_TRIANGLE = ((0.0, 0.01), (0.0, 1.0), (0.99, 1.0))
TAU_MAX = 0.48
SHRINK = 0.52


class Segment(NamedTuple):
    lo: float
    hi: float

    @property
    def length(self) -> float:
        return self.hi - self.lo

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)


class BalanceError(RuntimeError):
    """The root search for tau could not bracket the target average."""


def triangle_nodes(vertices, n: int = 48) -> np.ndarray:
    """Centroids of the ``n**2`` congruent subtriangles; equal weights.

    Returns an ``(n*n, 2)`` array.
    """
    P = np.asarray(vertices, dtype=float)
    i, j = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    up = i + j <= n - 1
    down = i + j <= n - 2
    l1 = np.concatenate([(i[up] + 1 / 3) / n, (i[down] + 2 / 3) / n])
    l2 = np.concatenate([(j[up] + 1 / 3) / n, (j[down] + 2 / 3) / n])
    l0 = 1 - l1 - l2
    return np.outer(l0, P[0]) + np.outer(l1, P[1]) + np.outer(l2, P[2])


def _triangle_area(vertices) -> float:
    (x0, y0), (x1, y1), (x2, y2) = vertices
    return 0.5 * abs((x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0))


class Antiderivatives:
    """Exact ``S = int_0^x B`` and ``T = int_0^x S`` for a grid function ``B``.

    ``B`` is read as constant on each cell ``[x_j, x_{j+1})`` and extended
    periodically, so ``S`` and ``T`` are defined on the whole real line.
    """

    def __init__(self, B: GridFunction):
        b = np.asarray(B.values.real, dtype=float)
        self.h = B.grid.step
        self.b = b
        self.n = b.size
        self.P = np.concatenate([[0.0], np.cumsum(b)]) * self.h
        self.Q = np.concatenate([[0.0], np.cumsum(self.h * self.P[:-1] + 0.5 * b * self.h**2)])
        self.S_period = self.P[-1]
        self.T_period = self.Q[-1]

    def _split(self, x):
        x = np.asarray(x, dtype=float)
        m = np.floor(x / (2 * math.pi))
        y = x - 2 * math.pi * m
        j = np.minimum((y / self.h).astype(int), self.n - 1)
        u = y - j * self.h
        return m, y, j, u

    def S(self, x):
        m, _, j, u = self._split(x)
        return m * self.S_period + self.P[j] + self.b[j] * u

    def T(self, x):
        m, y, j, u = self._split(x)
        inner = self.Q[j] + self.P[j] * u + 0.5 * self.b[j] * u**2
        full = m * self.T_period + math.pi * self.S_period * m * (m - 1)
        return full + inner + y * m * self.S_period

    def anchored(self, v: float) -> tuple[Callable, Callable]:
        """``(S_v, T_v)``: antiderivatives started at ``v`` and read on ``[v, v + 2pi)``."""
        Sv0, Tv0 = float(self.S(v)), float(self.T(v))

        def wrap(x):
            return v + np.mod(np.asarray(x, dtype=float) - v, 2 * math.pi)

        def S_v(x):
            return self.S(wrap(x)) - Sv0

        def T_v(x):
            xx = wrap(x)
            return self.T(xx) - Tv0 - Sv0 * (xx - v)

        return S_v, T_v


@dataclass
class QuotientField:
    """Difference quotients of ``T`` over ``U(J)`` with its normalized measure."""

    segment: Segment
    T: Callable
    mesh: int = 48

    def _G(self, st: np.ndarray) -> np.ndarray:
        L = self.segment.length
        a = self.segment.lo + st[:, 0] * L
        b = self.segment.lo + st[:, 1] * L
        return (self.T(b) - self.T(a)) / (b - a)

    def average(self, vertices) -> float:
        """Lebesgue mean of ``G`` over a triangle given in fractional coordinates."""
        return float(np.mean(self._G(triangle_nodes(vertices, self.mesh))))

    def samples(self) -> np.ndarray:
        """``G`` at the equal-weight nodes of ``U(J)``."""
        return self._G(triangle_nodes(U_TRIANGLE, self.mesh))

    def measure_of(self, vertices) -> float:
        return _triangle_area(vertices) / _triangle_area(U_TRIANGLE)


@dataclass
class MidpointReport:
    worst_ratio: float
    t_worst: float
    c: float

    @property
    def passed(self) -> bool:
        return self.worst_ratio >= self.c * (1 - 1e-6)


def almost_midpoint_check(qf: QuotientField, y: float, q1: float, c: float,
                          n_t: int = 401) -> MidpointReport:
    """Test ``int |G - t|^q1 dmu >= c |y - t|^q1`` on a grid of ``t``.

    The ``t`` grid spans ``[min G - range, max G + range]`` and always contains
    ``y`` itself; the reported ratio is the minimum over ``t != y``.
    """
    if q1 < 1 or c <= 0:
        raise ValueError("need q1 >= 1 and c > 0")
    G = qf.samples()
    lo, hi = float(G.min()), float(G.max())
    span = max(hi - lo, abs(y - 0.5 * (lo + hi)), 1e-6 * max(1.0, abs(y)))
    ts = np.linspace(min(lo, y) - span, max(hi, y) + span, n_t)
    ts = ts[np.abs(ts - y) > 1e-12 * span]
    lhs = np.mean(np.abs(G[None, :] - ts[:, None]) ** q1, axis=1)
    ratio = lhs / np.abs(y - ts) ** q1
    k = int(np.argmin(ratio))
    return MidpointReport(float(ratio[k]), float(ts[k]), c)


@dataclass
class BalancedResult:
    t0: float
    chain: list[Segment]
    taus: list[float]
    ys: list[float]
    derivative: float
    tol: float
    midpoint_ratios: list[float] = field(default_factory=list)

    @property
    def y_final(self) -> float:
        return self.ys[-1]

    @property
    def residual(self) -> float:
        return abs(self.derivative - self.y_final)


def _shifted(vertices, tau: float):
    return tuple((a + tau, b + tau) for a, b in vertices)


def _solve_tau(qf: QuotientField, target: float, xtol: float) -> float:
    f = lambda tau: qf.average(_shifted(M_MINUS, tau)) - target  # noqa: E731
    f0, f1 = f(0.0), f(TAU_MAX)
    scale = max(abs(f0), abs(f1), 1e-300)
    if abs(f1 - f0) <= 1e-13 * max(1.0, abs(target)):
        return 0.5 * TAU_MAX  # G flat across the window, every tau works
    if f0 * f1 > 0:
        if min(abs(f0), abs(f1)) <= 1e-9 * scale:
            return 0.0 if abs(f0) < abs(f1) else TAU_MAX
        raise BalanceError(f"no sign change: Y(0)-Y={f0:.3e}, Y(0.48)-Y={f1:.3e}")
    if f0 == 0:
        return 0.0
    if f1 == 0:
        return TAU_MAX
    return brentq(f, 0.0, TAU_MAX, xtol=xtol)


def find_balanced_point(T: Callable, segment, q1: float = 2.0, resolution: float | None = None,
                        mesh: int = 48, dT: Callable | None = None,
                        check_midpoints: bool = False) -> BalancedResult:
    """Nested-triangle search for a balanced point of ``T`` on ``segment``.

    At each level the means ``Y_-`` and ``Y_+`` over the two corner triangles
    are computed, the translate ``M_tau`` whose mean equals ``(Y_- + Y_+)/2``
    is found by bisection, and the next segment is its projection
    ``[tau, tau + 0.52]`` (in units of the current length).  Iteration stops
    once the segment is at most ``2 * resolution`` long.

    Parameters
    ----------
    T : callable
        Vectorized function on the real line.
    segment : pair of floats
        ``(lo, hi)`` with ``lo < hi``.
    q1 : float
        Exponent for the optional almost-midpoint checks.
    resolution : float, optional
        Grid step; defaults to ``|segment| / 1024``.
    dT : callable, optional
        Exact derivative of ``T``; otherwise a central difference is used.
    check_midpoints : bool
        Record the almost-midpoint ratio of each level's ``Y``.
    """
    J = Segment(float(segment[0]), float(segment[1]))
    if not J.hi > J.lo:
        raise ValueError("segment must have positive length")
    res = J.length / 1024 if resolution is None else float(resolution)
    chain, taus, ys, ratios = [J], [], [], []
    for attempt_mesh in (mesh, 2 * mesh):
        chain, taus, ys, ratios = [J], [], [], []
        try:
            cur = J
            while True:
                qf = QuotientField(cur, T, attempt_mesh)
                y = 0.5 * (qf.average(M_MINUS) + qf.average(M_PLUS))
                ys.append(y)
                if check_midpoints:
                    ratios.append(almost_midpoint_check(qf, y, q1, 0.25).worst_ratio)
                if cur.length <= 2 * res:
                    break
                tau = _solve_tau(qf, y, xtol=1e-3)
                taus.append(tau)
                lo = cur.lo + tau * cur.length
                cur = Segment(lo, lo + SHRINK * cur.length)
                chain.append(cur)
            break
        except BalanceError:
            if attempt_mesh != mesh:
                raise
    final = chain[-1]
    t0 = final.mid
    if dT is None:
        eps = 0.25 * final.length  # truncation error stays far below tol
        deriv = float((T(t0 + eps) - T(t0 - eps)) / (2 * eps))
    else:
        deriv = float(dT(t0))
    # T' varies by at most Lip(T')*|J| over the final segment
    xs = np.linspace(final.lo, final.hi, 9)
    d1 = np.diff(T(xs)) / np.diff(xs)
    lip = float(np.max(np.abs(np.diff(d1))) / (xs[1] - xs[0])) if xs.size > 2 else 0.0
    tol = max(lip, 1.0) * final.length + 1e-9 * max(1.0, abs(deriv))
    return BalancedResult(t0, chain, taus, ys, deriv, tol, ratios)


@dataclass
class CircleBalanced:
    point: float
    window: Segment
    anchor: float
    result: BalancedResult
    anchor_shift: float | None = None


def circle_balanced_point(B: GridFunction, segment, c: float | None = None,
                          anchor: float | None = None, second_anchor: bool = True,
                          mesh: int = 48) -> CircleBalanced:
    """A ``c``-balanced point inside ``segment`` for the second antiderivative of ``B``.

    The search window is centered in ``segment`` with length ``0.99 * min(c, |segment|)``,
    so ``c/100 < |window| < c``.  ``T`` is anchored at a point ``v`` outside
    the window; with ``second_anchor`` the search is repeated from another
    anchor and the displacement recorded in ``anchor_shift``.
    """
    lo, hi = float(segment[0]), float(segment[1])
    length = hi - lo
    if c is None:
        c = length
    if not 0 < length < 2 * math.pi:
        raise ValueError("segment must be a proper arc of the circle")
    w = 0.99 * min(c, length)
    mid = 0.5 * (lo + hi)
    window = Segment(mid - w / 2, mid + w / 2)
    gap = 2 * math.pi - w
    v = window.lo - 0.5 * gap if anchor is None else float(anchor)
    if 0 <= np.mod(v - window.lo, 2 * math.pi) < w:
        raise ValueError("anchor must lie outside the window")
    anti = Antiderivatives(B)
    S_v, T_v = anti.anchored(v)
    h = B.grid.step
    res = find_balanced_point(T_v, window, resolution=h, mesh=mesh, dT=S_v)
    shift = None
    if second_anchor:
        v2 = window.hi + 0.25 * gap
        S2, T2 = anti.anchored(v2)
        other = find_balanced_point(T2, window, resolution=h, mesh=mesh, dT=S2)
        shift = abs(other.t0 - res.t0)
    return CircleBalanced(float(np.mod(res.t0, 2 * math.pi)), window, v, res, shift)

"""Interval functionals of a real function A on the grid.

All suprema run over grid-aligned subintervals, so they approximate the
continuum quantities from below.  ``A`` is always the real part of the
function passed in.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .circle import CircleGrid, GridFunction, ResolutionError

__all__ = [
    "Interval",
    "ia_weight",
    "a0_measure",
    "a0_family",
    "a0_cells",
    "a0_partitions_bruteforce",
    "a0_families_bruteforce",
    "discrepancy",
    "discrepancy_cells",
    "Discrepancy",
    "mean_on",
]

_TIE = 1e-12


@dataclass(frozen=True, order=True)
class Interval:
    """Grid-aligned arc ``[2*pi*start/n, 2*pi*stop/n)``, ``0 <= start < stop <= n``."""

    start: int
    stop: int
    n: int

    def __post_init__(self):
        if not (0 <= self.start < self.stop <= self.n):
            raise ValueError(f"bad interval cells [{self.start}, {self.stop}) on n={self.n}")

    @classmethod
    def full(cls, grid: CircleGrid) -> "Interval":
        return cls(0, grid.n, grid.n)

    @classmethod
    def from_angles(cls, lo: float, hi: float, n: int) -> "Interval":
        """Snap ``[lo, hi)`` to the nearest grid points."""
        h = 2 * math.pi / n
        return cls(int(round(lo / h)), int(round(hi / h)), n)

    @property
    def cells(self) -> int:
        return self.stop - self.start

    @property
    def step(self) -> float:
        return 2 * math.pi / self.n

    @property
    def lo(self) -> float:
        return self.start * self.step

    @property
    def hi(self) -> float:
        return self.stop * self.step

    @property
    def length(self) -> float:
        return self.cells * self.step

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def sub(self, start: int, stop: int) -> "Interval":
        return Interval(start, stop, self.n)

    def halves(self) -> tuple["Interval", "Interval"]:
        m = self.start + self.cells // 2
        return self.sub(self.start, m), self.sub(m, self.stop)

    def contains(self, other: "Interval") -> bool:
        return self.start <= other.start and other.stop <= self.stop

    def overlaps(self, other: "Interval") -> bool:
        return self.start < other.stop and other.start < self.stop

    def __str__(self):
        return f"[{self.start},{self.stop})/{self.n}"


def _real(A: GridFunction) -> GridFunction:
    return A.real if np.iscomplexobj(A.values) else A


def mean_on(I: Interval, f: GridFunction) -> float:
    """``E_I f`` for a grid-aligned interval."""
    return f.integral(I.start, I.stop) / I.length


def ia_weight(I: Interval, A: GridFunction) -> float:
    """``IA(I) = min(|I|, |int_I Re A|)``."""
    return float(min(I.length, abs(_real(A).integral(I.start, I.stop))))


def a0_cells(vals: np.ndarray, h: float, return_family: bool = False):
    """A0-measure of the run of cells ``vals`` (cell width ``h``) by dynamic programming.

    ``best[j]`` is the optimum over families inside the first ``j`` cells.
    Ties prefer fewer intervals, then the leftmost cut.  The returned value is
    the exact maximum; the family attains it to within ``m * 1e-12``.
    """
    m = len(vals)
    pre = np.concatenate([[0.0], np.cumsum(np.asarray(vals, dtype=float))]) * h
    best = np.zeros(m + 1)
    count = np.zeros(m + 1, dtype=int)
    back = np.full(m + 1, -1, dtype=int)  # -1: cell j-1 left uncovered
    for j in range(1, m + 1):
        i = np.arange(j)
        w = np.minimum((j - i) * h, np.abs(pre[j] - pre[i]))
        cand = best[:j] + w
        top = cand.max()
        if best[j - 1] >= top - _TIE:
            # leaving the cell uncovered never adds an interval, so it wins ties
            best[j], count[j], back[j] = top if top > best[j - 1] else best[j - 1], count[j - 1], -1
            continue
        tied = np.nonzero(cand >= top - _TIE)[0]
        c = count[tied] + 1
        k = tied[np.argmin(c)]  # argmin returns the first, i.e. leftmost, cut
        best[j], count[j], back[j] = top, count[k] + 1, k
    if not return_family:
        return float(best[m])
    fam, j = [], m
    while j > 0:
        if back[j] < 0:
            j -= 1
        else:
            fam.append((int(back[j]), j))
            j = int(back[j])
    return float(best[m]), fam[::-1]


def a0_measure(I: Interval, A: GridFunction) -> float:
    """Supremum of ``sum IA(I_i)`` over disjoint grid-aligned families in ``I``."""
    vals = _real(A).values[I.start:I.stop]
    return a0_cells(vals, I.step)


def a0_family(I: Interval, A: GridFunction) -> tuple[float, list[Interval]]:
    """A0-measure together with an optimal family of subintervals."""
    vals = _real(A).values[I.start:I.stop]
    value, fam = a0_cells(vals, I.step, return_family=True)
    return value, [I.sub(I.start + a, I.start + b) for a, b in fam]


def a0_partitions_bruteforce(vals, h: float) -> float:
    """Oracle: maximum of ``sum IA`` over all ``2^(m-1)`` partitions into runs.

    Gaps can be absorbed into a partition because ``IA >= 0``, so this equals
    the supremum over disjoint families.
    """
    vals = np.asarray(vals, dtype=float)
    m = len(vals)
    pre = np.concatenate([[0.0], np.cumsum(vals)]) * h
    best = 0.0
    for mask in range(1 << (m - 1)):
        cuts = [0] + [c + 1 for c in range(m - 1) if mask >> c & 1] + [m]
        tot = sum(min((b - a) * h, abs(pre[b] - pre[a])) for a, b in zip(cuts, cuts[1:]))
        best = max(best, tot)
    return best


def a0_families_bruteforce(vals, h: float) -> float:
    """Oracle: literal enumeration of every disjoint family (small ``m`` only)."""
    vals = np.asarray(vals, dtype=float)
    m = len(vals)
    pre = np.concatenate([[0.0], np.cumsum(vals)]) * h
    intervals = [(a, b) for a in range(m) for b in range(a + 1, m + 1)]
    best = 0.0

    def rec(pos: int, total: float):
        nonlocal best
        best = max(best, total)
        for a, b in intervals:
            if a >= pos:
                rec(b, total + min((b - a) * h, abs(pre[b] - pre[a])))

    rec(0, 0.0)
    return best


@dataclass(frozen=True)
class Discrepancy:
    value: float
    sub: Interval  # shortest maximizing subinterval, leftmost among ties


def discrepancy_cells(vals: np.ndarray, t: float) -> tuple[float, int, int]:
    """Discrepancy of a run of cells; returns ``(value, start, stop)`` offsets."""
    if not 0 < t < 1:
        raise ValueError(f"discrepancy parameter must lie in (0, 1), got {t}")
    vals = np.asarray(vals, dtype=float)
    m = len(vals)
    lmin = max(1, math.ceil(t * m - 1e-9))
    if lmin > m:
        raise ResolutionError("no admissible subinterval on this grid")
    pre = np.concatenate([[0.0], np.cumsum(vals)])
    total_mean = pre[m] / m
    best, arg = -1.0, (0, m)
    for ell in range(lmin, m + 1):
        dev = np.abs((pre[ell:] - pre[:-ell]) / ell - total_mean)
        k = int(np.argmax(dev))
        if dev[k] > best + _TIE:
            best, arg = float(dev[k]), (k, k + ell)
    return best, arg[0], arg[1]


def discrepancy(I: Interval, A: GridFunction, t: float) -> Discrepancy:
    """``DA(I, t) = max |E_{I1} A - E_I A|`` over subintervals with ``|I1| >= t|I|``."""
    vals = _real(A).values[I.start:I.stop]
    value, a, b = discrepancy_cells(vals, t)
    return Discrepancy(value, I.sub(I.start + a, I.start + b))


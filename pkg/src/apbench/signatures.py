"""Euclidean-style decomposition of a pair of weighted indicators.

A quadruple ``(l, r, L, R)`` with ``lL = rR`` describes the pair
``l chi[0, L)`` and ``r chi[0, R)``.  A signature ``(len, w, ls, rs)`` places
the same weighted unit of length ``len`` at ``ls`` on the left and at ``rs`` on
the right.  Indicators are half-open throughout.
"""
from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

__all__ = [
    "Quadruple",
    "Signature",
    "FiveTuple",
    "h_step",
    "Decomposition",
    "decompose",
    "residuals",
    "refine_signatures",
    "sigfinal",
    "SigfinalCheck",
    "reconstruct_trapezoid",
    "check_sigfinal",
    "derivative_residual_l1",
    "signatures_to_csv",
    "signatures_from_csv",
    "DEFAULT_EPS",
    "ITERATION_CAP",
]

log = logging.getLogger(__name__)

DEFAULT_EPS = 1e-4
ITERATION_CAP = 10**6
_REL = 1e-12


def _balanced(l, r, L, R) -> bool:
    """``lL = rR``, exactly for fractions and up to ``1e-12 (l + r)(L + R)`` otherwise."""
    if all(isinstance(v, (int, Fraction)) for v in (l, r, L, R)):
        return l * L == r * R
    return abs(l * L - r * R) <= _REL * (l + r) * (L + R)


@dataclass(frozen=True)
class Quadruple:
    l: float | Fraction
    r: float | Fraction
    L: float | Fraction
    R: float | Fraction

    def __post_init__(self):
        if min(self.l, self.r, self.L, self.R) < 0:
            raise ValueError("quadruple entries must be nonnegative")
        if not _balanced(self.l, self.r, self.L, self.R):
            raise ValueError(f"need lL = rR, got {self.l * self.L} vs {self.r * self.R}")


@dataclass(frozen=True)
class Signature:
    len: float | Fraction
    w: float | Fraction
    ls: float | Fraction
    rs: float | Fraction

    def __post_init__(self):
        if not self.len > 0:
            raise ValueError("signature length must be positive")
        if self.ls < 0 or self.rs < 0:
            raise ValueError("signature starts must be nonnegative")

    def swapped(self) -> "Signature":
        return Signature(self.len, self.w, self.rs, self.ls)


@dataclass(frozen=True)
class FiveTuple:
    alpha: float
    ac: float
    bc: float
    cc: float
    dc: float


def h_step(T: Quadruple) -> Quadruple:
    """Swap when ``L < R``; otherwise subtract: ``(l, r - l, L - R, R)``."""
    l, r, L, R = T.l, T.r, T.L, T.R
    if L < R:
        return Quadruple(r, l, R, L)
    diff = r - l
    if diff < 0:
        if isinstance(diff, Fraction) or -diff > _REL * max(r, l):
            raise ValueError(f"invalid state: r < l with L >= R in {T}")
        diff = 0.0  # rounding only
    if not _balanced(l, diff, L - R, R):
        # long float orbits drift; l (L - R)/R equals r - l in exact arithmetic
        diff = l * (L - R) / R
    return Quadruple(l, diff, L - R, R)


@dataclass
class Decomposition:
    quadruple: Quadruple
    eps: float
    columns: tuple  # (len, w, ls, rs) sequences
    iterations: int
    completed: bool
    final: Quadruple
    residual_left: float = math.nan
    residual_right: float = math.nan

    @property
    def signatures(self) -> list[Signature]:
        if not hasattr(self, "_sigs"):
            self._sigs = [Signature(*row) for row in zip(*self.columns)]
        return self._sigs

    def __iter__(self):
        return iter(self.signatures)

    def __len__(self):
        return len(self.columns[0])

    @property
    def weight(self) -> float:
        return float(sum(abs(float(w)) for w in self.columns[1]))


def _done(T: Quadruple, eps) -> bool:
    return T.l == 0 or T.r == 0 or T.L == 0 or T.R == 0 or (T.l < eps and T.r < eps)


def decompose(T: Quadruple, eps: float = DEFAULT_EPS, cap: int = ITERATION_CAP,
              check: bool = True) -> Decomposition:
    """Iterate ``h_step`` until both weights fall below ``eps`` (or a zero appears),
    emitting the signature ``(R, l, L - R, 0)`` at each subtract step.

    A signature emitted after an odd number of swaps has its starts exchanged.
    Runs of subtract steps are taken in one batch; the emitted signatures and
    the step count are the same as stepping one at a time.  If ``cap`` steps
    pass first, the partial result is returned with ``completed=False``.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    exact = all(isinstance(v, (int, Fraction)) for v in (T.l, T.r, T.L, T.R))
    cols: tuple[list, list, list, list] = ([], [], [], [])
    cur, swaps, it = T, 0, 0
    len_scale = float(T.L + T.R)
    while not _done(cur, eps) and it < cap:
        if cur.L < cur.R:
            swaps += 1
            cur = h_step(cur)
            it += 1
            continue
        l, r, L, R = cur.l, cur.r, cur.L, cur.R
        k = max(1, int(L // R))
        if l < eps:
            k = min(k, int((r - eps) // l) + 1)
        k = max(1, min(k, cap - it))
        if exact:
            starts = [L - (j + 1) * R for j in range(k)]
            zeros = [Fraction(0)] * k
        else:
            starts = [max(float(x), 0.0) for x in L - R * np.arange(1, k + 1)]
            zeros = [0.0] * k
        lefts, rights = (zeros, starts) if swaps % 2 else (starts, zeros)
        cols[0].extend([R] * k)
        cols[1].extend([l] * k)
        cols[2].extend(lefts)
        cols[3].extend(rights)
        newL = L - k * R
        newr = r - k * l
        if not exact:
            # round-off below the initial scale stands for an exact zero
            if newL <= _REL * len_scale:
                newL = 0.0
            if newr < 0 or not _balanced(l, newr, newL, R):
                # l (L - kR)/R equals r - kl in exact arithmetic
                newr = l * newL / R
        cur = Quadruple(l, newr, newL, R)
        it += k
    completed = _done(cur, eps)
    if not completed:
        log.warning("decomposition of %s stopped at the iteration cap %d", T, cap)
    out = Decomposition(T, eps, cols, it, completed, cur)
    if check:
        out.residual_left, out.residual_right = residuals(T, out)
    log.debug("decomposed %s in %d steps, %d signatures", T, it, len(out))
    return out


def _columns(sigs):
    if isinstance(sigs, Decomposition):
        return tuple(np.asarray([float(x) for x in c], dtype=float) for c in sigs.columns)
    sigs = list(sigs)
    return tuple(np.asarray([float(getattr(s, f)) for s in sigs], dtype=float)
                 for f in ("len", "w", "ls", "rs"))


def _sweep_sup(weight: float, length: float, w, starts, lens, grid: np.ndarray) -> float:
    """Sup of ``|weight chi[0, length) - sum w chi[s, s + len)|`` over breakpoints and ``grid``."""
    pos = np.concatenate([[0.0, length], starts, starts + lens])
    delta = np.concatenate([[weight, -weight], -w, w])
    order = np.argsort(pos, kind="stable")
    pos, delta = pos[order], delta[order]
    # breakpoints closer than the round-off scale are the same point
    tol = _REL * max(1.0, float(np.max(np.abs(pos))))
    first = np.r_[True, np.diff(pos) > tol]
    idx = np.flatnonzero(first)
    brk = pos[idx]
    csum = np.cumsum(delta)
    last = np.r_[idx[1:] - 1, len(pos) - 1]
    vals = csum[last]  # value on [brk_i, brk_{i+1})
    sup = float(np.max(np.abs(vals), initial=0.0))
    if grid.size:
        j = np.searchsorted(brk, grid, side="right") - 1
        on = np.where(j >= 0, vals[np.clip(j, 0, None)], 0.0)
        sup = max(sup, float(np.max(np.abs(on))))
    return sup


def residuals(T: Quadruple, sigs, n_grid: int = 1000) -> tuple[float, float]:
    """Sup over ``t`` of both reconstruction errors.

    The errors are right-continuous step functions, so the sup is attained
    just after a breakpoint; a sweep finds it exactly and a uniform grid of
    ``n_grid`` points is evaluated as well.
    """
    lens, w, ls, rs = _columns(sigs)
    out = []
    for weight, length, starts in ((T.l, T.L, ls), (T.r, T.R, rs)):
        hi = max(float(length), float(np.max(starts + lens, initial=0.0)))
        grid = np.linspace(0.0, hi, n_grid)
        out.append(_sweep_sup(float(weight), float(length), w, starts, lens, grid))
    return out[0], out[1]


def refine_signatures(sigs, L, R) -> list[Signature]:
    """Replace every signature shorter than ``m = min(L, R)/3`` by two.

    ``(len, w, ls, rs)`` becomes ``(m + len, w, s1, t1)`` and ``(m, -w, s2, t2)``
    where, on each side, the pair extends to the left by ``m`` when the start
    allows it and to the right otherwise.  Both reconstructions are unchanged.
    """
    m = min(L, R) / 3
    out = []
    for s in sigs:
        if m == 0 or s.len >= m:
            out.append(s)
            continue

        def starts(x):
            return (x - m, x - m) if x >= m else (x, x + s.len)

        l1, l2 = starts(s.ls)
        r1, r2 = starts(s.rs)
        out.append(Signature(m + s.len, s.w, l1, r1))
        out.append(Signature(m, -s.w, l2, r2))
    return out


def sigfinal(beta: float, eps: float = DEFAULT_EPS, cap: int = 100) -> list[FiveTuple]:
    """Five-tuples from the refined decomposition of ``(1, beta, 1, 1/beta)``.

    ``alpha = w/len``, ``ac = ls``, ``bc = ls + len``, ``cc = rs``, ``dc = rs + len``.
    """
    if not 2.0**-cap <= beta <= 2.0**cap:
        raise ValueError(f"beta {beta} outside [2^-{cap}, 2^{cap}]")
    if isinstance(beta, Fraction):
        T = Quadruple(Fraction(1), beta, Fraction(1), 1 / beta)
    else:
        T = Quadruple(1.0, float(beta), 1.0, 1.0 / beta)
    dec = decompose(T, eps, check=False)
    sigs = refine_signatures(dec, T.L, T.R)
    bound = 2.0 ** (cap + 5)
    out = []
    for s in sigs:
        ft = FiveTuple(float(s.w / s.len), float(s.ls), float(s.ls + s.len),
                       float(s.rs), float(s.rs + s.len))
        if not (0 <= ft.ac <= bound and 0 <= ft.dc <= bound):
            raise ValueError("five-tuple coordinate exceeds the configured bound")
        out.append(ft)
    return out


def _eta(a, b, c, d, t):
    up = (t - a) / (b - a)
    down = (d - t) / (d - c)
    return np.clip(np.minimum(np.minimum(up, down), 1.0), 0.0, None)


def reconstruct_trapezoid(tuples, a: float, b: float, c: float, t) -> np.ndarray:
    """``sum_i alpha_i len_i^2 eta(a + u ac_i, a + u bc_i, c + u cc_i, c + u dc_i)(t)``, ``u = b - a``.

    Integrating the derivative identity gives the coefficient ``w_i len_i`` and
    places the right ramps at ``c + u cc_i``.
    """
    t = np.asarray(t, dtype=float)
    u = b - a
    out = np.zeros_like(t)
    for ft in tuples:
        ln = ft.bc - ft.ac
        out += ft.alpha * ln * ln * _eta(a + u * ft.ac, a + u * ft.bc, c + u * ft.cc, c + u * ft.dc, t)
    return out


@dataclass
class SigfinalCheck:
    beta: float
    eps: float
    sup_error: float
    weight: float
    samples: int
    fits: list[float] = field(default_factory=list)

    @property
    def fit(self) -> float:
        return self.sup_error / self.eps


def check_sigfinal(beta: float, eps: float, trapezoids, n_t: int = 4001) -> SigfinalCheck:
    """Sup error of the reconstruction over sampled ``(a, b, c)`` with ``d = c + (b - a)/beta``."""
    tuples = sigfinal(beta, eps)
    worst = 0.0
    for a, b, c in trapezoids:
        d = c + (b - a) / beta
        u = b - a
        ext = u * max(ft.bc for ft in tuples) if tuples else 0.0
        ext_r = u * max(ft.dc for ft in tuples) if tuples else 0.0
        t = np.linspace(a - 0.01 * u, max(d, c + ext_r) + 0.01 * u, n_t)
        t = np.unique(np.concatenate([t, [a, b, c, d], [a + ext]]))
        err = np.max(np.abs(_eta(a, b, c, d, t) - reconstruct_trapezoid(tuples, a, b, c, t)))
        worst = max(worst, float(err))
    weight = float(sum(abs(ft.alpha) * (ft.bc - ft.ac) for ft in tuples))
    return SigfinalCheck(beta, eps, worst, weight, len(list(trapezoids)))


def derivative_residual_l1(tuples, a: float, b: float, c: float, beta: float) -> float:
    """``L1`` distance between ``D(a, b, c, d)`` and the weighted sum of the pieces' derivatives.

    Both sides are step functions; the integral is exact over the merged breakpoints.
    """
    u = b - a
    d = c + u / beta
    pieces = [(1 / u, a, b), (-1 / (d - c), c, d)]
    for ft in tuples:
        ln = ft.bc - ft.ac
        coef = ft.alpha * ln * ln / (u * ln)
        pieces.append((-coef, a + u * ft.ac, a + u * ft.bc))
        pieces.append((coef, c + u * ft.cc, c + u * ft.dc))
    pts = np.unique(np.concatenate([[p[1], p[2]] for p in pieces]))
    mids = (pts[:-1] + pts[1:]) / 2
    val = np.zeros_like(mids)
    for h, lo, hi in pieces:
        val += h * ((mids >= lo) & (mids < hi))
    return float(np.sum(np.abs(val) * np.diff(pts)))


def _fmt(x) -> str:
    return str(x) if isinstance(x, Fraction) else repr(float(x))


def _parse(s: str):
    return Fraction(s) if "/" in s else float(s)


def signatures_to_csv(sigs) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["len", "w", "ls", "rs"])
    for s in sigs:
        wr.writerow([_fmt(s.len), _fmt(s.w), _fmt(s.ls), _fmt(s.rs)])
    return buf.getvalue()


def signatures_from_csv(text: str) -> list[Signature]:
    rows = csv.DictReader(io.StringIO(text))
    return [Signature(*(_parse(r[k]) for k in ("len", "w", "ls", "rs"))) for r in rows]

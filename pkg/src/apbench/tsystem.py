"""T-systems, their construction from partition trees, and the band-decay checks.

A T-system of level ``m`` is a function ``F`` with ``|F| <= 1`` supported on
disjoint segments of length at most ``2pi/2^m``, with zero integral over each
segment and total variation ``O(k)``.  Its density is ``mu = k / 2^m``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .circle import CircleGrid, GridFunction, ResolutionError, band_of, lq_norm
from .dyadic.tree import PartitionTree, StellarSets, classify_stellar, imbalance
from .measures import Interval, discrepancy, mean_on

__all__ = [
    "TSystem",
    "TSequence",
    "PropertyCheck",
    "TSystemReport",
    "validate_tsystem",
    "Selection",
    "select_interesting",
    "bucket_energies",
    "split_by_parity",
    "build_tsystems_theorem3",
    "build_tsystems_theorem1",
    "exponent_for",
    "Lemma2Report",
    "lemma2_verify",
    "lemma2_lower_bound_trace",
    "decay_check",
    "decay_profile",
    "fit_slope",
    "pooled_decay_slopes",
    "random_tsystem",
    "dump_tsequence",
    "load_tsequence",
]

C_VAR = 4.0


@dataclass(frozen=True)
class TSystem:
    level: int
    F: GridFunction
    segments: tuple[Interval, ...]
    c_var: float = C_VAR

    @property
    def k(self) -> int:
        return len(self.segments)

    @property
    def mu(self) -> float:
        return self.k / 2**self.level


@dataclass(frozen=True)
class TSequence:
    systems: tuple[TSystem, ...] = ()

    def __post_init__(self):
        levels = [ts.level for ts in self.systems]
        if any(b <= a for a, b in zip(levels, levels[1:])):
            raise ValueError(f"levels must be strictly increasing, got {levels}")

    def __iter__(self):
        return iter(self.systems)

    def __len__(self):
        return len(self.systems)

    @property
    def mus(self) -> list[float]:
        return [ts.mu for ts in self.systems]


@dataclass
class PropertyCheck:
    name: str
    holds: bool
    measured: float
    bound: float


@dataclass
class TSystemReport:
    checks: list[PropertyCheck]

    @property
    def valid(self) -> bool:
        return all(c.holds for c in self.checks)

    def failures(self) -> list[str]:
        return [c.name for c in self.checks if not c.holds]


def _total_variation(v: np.ndarray) -> float:
    return float(np.sum(np.abs(np.diff(np.r_[v, v[:1]]))))


def validate_tsystem(ts: TSystem, tol: float = 1e-9) -> TSystemReport:
    """Check the five defining properties; every check carries its measured value."""
    F = ts.F.values
    n = ts.F.n
    mask = np.zeros(n, dtype=bool)
    overlap = False
    for I in ts.segments:
        overlap |= bool(mask[I.start:I.stop].any())
        mask[I.start:I.stop] = True
    off = float(np.max(np.abs(F[~mask]), initial=0.0))
    seg_int = max((abs(complex(ts.F.integral(I.start, I.stop))) for I in ts.segments), default=0.0)
    sup = float(np.max(np.abs(F), initial=0.0))
    longest = max((I.length for I in ts.segments), default=0.0)
    cap = 2 * math.pi / 2**ts.level
    var = _total_variation(F.real) + _total_variation(F.imag)
    return TSystemReport([
        PropertyCheck("zero_off_support", off <= 1e-12, off, 0.0),
        PropertyCheck("segment_integrals_zero", seg_int <= tol, seg_int, tol),
        PropertyCheck("bounded_by_one", sup <= 1 + 1e-12, sup, 1.0),
        PropertyCheck("segment_lengths", longest <= cap * (1 + 1e-12) and not overlap, longest, cap),
        PropertyCheck("variation", var <= ts.c_var * ts.k + 1e-9, var, ts.c_var * ts.k),
    ])


# --- interesting segments -------------------------------------------------------------

@dataclass
class Selection:
    t: int
    M: float
    nodes: list[int]
    energy: float
    total: float
    buckets: dict[int, float] = field(default_factory=dict)

    def guarantee(self, alpha: float) -> float:
        """Lower bound ``total * (1 - 2^-alpha) * 2^(-alpha (t - t_min))`` met by the argmax."""
        t_min = min(self.buckets)
        return self.total * (1 - 2**-alpha) * 2 ** (-alpha * (self.t - t_min))


def _bucket(D: float) -> int:
    """``t`` with ``2^(-t-1) < D <= 2^(-t)``."""
    t = math.floor(-math.log2(D))
    while 2.0 ** (-t) < D:
        t -= 1
    while 2.0 ** (-t - 1) >= D:
        t += 1
    return t


def bucket_energies(weights: dict[int, tuple[float, float]]) -> dict[int, tuple[float, list[int]]]:
    """Group ``{node: (|I|, D_I)}`` by dyadic bucket of ``D``; zero ``D`` is dropped."""
    out: dict[int, tuple[float, list[int]]] = {}
    for v, (length, D) in sorted(weights.items()):
        if D <= 0:
            continue
        t = _bucket(D)
        e, nodes = out.get(t, (0.0, []))
        out[t] = (e + length * D * D, nodes + [v])
    return out


def select_interesting(weights: dict[int, tuple[float, float]], alpha: float) -> Selection:
    """Bucket ``t`` (``M = 2^t``) maximizing ``E_t 2^(alpha t)``, ``E_t = sum |I| D_I^2``.

    ``weights`` maps node ids to ``(|I|, D_I)``.
    """
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    buckets = bucket_energies(weights)
    if not buckets:
        raise ValueError("no segment with positive imbalance to select from")
    t = max(buckets, key=lambda s: (buckets[s][0] * 2 ** (alpha * s), -s))
    total = sum(e for e, _ in buckets.values())
    energy, nodes = buckets[t]
    return Selection(t, 2.0**t, nodes, energy, total, {s: e for s, (e, _) in buckets.items()})


def stellar_weights(tree: PartitionTree, A: GridFunction,
                    sets: StellarSets | None = None) -> dict[int, tuple[float, float]]:
    sets = classify_stellar(tree, A) if sets is None else sets
    return {v: (tree[v].interval.length, imbalance(tree, v, A))
            for v in sorted(sets.stellar) if tree[v].children}


def split_by_parity(tree: PartitionTree, nodes) -> tuple[list[int], list[int]]:
    """Split nodes by depth parity; a node and its child never share a family."""
    even = [v for v in nodes if tree[v].depth % 2 == 0]
    odd = [v for v in nodes if tree[v].depth % 2 == 1]
    return even, odd


def _level_of(I: Interval) -> int:
    """Largest ``m`` with ``|I| <= 2pi/2^m``."""
    return int(math.floor(math.log2(I.n / I.cells) + 1e-12))


# --- constructions ----------------------------------------------------------------------

def build_tsystems_theorem3(tree: PartitionTree, A: GridFunction, nodes) -> TSequence:
    """``F_i = +-1`` on the two halves of each interesting level-``i`` segment.

    The sign is ``+1`` on the child with the larger mean of ``A``.
    """
    by_level: dict[int, list[int]] = {}
    for v in nodes:
        lev = tree[v].level
        if lev is None:
            raise ValueError(f"node {v} is not a dyadic segment")
        by_level.setdefault(lev, []).append(v)
    systems = []
    for lev in sorted(by_level):
        F = np.zeros(A.n)
        segs = []
        for v in sorted(by_level[lev], key=lambda u: tree[u].interval.start):
            a, b = (tree[c].interval for c in tree[v].children)
            if a.cells != b.cells:
                raise ValueError(f"node {v} is not split into equal halves")
            s = 1.0 if mean_on(a, A.real) > mean_on(b, A.real) else -1.0
            F[a.start:a.stop] = s
            F[b.start:b.stop] = -s
            segs.append(tree[v].interval)
        systems.append(TSystem(lev, A.grid.function(F), tuple(segs)))
    return TSequence(tuple(systems))


@dataclass
class Theorem1Build:
    sequence: TSequence
    clamped: list[Interval]
    subsegments: dict[Interval, Interval]


def build_tsystems_theorem1(A: GridFunction, intervals, t: float) -> Theorem1Build:
    """Two-value steps: ``s`` on the maximizing subinterval ``I1`` of the
    discrepancy scan and ``s c`` on the rest, ``c = -|I1|/(|I|-|I1|)``.

    ``s`` is the sign of ``E_{I1} A - E_I A``.  When ``|I1| > |I|/2`` the
    subinterval is cut to its left half-length part so that ``|c| <= 1``;
    such cases are listed in ``clamped``.  Intervals must be pairwise disjoint
    within a level.
    """
    by_level: dict[int, list[Interval]] = {}
    for I in intervals:
        by_level.setdefault(_level_of(I), []).append(I)
    systems, clamped, subs = [], [], {}
    for lev in sorted(by_level):
        F = np.zeros(A.n)
        segs = []
        for I in sorted(by_level[lev]):
            if I.cells < 2:
                continue
            J = discrepancy(I, A.real, t).sub
            if 2 * J.cells > I.cells:
                clamped.append(I)
                J = I.sub(J.start, J.start + I.cells // 2)
            s = 1.0 if mean_on(J, A.real) >= mean_on(I, A.real) else -1.0
            c = -J.cells / (I.cells - J.cells)
            F[I.start:I.stop] = s * c
            F[J.start:J.stop] = s
            segs.append(I)
            subs[I] = J
        if segs:
            systems.append(TSystem(lev, A.grid.function(F), tuple(segs)))
    return Theorem1Build(TSequence(tuple(systems)), clamped, subs)


# --- Lemma 2 ---------------------------------------------------------------------------

def exponent_for(p: float, r: float) -> float:
    """``(r(2-p) - 1)/p``."""
    return (r * (2 - p) - 1) / p


@dataclass
class Lemma2Report:
    applicable: bool
    c1: float
    c2: float
    c3: float
    exponent: float
    conclusion: float
    ap_norm_A: float | None
    per_level: list[dict]
    reason: str = ""


def _expect(F: GridFunction, A: GridFunction) -> complex:
    return complex(np.mean(F.values * A.values))


def lemma2_verify(seq: TSequence, A: GridFunction, p: float, r: float, alpha: float,
                  M: float, C: float, ap_norm_A: float | None = None) -> Lemma2Report:
    """Best constants in the three hypotheses.

    ``c1 = min_i |E(F_i A)| M / mu_i``, ``c2 = max_i mu_i C^r`` and
    ``c3 = sum_i mu_i C / M^(2-alpha)``; the implied bound is
    ``C^((r(2-p)-1)/p)``.
    """
    if not (1 < p < 2 and r > 1 and 0 < alpha < 2 - p and M >= 1 and C >= 1):
        raise ValueError("need 1 < p < 2, r > 1, 0 < alpha < 2 - p, M >= 1, C >= 1")
    expo = exponent_for(p, r)
    rows = []
    for ts in seq:
        e = abs(_expect(ts.F, A))
        rows.append(dict(level=ts.level, mu=ts.mu, k=ts.k, EFA=e, c1=e * M / ts.mu,
                         c2=ts.mu * C**r))
    c3 = sum(ts.mu for ts in seq) * C / M ** (2 - alpha)
    if not rows:
        return Lemma2Report(False, math.inf, 0.0, c3, expo, C**expo, ap_norm_A, rows,
                            "empty sequence: hypothesis (3) fails")
    c1 = min(r_["c1"] for r_ in rows)
    c2 = max(r_["c2"] for r_ in rows)
    ok = c1 > 0 and math.isfinite(c2) and c3 > 0
    return Lemma2Report(ok, c1, c2, c3, expo, C**expo, ap_norm_A, rows,
                        "" if ok else "a hypothesis constant vanished")


def _full_spectrum(f: GridFunction) -> tuple[np.ndarray, np.ndarray]:
    """Coefficients at ``l = -n/2 .. n/2-1`` (Nyquist included once)."""
    n = f.n
    c = np.fft.fftshift(np.fft.fft(f.values) / n)
    return np.arange(-n // 2, n // 2), c


def lemma2_lower_bound_trace(seq: TSequence, A: GridFunction, p: float) -> list[dict]:
    """Per level, both sides of ``sum_j |P_j A|_Ap |P_j F|_Aq >= |E(A F)|``.

    Also reports ``sum_j |sum_{band j} F(l) A(-l)|``, which sits between them.
    """
    q = p / (p - 1)
    ls, Ah = _full_spectrum(A)
    A_neg = np.roll(Ah[::-1], 1)  # A_hat(-l) aligned with l
    bands = band_of(ls)
    out = []
    for ts in seq:
        _, Fh = _full_spectrum(ts.F)
        lhs = mid = 0.0
        for j in range(0, int(bands.max()) + 1):
            sel = bands == j
            a_p = np.sum(np.abs(Ah[sel]) ** p) ** (1 / p)
            f_q = np.sum(np.abs(Fh[sel]) ** q) ** (1 / q)
            lhs += a_p * f_q
            mid += abs(np.sum(Fh[sel] * A_neg[sel]))
        zero = abs(Fh[bands == -1].sum() * A_neg[bands == -1].sum())
        rhs = abs(_expect(ts.F, A))
        spectral = abs(np.sum(Fh * A_neg))
        out.append(dict(level=ts.level, lhs=float(lhs), band_sum=float(mid + zero), rhs=rhs,
                        spectral=float(spectral), holds=bool(lhs + zero >= rhs - 1e-9)))
    return out


# --- band decay ------------------------------------------------------------------------

def decay_check(ts: TSystem, j: int) -> tuple[float, float]:
    """``(||P_j F||_2^2, max_{band j} |F_hat|)`` with the normalized measure."""
    n = ts.F.n
    if j < 0 or 2 ** (j + 1) > n // 2:
        raise ResolutionError(f"band {j} needs frequencies up to {2 ** (j + 1) - 1} < n/2 = {n // 2}")
    full = np.fft.fft(ts.F.values) / n
    k = np.arange(2**j, 2 ** (j + 1))
    coeffs = np.concatenate([full[k], full[n - k]])
    a = np.abs(coeffs)
    return float(np.sum(a * a)), float(a.max())


def decay_profile(ts: TSystem, dmax: int) -> dict[str, np.ndarray]:
    """Band quantities at ``j = m +- d`` for ``d = 0..dmax`` (entries beyond range are NaN)."""
    m = ts.level
    out = {}
    for name, sign in (("below", -1), ("above", +1)):
        e = np.full(dmax + 1, np.nan)
        c = np.full(dmax + 1, np.nan)
        for d in range(dmax + 1):
            j = m + sign * d
            try:
                e[d], c[d] = decay_check(ts, j)
            except ResolutionError:
                pass
        out[f"energy_{name}"] = e
        out[f"coeff_{name}"] = c
    return out


def fit_slope(d: np.ndarray, values: np.ndarray) -> float:
    """Least-squares slope of ``log2(values)`` against ``d`` over finite positive entries."""
    d = np.asarray(d, dtype=float)
    v = np.asarray(values, dtype=float)
    ok = np.isfinite(v) & (v > 0)
    if ok.sum() < 2:
        return math.nan
    return float(np.polyfit(d[ok], np.log2(v[ok]), 1)[0])


def pooled_decay_slopes(systems, dmax: int) -> dict[str, float]:
    """Slopes of ``log2(quantity / mu)`` against ``d``, one least-squares fit per
    quantity and side, pooled over all systems."""
    acc: dict[str, list[np.ndarray]] = {}
    for ts in systems:
        for key, v in decay_profile(ts, dmax).items():
            acc.setdefault(key, []).append(v / ts.mu)
    d = np.arange(dmax + 1)
    return {key: fit_slope(np.tile(d, len(vs)), np.concatenate(vs)) for key, vs in acc.items()}


def random_tsystem(rng: np.random.Generator, grid: CircleGrid, m: int, k: int | None = None) -> TSystem:
    """``k`` disjoint random segments of level ``m`` carrying mean-zero two-value steps."""
    n = grid.n
    L = n // 2**m
    if L < 2:
        raise ResolutionError("segments of this level are below two cells")
    slots = 2**m
    k = int(rng.integers(1, max(2, slots // 2) + 1)) if k is None else k
    chosen = np.sort(rng.choice(slots, size=k, replace=False))
    F = np.zeros(n)
    segs = []
    for s in chosen:
        length = int(rng.integers(max(2, L // 2), L + 1))
        start = s * L + int(rng.integers(0, L - length + 1))
        cut = int(rng.integers(1, length))
        a = 1.0
        b = -a * cut / (length - cut)
        scale = max(abs(a), abs(b))
        F[start:start + cut] = a / scale
        F[start + cut:start + length] = b / scale
        segs.append(Interval(start, start + length, n))
    return TSystem(m, grid.function(F), tuple(segs))


# --- serialization ---------------------------------------------------------------------

def dump_tsequence(seq: TSequence) -> str:
    """Text form: one ``level`` line per system, then ``segment`` lines with value runs."""
    lines = []
    for ts in seq:
        lines.append(f"level {ts.level} n={ts.F.n} k={ts.k} c_var={ts.c_var!r}")
        for I in ts.segments:
            vals = ts.F.values[I.start:I.stop].real
            runs = []
            start = 0
            for i in range(1, len(vals) + 1):
                if i == len(vals) or vals[i] != vals[start]:
                    runs.append(f"{float(vals[start])!r}x{i - start}")
                    start = i
            lines.append(f"segment {I.start} {I.stop} " + " ".join(runs))
    return "\n".join(lines) + ("\n" if lines else "")


def load_tsequence(text: str) -> TSequence:
    systems = []
    cur = None

    def flush():
        if cur is not None:
            lev, n, cvar, F, segs = cur
            systems.append(TSystem(lev, CircleGrid(n).function(F), tuple(segs), cvar))

    for line in text.splitlines():
        tok = line.split()
        if not tok:
            continue
        if tok[0] == "level":
            flush()
            kv = dict(t.split("=", 1) for t in tok[2:])
            n = int(kv["n"])
            cur = (int(tok[1]), n, float(kv["c_var"]), np.zeros(n), [])
        elif tok[0] == "segment":
            start, stop = int(tok[1]), int(tok[2])
            pos = start
            for run in tok[3:]:
                v, cnt = run.rsplit("x", 1)
                cur[3][pos:pos + int(cnt)] = float(v)
                pos += int(cnt)
            if pos != stop:
                raise ValueError(f"segment runs cover {pos - start} cells, expected {stop - start}")
            cur[4].append(Interval(start, stop, cur[1]))
        else:
            raise ValueError(f"unrecognized line: {line!r}")
    flush()
    return TSequence(tuple(systems))


def support_norm(ts: TSystem) -> float:
    """``||F||_2^2`` with the normalized measure (at most ``mu``)."""
    return lq_norm(ts.F, 2) ** 2

"""Phased decomposition driven by a pair ``(A, B)`` of real grid functions.

Every threshold has the structural form used in the analysis, with desk-scale
constants collected in :class:`DeskConstants`.  The symbolic values are kept
in :data:`SYMBOLIC` so reports can print both side by side.
"""
from __future__ import annotations

import heapq
import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from ..balanced import circle_balanced_point
from ..circle import GridFunction
from ..measures import Interval, a0_measure, discrepancy, mean_on
from .tree import PartitionTree

__all__ = [
    "SYMBOLIC",
    "DeskConstants",
    "PhaseParams",
    "PhaseResult",
    "InvariantCheck",
    "phase_params",
    "phase_sequence",
    "first_phase",
    "next_phase",
    "run_algorithm2",
    "run_phases",
    "PhasesReport",
]

log = logging.getLogger(__name__)

SYMBOLIC = {
    "K1": "1e10 * (1 + 1/delta)",
    "C1": "1 / A0([0, 2pi])",
    "r1": "1/1000",
    "Delta1": "1e-10",
    "t_dense": "1 / (1e4 K^10)",
    "theta_dense": "1 / (1e4 K^5)",
    "rule5_length": "|I| / K^2",
    "dense_a0": "|I| / 100",
    "success": "sum_FS A0 >= 1 / (K^3 C)",
}


@dataclass(frozen=True)
class DeskConstants:
    """Desk-scale instantiation of the phase constants.

    ``t_dense = c1 / K**a`` and ``theta_dense = c2 / K**b``; ``delta_init``
    defaults to ``1/K_1``.
    """

    kappa0: float = 10.0
    a: float = 2.0
    b: float = 2.0
    c1: float = 0.1
    c2: float = 0.1
    r1: float = 1 / 1000
    delta_init: float | None = None
    floor_cells: int = 2
    rule5_min_cells: int = 4
    balance_mesh: int = 16
    max_phases: int = 6

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class PhaseParams:
    K: float
    C: float
    r: float
    Delta: float
    index: int = 1

    def __post_init__(self):
        if not (self.K > 1 and self.C > 1 and 0 < self.r < 1 and 0 < self.Delta < 1):
            raise ValueError(f"invalid phase parameters {self}")

    def t_dense(self, desk: DeskConstants) -> float:
        return desk.c1 / self.K**desk.a

    def theta_dense(self, desk: DeskConstants) -> float:
        return desk.c2 / self.K**desk.b

    def success_threshold(self) -> float:
        return 1 / (self.K**3 * self.C)


def phase_params(i: int, delta: float, a0_total: float,
                 desk: DeskConstants = DeskConstants()) -> PhaseParams:
    """Constants of phase ``i`` (1-based) from the recurrences

    ``K' = 1.1 K``, ``C' = K C``, ``r' = r + Delta``, ``Delta' = 1/K'``.
    """
    return phase_sequence(i, delta, a0_total, desk)[-1]


def phase_sequence(count: int, delta: float, a0_total: float,
                   desk: DeskConstants = DeskConstants()) -> list[PhaseParams]:
    if count < 1:
        raise ValueError("phase index starts at 1")
    out = [first_phase(delta, a0_total, desk)]
    while len(out) < count:
        out.append(next_phase(out[-1]))
    return out


def first_phase(delta: float, a0_total: float, desk: DeskConstants = DeskConstants()) -> PhaseParams:
    if not 0 < delta < 1:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    if not a0_total > 0:
        raise ValueError("A0 total must be positive")
    K = desk.kappa0 * (1 + 1 / delta)
    D = 1 / K if desk.delta_init is None else desk.delta_init
    return PhaseParams(K, 1 / a0_total, desk.r1, D, 1)


def next_phase(prev: PhaseParams) -> PhaseParams:
    """Raises ``ValueError`` once the recurrences leave the admissible range."""
    K = 1.1 * prev.K
    return PhaseParams(K, prev.K * prev.C, prev.r + prev.Delta, 1 / K, prev.index + 1)


@dataclass
class InvariantCheck:
    name: str
    holds: bool
    lhs: float
    rhs: float
    detail: str = ""

    def __post_init__(self):
        self.holds = bool(self.holds)
        self.lhs, self.rhs = float(self.lhs), float(self.rhs)

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs


@dataclass
class PhaseResult:
    params: PhaseParams
    tree: PartitionTree
    AS: list[Interval]
    BS: list[Interval]
    FS: list[Interval]
    NL: list[Interval]
    forced: list[Interval]
    fs_mass: float
    success: bool
    checks: list[InvariantCheck] = field(default_factory=list)

    @property
    def threshold(self) -> float:
        return self.params.success_threshold()


class _Cache:
    """Per-phase memo of the interval functionals."""

    def __init__(self, A: GridFunction, B: GridFunction):
        self.A, self.B = A.real, B.real
        self._a0: dict[Interval, float] = {}

    def a0(self, I: Interval) -> float:
        if I not in self._a0:
            self._a0[I] = a0_measure(I, self.A)
        return self._a0[I]

    def intB(self, I: Interval) -> float:
        return self.B.integral(I.start, I.stop)


def _snap(x: float, I: Interval) -> int:
    k = int(round(x / I.step))
    return min(max(k, I.start + 1), I.stop - 1)


def _rule5(I: Interval, K: float, total_B: float, cache: _Cache, desk: DeskConstants):
    """Search for a short subsegment carrying almost all of ``int_I B``.

    Returns the adjusted subsegment or ``None``.
    """
    L = max(desk.rule5_min_cells, int(round(I.cells / K**2)))
    if L >= I.cells:
        return None
    need = (1 - 3 / K) * total_B
    b = cache.B.values[I.start:I.stop]
    pre = np.concatenate([[0.0], np.cumsum(b)]) * I.step
    window = pre[L:] - pre[:-L]
    k = int(np.argmax(window))
    if window[k] < need:
        return None
    s, e = I.start + k, I.start + k + L
    # move both ends to balanced points at the scale of the subsegment
    h = I.step
    ends = []
    for x in (s * h, e * h):
        lo, hi = x - 0.5 * L * h, x + 0.5 * L * h
        pt = circle_balanced_point(cache.B, (lo, hi), c=L * h, second_anchor=False,
                                   mesh=desk.balance_mesh).point
        # unwrap next to x before snapping
        pt = x + ((pt - x + math.pi) % (2 * math.pi) - math.pi)
        ends.append(int(round(pt / h)))
    s2, e2 = max(I.start, ends[0]), min(I.stop, ends[1])
    if e2 - s2 < 1:
        return None
    J = I.sub(s2, e2)
    if cache.intB(J) < need:
        return None
    return J


def run_algorithm2(A: GridFunction, B: GridFunction, params: PhaseParams,
                   alive: list[Interval], desk: DeskConstants = DeskConstants()) -> PhaseResult:
    """One phase: process alive segments longest first by rules 1 to 6."""
    K, C = params.K, params.C
    t_dense, theta = params.t_dense(desk), params.theta_dense(desk)
    cache = _Cache(A, B)
    tree = PartitionTree()
    heap = []
    for I in alive:
        v = tree.add_root(I)
        heapq.heappush(heap, (-I.cells, I.start, v))
    AS, BS, FS, NL, forced = [], [], [], [], []

    while heap:
        _, _, v = heapq.heappop(heap)
        I = tree[v].interval
        a0 = cache.a0(I)
        ib = cache.intB(I)
        mean = mean_on(I, cache.A)
        info = dict(a0=a0, intB=ib, mean=mean)
        if ib > 2 * K * C * a0:
            tree.make_leaf(v, "AS"); AS.append(I); tree.log(v, "1", **info)  # noqa: E702
            continue
        if K * ib < C * a0:
            tree.make_leaf(v, "BS"); BS.append(I); tree.log(v, "2", **info)  # noqa: E702
            continue
        da = discrepancy(I, cache.A, t_dense).value if I.cells >= 2 else 0.0
        info["DA"] = da
        if da >= theta:
            tree.make_leaf(v, "FS"); FS.append(I); tree.log(v, "3", **info)  # noqa: E702
            continue
        if abs(mean) >= params.r + params.Delta / 2:
            tree.make_leaf(v, "FS"); FS.append(I); tree.log(v, "4", **info)  # noqa: E702
            continue
        if I.cells <= desk.floor_cells:
            tree.make_leaf(v, "forced"); forced.append(I); tree.log(v, "floor", **info)  # noqa: E702
            log.warning("grid floor at %s with no rule firing", I)
            continue
        if a0 >= I.length / 100:
            J = _rule5(I, K, ib, cache, desk)
            if J is not None:
                tree.make_leaf(v, "AS"); AS.append(J)  # noqa: E702
                tree.log(v, "5", sub_start=J.start, sub_stop=J.stop, **info)
                continue
        third = I.length / 3
        pt = circle_balanced_point(cache.B, (I.lo + third, I.lo + 2 * third), c=third,
                                   second_anchor=False, mesh=desk.balance_mesh).point
        pt = I.lo + ((pt - I.lo) % (2 * math.pi))
        cut = _snap(pt, I)
        NL.append(I)
        a, b = tree.split(v, cut)
        tree.log(v, "6", cut=cut, **info)
        for c in (a, b):
            J = tree[c].interval
            heapq.heappush(heap, (-J.cells, J.start, c))

    fs_mass = float(sum(cache.a0(I) for I in FS))
    success = fs_mass >= params.success_threshold()
    res = PhaseResult(params, tree, AS, BS, FS, NL, forced, fs_mass, success)
    res.checks.append(_fs_nl_bracket(res, cache))
    return res


def _fs_nl_bracket(res: PhaseResult, cache: _Cache) -> InvariantCheck:
    K, C = res.params.K, res.params.C
    worst, worst_I = math.inf, None
    for I in res.FS + res.NL:
        a0, ib = cache.a0(I), cache.intB(I)
        s = min(ib - C * a0 / K, 2 * K * C * a0 - ib)
        if s < worst:
            worst, worst_I = s, I
    if worst_I is None:
        return InvariantCheck("fs_nl_bracket", True, 0.0, 0.0, "no FS or NL segments")
    return InvariantCheck("fs_nl_bracket", worst >= -1e-12, -worst, 0.0, f"tightest at {worst_I}")


def _phase_start_checks(A: GridFunction, B: GridFunction, params: PhaseParams, alive: list[Interval],
                        delta: float, desk: DeskConstants) -> list[InvariantCheck]:
    cache = _Cache(A, B)
    tag = f"phase{params.index}"
    out = []
    worst1 = min((cache.intB(I) - params.C * cache.a0(I) for I in alive), default=0.0)
    out.append(InvariantCheck(f"{tag}_inv1_intB_ge_C_a0", worst1 >= -1e-12, -worst1, 0.0))
    total_B = sum(cache.intB(I) for I in alive)
    out.append(InvariantCheck(f"{tag}_inv2_alive_B_mass", total_B >= 2 * math.pi - delta,
                              2 * math.pi - delta, total_B))
    t, th = params.t_dense(desk), params.theta_dense(desk)
    worst3 = max((discrepancy(I, cache.A, t).value for I in alive if I.cells >= 2), default=0.0)
    out.append(InvariantCheck(f"{tag}_inv3_discrepancy", worst3 <= th, worst3, th))
    worst4 = max((abs(mean_on(I, cache.A)) for I in alive), default=0.0)
    out.append(InvariantCheck(f"{tag}_inv4_mean_below_r", worst4 < params.r, worst4, params.r))
    return out


@dataclass
class PhasesReport:
    phases: list[PhaseResult]
    success: bool
    alive_a0: list[float]
    hypothesis4_l1: float
    hypothesis4_violated: bool
    diagnostic: str = ""

    @property
    def checks(self) -> list[InvariantCheck]:
        return [c for ph in self.phases for c in ph.checks]


def run_phases(A: GridFunction, B: GridFunction, delta: float,
               desk: DeskConstants = DeskConstants()) -> PhasesReport:
    """Run phases until one succeeds or ``desk.max_phases`` is reached.

    The A-small segments of a failed phase are the alive set of the next.
    Invariants are recorded for every phase; nothing is raised for a
    violation, so the report always reflects what happened.
    """
    A, B = A.real, B.real
    full = Interval(0, A.n, A.n)
    a0_total = a0_measure(full, A)
    if a0_total <= 0:
        raise ValueError("A has zero A0-measure on the circle; C_1 is undefined")
    params = first_phase(delta, a0_total, desk)
    l1 = float(np.sum(np.abs(B.values * (1 - A.values))) * A.grid.step)
    h4 = l1 >= 2 * math.pi - delta
    alive = [full]
    phases, alive_a0 = [], []
    cache = _Cache(A, B)
    stop_reason = ""
    while True:
        alive_a0.append(float(sum(cache.a0(I) for I in alive)))
        start = _phase_start_checks(A, B, params, alive, delta, desk)
        res = run_algorithm2(A, B, params, alive, desk)
        res.checks[:0] = start
        phases.append(res)
        if res.success:
            break
        if not res.AS:
            stop_reason = "no A-small segments left to continue"
            break
        if len(phases) >= desk.max_phases:
            stop_reason = f"phase cap {desk.max_phases} reached"
            break
        try:
            params = next_phase(params)
        except ValueError as exc:
            stop_reason = f"phase constants left their range ({exc})"
            break
        alive = sorted(res.AS, key=lambda I: (I.start, I.stop))
    if len(alive_a0) > 1:
        mono = all(b <= a + 1e-12 for a, b in zip(alive_a0, alive_a0[1:]))
        phases[-1].checks.append(InvariantCheck("alive_a0_nonincreasing", mono,
                                                alive_a0[-1], alive_a0[0]))
    success = phases[-1].success
    diag = ""
    if not success:
        last = phases[-1]
        diag = (f"no successful phase in {len(phases)} phase(s) ({stop_reason}); last FS A0 "
                f"mass {last.fs_mass:.3e} below {last.threshold:.3e}; AS count {len(last.AS)}")
        if h4:
            diag += "; int|B(1-A)| >= 2pi - delta, so hypothesis 4 cannot hold"
    return PhasesReport(phases, success, alive_a0, l1, h4, diag)

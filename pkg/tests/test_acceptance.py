"""Acceptance criteria 1 to 9.

Each test prints one ``ACCEPTANCE <k> PASS|FAIL`` line with the measured
quantities and runtime; the lines are repeated in the terminal summary.
"""
import itertools
import math
import time

import numpy as np

from apbench.balanced import Antiderivatives, find_balanced_point
from apbench.circle import (
    CircleGrid, Spectrum, ap_norm, evaluate, lq_norm, quadrature_inner, spectral_inner,
)
from apbench.dyadic import PartitionTree, telescoping_check
from apbench.harness import ExperimentConfig, cmd_theorem3
from apbench.lemma_lt import golden_threshold, theorem_exponent
from apbench.measures import Interval, a0_measure
from apbench.signatures import Quadruple, decompose, refine_signatures
from apbench.skewed import SkewedSegment, eta_hat, partial_sum_expansion, sk_operator, skew_average, symmetric_segment
from apbench.tsystem import pooled_decay_slopes, random_tsystem, validate_tsystem

RESULTS: list[str] = []
SEED = 20240611


def _record(k: int, ok: bool, elapsed: float, budget: float, msg: str) -> bool:
    ok = ok and elapsed < budget
    line = f"ACCEPTANCE {k} {'PASS' if ok else 'FAIL'}: {msg} [{elapsed:.2f}s < {budget:g}s]"
    RESULTS.append(line)
    print(line)
    return ok


# --- 1 ---------------------------------------------------------------------------------

def _random_tree(rng, n, max_depth):
    tree = PartitionTree()
    stack = [tree.add_root(Interval(0, n, n))]
    while stack:
        v = stack.pop()
        I = tree[v].interval
        if tree[v].depth < max_depth and (tree[v].depth == 0 or rng.random() < 0.7):
            stack.extend(tree.split(v, I.start + I.cells // 2))
        else:
            tree.make_leaf(v, "small")
    return tree


def test_1_telescoping():
    rng = np.random.default_rng(SEED)
    n = 512
    g = CircleGrid(n)
    t0 = time.perf_counter()
    worst = oracle_gap = 0.0
    for _ in range(100):
        tree = _random_tree(rng, n, int(rng.integers(1, 9)))
        vals = rng.normal(size=n) * rng.choice([0.1, 1.0, 10.0])
        lhs, rhs = telescoping_check(tree, tree.roots[0], g.function(vals))
        # oracle: sides recomputed from cell sums
        h = 2 * math.pi / n
        mean = lambda I: vals[I.start:I.stop].mean()  # noqa: E731
        o_lhs = sum(v.interval.cells * h / 4 * (mean(tree[v.children[0]].interval) -
                                                mean(tree[v.children[1]].interval)) ** 2
                    for v in tree.nodes if v.children)
        o_rhs = sum(mean(v.interval) ** 2 * v.interval.cells * h for v in tree.nodes if not v.children) \
            - vals.mean() ** 2 * 2 * math.pi
        worst = max(worst, abs(lhs - rhs))
        oracle_gap = max(oracle_gap, abs(lhs - o_lhs), abs(rhs - o_rhs))
    el = time.perf_counter() - t0
    ok = _record(1, worst < 1e-10 and oracle_gap < 1e-10, el, 5,
                 f"max |lhs - rhs| = {worst:.2e}, max gap to oracle = {oracle_gap:.2e} (< 1e-10)")
    assert ok


# --- 2 ---------------------------------------------------------------------------------

def test_2_hausdorff_young_parseval():
    rng = np.random.default_rng(SEED + 2)
    n = 512
    g = CircleGrid(n)
    x = g.points
    t0 = time.perf_counter()
    hy_viol = pars_viol = 0
    worst_hy = worst_pars = -math.inf
    for _ in range(1000):
        deg = int(rng.integers(0, 129))
        c = rng.normal(size=2 * deg + 1) + 1j * rng.normal(size=2 * deg + 1)
        c *= rng.choice([1e-3, 1.0, 1e3])
        s = Spectrum(c)
        # oracle: direct synthesis, not the FFT
        vals = np.exp(1j * np.outer(x, np.arange(-deg, deg + 1))) @ c
        f = g.function(vals)
        p = float(rng.uniform(1.0, 2.0))
        q = math.inf if p == 1.0 else p / (p - 1)
        scale = ap_norm(s, 1)
        e_hy = (lq_norm(f, q) - ap_norm(s, p)) / scale
        e_pars = abs(np.sqrt(np.mean(np.abs(vals) ** 2)) - np.sqrt(np.sum(np.abs(c) ** 2))) / scale
        worst_hy, worst_pars = max(worst_hy, e_hy), max(worst_pars, e_pars)
        hy_viol += e_hy > 1e-9
        pars_viol += e_pars > 1e-9
    el = time.perf_counter() - t0
    ok = _record(2, hy_viol == 0 and pars_viol == 0, el, 10,
                 f"violations HY={hy_viol}, Parseval={pars_viol}; worst relative excess HY {worst_hy:.1e}, "
                 f"Parseval {worst_pars:.1e}")
    assert ok


# --- 3 ---------------------------------------------------------------------------------

def _band_oracle(F: np.ndarray, j: int):
    n = F.size
    k = np.arange(2**j, 2 ** (j + 1))
    full = np.fft.fft(F) / n
    a = np.abs(np.concatenate([full[k], full[-k]]))
    return float(np.sum(a * a)), float(a.max())


def test_3_decay_exponents():
    rng = np.random.default_rng(SEED + 3)
    g = CircleGrid(2**13)
    t0 = time.perf_counter()
    systems = [random_tsystem(rng, g, int(rng.integers(3, 6))) for _ in range(20)]
    valid = all(validate_tsystem(ts).valid for ts in systems)
    slopes = pooled_decay_slopes(systems, 6)
    # oracle: own band sums and fits
    pts = {}
    for ts in systems:
        for side, sign in (("below", -1), ("above", 1)):
            for d in range(7):
                j = ts.level + sign * d
                if j < 0 or 2 ** (j + 1) > g.n // 2:
                    continue
                e, c = _band_oracle(ts.F.values, j)
                pts.setdefault(f"energy_{side}", []).append((d, e / ts.mu))
                pts.setdefault(f"coeff_{side}", []).append((d, c / ts.mu))
    oracle = {k: float(np.polyfit(*np.array([(d, math.log2(v)) for d, v in vs if v > 0]).T, 1)[0])
              for k, vs in pts.items()}
    el = time.perf_counter() - t0
    agree = all(abs(slopes[k] - oracle[k]) < 1e-9 for k in oracle)
    worst = max(slopes.values())
    ok = _record(3, valid and agree and worst <= -1 + 0.25, el, 30,
                 "pooled slopes " + ", ".join(f"{k}={v:.3f}" for k, v in sorted(slopes.items()))
                 + f"; max {worst:.3f} <= -0.75")
    assert ok


# --- 4 ---------------------------------------------------------------------------------

def test_4_partial_sum_expansion():
    rng = np.random.default_rng(SEED + 4)
    xs = np.linspace(0, 2 * math.pi, 512, endpoint=False)
    t0 = time.perf_counter()
    worst_err = worst_ratio = 0.0
    for _ in range(20):
        d = float(rng.uniform(0.2, 2.0))
        c = d * float(rng.uniform(0.1, 0.5))  # d - c comparable to d
        eta = symmetric_segment(c, d)
        F = Spectrum(rng.standard_normal(129) + 1j * rng.standard_normal(129))
        ex = partial_sum_expansion(eta, F, 64)
        # oracle: coefficients of F * eta multiply by the closed-form eta_hat
        mult = eta_hat(eta, F.freqs)
        exact = evaluate(Spectrum(F.coeffs * mult), xs)
        err = float(np.max(np.abs(evaluate(ex.reconstruction, xs) - exact)))
        worst_err = max(worst_err, err)
        worst_ratio = max(worst_ratio, ex.alpha_l1 / d)
    el = time.perf_counter() - t0
    ok = _record(4, worst_err < 1e-6 and worst_ratio <= 10, el, 20,
                 f"sup error {worst_err:.2e} < 1e-6; max sum|alpha|/d = {worst_ratio:.3f} <= 10")
    assert ok


# --- 5 ---------------------------------------------------------------------------------

def _step_sup(weight, length, w, starts, lens):
    """Oracle: sup of |sum w 1[s, s+len) - weight 1[0, length)| on every gap between breakpoints.

    Breakpoints closer than 1e-12 of the scale are merged; the value on each gap
    is read at its midpoint, so zero-width round-off slivers do not count.
    """
    ends = starts + lens
    pts = np.unique(np.concatenate([starts, ends, [0.0, length]]))
    pts = pts[np.r_[True, np.diff(pts) > 1e-12 * max(1.0, pts[-1])]]
    mids = 0.5 * (pts[1:] + pts[:-1])
    on = ((mids[:, None] >= starts) & (mids[:, None] < ends)).astype(float) @ w
    target = np.where(mids < length, weight, 0.0)
    return float(np.max(np.abs(on - target), initial=0.0))


def test_5_signatures():
    rng = np.random.default_rng(SEED + 5)
    eps = 1e-4
    t0 = time.perf_counter()
    worst_res = worst_budget = 0.0
    min_len_ratio = math.inf
    for _ in range(100):
        l, L, R = (float(v) for v in rng.uniform(0.1, 3, 3))
        T = Quadruple(l, l * L / R, L, R)
        dec = decompose(T, eps, check=False)
        sigs = refine_signatures(dec.signatures, L, R)
        w = np.array([s.w for s in sigs], dtype=float)
        lens = np.array([s.len for s in sigs], dtype=float)
        ls = np.array([s.ls for s in sigs], dtype=float)
        rs = np.array([s.rs for s in sigs], dtype=float)
        worst_res = max(worst_res, _step_sup(T.l, L, w, ls, lens), _step_sup(T.r, R, w, rs, lens))
        worst_budget = max(worst_budget, dec.weight / (2 * (T.l + T.r)))
        if sigs:
            min_len_ratio = min(min_len_ratio, lens.min() / (min(L, R) / 3))
    phi = (1 + math.sqrt(5)) / 2
    gold = decompose(Quadruple(1.0, phi, phi, 1.0), eps)
    el = time.perf_counter() - t0
    ok = _record(5, worst_res < eps and worst_budget <= 1 and min_len_ratio >= 1 - 1e-12 and gold.completed,
                 el, 10,
                 f"max residual {worst_res:.4e} < {eps:g}; max weight/2(l+r) {worst_budget:.3f}; "
                 f"min len/(min(L,R)/3) {min_len_ratio:.3f}; golden ratio {gold.iterations} iterations")
    assert ok


# --- 6 ---------------------------------------------------------------------------------

def test_6_balanced_point():
    rng = np.random.default_rng(SEED + 6)
    g = CircleGrid(1024)
    cases = [("x^2", lambda x: x**2, lambda x: 2 * x, 2.0, (-1.0, 1.0)),
             ("sin", np.sin, np.cos, 1.0, (0.3, 1.3))]
    for i in range(10):
        B = g.function(rng.uniform(-1, 2, g.n))
        anti = Antiderivatives(B)
        cases.append((f"B{i}", anti.T, anti.S, float(np.abs(B.values).max()), (1.0, 2.0)))
    t0 = time.perf_counter()
    bad = []
    worst = 0.0
    for name, T, dT, lip, seg in cases:
        step = (seg[1] - seg[0]) / 1024
        res = find_balanced_point(T, seg, resolution=step, check_midpoints=True)
        shrink_ok = all(abs(K.length - 0.52 * J.length) <= 1e-12 * J.length
                        for J, K in zip(res.chain, res.chain[1:]))
        gap = abs(float(dT(res.t0)) - res.y_final)
        worst = max(worst, gap / (4 * step * lip))
        mid_ok = min(res.midpoint_ratios) >= 0.25 * (1 - 1e-6)
        if not (shrink_ok and gap <= 4 * step * lip and mid_ok):
            bad.append(name)
    el = time.perf_counter() - t0
    ok = _record(6, not bad, el, 20,
                 f"{len(cases)} functions, failing {bad}; max |T'(t0) - Y|/(4 h Lip) = {worst:.3f}")
    assert ok


# --- 7 ---------------------------------------------------------------------------------

def test_7_theorem3_trend():
    t0 = time.perf_counter()
    rep = cmd_theorem3(ExperimentConfig(p=1.5, n=2**14, C=[8, 16, 32]))
    el = time.perf_counter() - t0
    st = rep.stages
    ec = st["stellar_energy_C"]
    lm, ap, expo = st["level_mass_slope"], st["ap_norm_slope"], st["exponent"]
    ok_e = min(ec) > 0
    ok_lm = math.isfinite(lm) and lm <= -3 + 0.3
    ok_ap = math.isfinite(ap) and abs(ap - expo) <= 0.2
    ok = _record(7, rep.passed and ok_e and ok_lm and ok_ap, el, 180,
                 f"stellar_energy*C = {[round(v, 4) for v in ec]}; level-mass slope {lm:.3f} (need <= -2.7); "
                 f"ap_norm slope {ap:.3f} vs {expo:.3f} (need within 0.2); "
                 f"C*max_m|(1-A)S_m A| slope {st['hyp_constant_slope']:.3f}")
    assert ok


# --- 8 ---------------------------------------------------------------------------------

def test_8_threshold():
    t0 = time.perf_counter()
    phi = golden_threshold()
    # oracle: plain bisection on p^2 - p - 1
    lo, hi = 1.0, 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if mid * mid - mid - 1 < 0 else (lo, mid)
    flips = theorem_exponent(phi - 1e-9) > 0 > theorem_exponent(phi + 1e-9)
    el = time.perf_counter() - t0
    closed = (1 + math.sqrt(5)) / 2
    ok = _record(8, flips and abs(phi - lo) < 1e-12 and abs(phi - closed) < 1e-9, el, 1,
                 f"threshold {phi:.12f}, oracle {lo:.12f}, sign flips within 1e-9: {flips}")
    assert ok


# --- 9 ---------------------------------------------------------------------------------

def _a0_enumeration(vals, h):
    m = len(vals)
    pre = np.concatenate([[0.0], np.cumsum(vals)]) * h
    best = 0.0
    for mask in itertools.product((0, 1), repeat=m - 1):
        cuts = [0] + [i + 1 for i, b in enumerate(mask) if b] + [m]
        best = max(best, sum(min((b - a) * h, abs(pre[b] - pre[a])) for a, b in zip(cuts, cuts[1:])))
    return best


def test_9_oracle_equivalences():
    rng = np.random.default_rng(SEED + 9)
    t0 = time.perf_counter()
    a0_gap = 0.0
    for m in list(range(1, 15)) + [14] * 6:
        n = 16
        g = CircleGrid(n)
        vals = np.zeros(n)
        vals[:m] = rng.normal(size=m) * rng.choice([0.2, 1.0, 5.0])
        got = a0_measure(Interval(0, m, n), g.function(vals))
        a0_gap = max(a0_gap, abs(got - _a0_enumeration(vals[:m], g.step)))
    g = CircleGrid(1024)
    f = g.function(rng.standard_normal(1024))
    sk_gap = 0.0
    for _ in range(10):
        a = float(rng.uniform(0.05, 2.5))
        b = a * float(rng.uniform(0.05, 0.9))
        if a - b < g.step:
            continue
        sk = sk_operator(f, a, b)
        for i in rng.integers(0, 1024, 24):
            x = g.points[i]
            sk_gap = max(sk_gap, abs(sk.values[i] - skew_average(SkewedSegment(x - a, x - b, x + b, x + a), f)))
    inner_gap = 0.0
    for _ in range(50):
        u = g.function(rng.normal(size=1024) + 1j * rng.normal(size=1024))
        v = g.function(rng.normal(size=1024) + 1j * rng.normal(size=1024))
        inner_gap = max(inner_gap, abs(spectral_inner(u, v) - quadrature_inner(u, v)))
    el = time.perf_counter() - t0
    ok = _record(9, a0_gap <= 1e-12 and sk_gap < 1e-8 and inner_gap < 1e-9, el, 30,
                 f"a0 DP vs enumeration {a0_gap:.1e} (m <= 14); SK vs skew averages {sk_gap:.1e}; "
                 f"spectral vs quadrature inner {inner_gap:.1e}")
    assert ok

"""Checkable form of the localization conditions on a pair of trigonometric
polynomials, and the bridge to the lower-bound hypotheses."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import bisect

from .circle import Spectrum, ap_norm, partial_sum
from .tsystem import exponent_for

__all__ = [
    "PolynomialPair",
    "Condition",
    "LemmaLTReport",
    "check_lemma_lt",
    "BridgeReport",
    "bridge_to_theorem1",
    "dual_exponent",
    "theorem_exponent",
    "golden_threshold",
    "load_spectrum",
    "dump_spectrum",
    "load_pair",
]

_ZERO = 1e-15


@dataclass(frozen=True)
class PolynomialPair:
    P: Spectrum
    Q: Spectrum

    @property
    def q0(self) -> complex:
        return self.Q[0]


@dataclass
class Condition:
    name: str
    value: float
    bound: float
    holds: bool
    detail: dict = field(default_factory=dict)


@dataclass
class LemmaLTReport:
    p: float
    eps: float
    C_p: float
    conditions: list[Condition]

    @property
    def passed(self) -> bool:
        return all(c.holds for c in self.conditions)

    def __getitem__(self, name: str) -> Condition:
        for c in self.conditions:
            if c.name == name:
                return c
        raise KeyError(name)


def check_lemma_lt(pair: PolynomialPair, p: float, eps: float, C_p: float) -> LemmaLTReport:
    """Values of the four conditions.

    (i) ``q_0 = 0`` and ``max |q_j| < eps``; (ii) ``|P - 1|_Ap < eps``;
    (iii) ``|PQ - 1|_Ap < eps``; (iv) ``max_m |P S_m(Q)|_Ap < C_p`` over
    ``m <= deg Q`` (``S_m Q = Q`` beyond that).
    """
    if not p > 1:
        raise ValueError("p must exceed 1")
    P, Q = pair.P, pair.Q
    q0 = abs(pair.q0)
    qmax = float(np.max(np.abs(Q.coeffs), initial=0.0))
    v2 = ap_norm(P - 1, p)
    v3 = ap_norm(P * Q - 1, p)
    per_m = [ap_norm(P * partial_sum(Q, m), p) for m in range(Q.degree + 1)]
    m_star = int(np.argmax(per_m))
    conds = [
        Condition("i_q0", q0, 0.0, q0 <= _ZERO),
        Condition("i_max", qmax, eps, qmax < eps),
        Condition("ii", v2, eps, v2 < eps),
        Condition("iii", v3, eps, v3 < eps),
        Condition("iv", per_m[m_star], C_p, per_m[m_star] < C_p, {"argmax_m": m_star, "per_m": per_m}),
    ]
    return LemmaLTReport(p, eps, C_p, conds)


def dual_exponent(p: float) -> float:
    return p / (p - 1)


def theorem_exponent(p: float) -> float:
    """``(q(2 - p) - 1)/p`` with ``q = p/(p - 1)``; positive exactly for ``p`` below the golden ratio."""
    return exponent_for(p, dual_exponent(p))


def golden_threshold(xtol: float = 1e-13) -> float:
    """Root of ``p^2 - p - 1`` in ``(1, 2)`` by bisection."""
    return float(bisect(lambda p: p * p - p - 1, 1.0, 2.0, xtol=xtol))


@dataclass
class BridgeReport:
    C: float
    p: float
    delta: float
    A: Spectrum
    B: Spectrum
    hypotheses: list[Condition]
    ap_norm_A: float
    target_exponent: float
    target: float
    identity_residual: float

    @property
    def hypotheses_hold(self) -> bool:
        return all(h.holds for h in self.hypotheses)


def bridge_to_theorem1(pair: PolynomialPair, C: float, p: float, delta: float = 0.5,
                       eps_exp: float = 0.0) -> BridgeReport:
    """``A = 1 - P``, ``B = 1 - Q`` and the four hypotheses of the lower bound.

    (1) ``E B = 1``; (2) ``Re E A <= 1/C``; (3) ``max_m |(1 - A) S_m(B)|_Ap``
    (finite, value reported); (4) ``|(1 - A) B|_Ap < 1 - delta``.  The
    identity ``(1 - A) B = (P - 1) - (PQ - 1)`` is checked on the spectra.
    """
    P, Q = pair.P, pair.Q
    A = 1 - P
    B = 1 - Q
    oneA = 1 - A
    h3_vals = [ap_norm(oneA * partial_sum(B, m), p) for m in range(B.degree + 1)]
    h4 = ap_norm(oneA * B, p)
    EB, EA = B[0], A[0]
    hyps = [
        Condition("1", abs(EB - 1), 0.0, abs(EB - 1) <= 1e-12, {"EB": complex(EB)}),
        Condition("2", float(EA.real), 1 / C, EA.real <= 1 / C),
        Condition("3", max(h3_vals), math.inf, bool(np.isfinite(max(h3_vals)))),
        Condition("4", h4, 1 - delta, h4 < 1 - delta),
    ]
    resid = ((oneA * B) - ((P - 1) - (P * Q - 1)))
    expo = theorem_exponent(p) - eps_exp
    return BridgeReport(C, p, delta, A, B, hyps, ap_norm(A, p), expo, C**expo,
                        float(np.max(np.abs(resid.coeffs), initial=0.0)))


# --- coefficient files --------------------------------------------------------------

def load_spectrum(text: str) -> Spectrum:
    """Parse ``k re im`` lines (``#`` starts a comment)."""
    terms: dict[int, complex] = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ValueError(f"expected 'k re im', got {raw!r}")
        k = int(parts[0])
        terms[k] = terms.get(k, 0) + complex(float(parts[1]), float(parts[2]))
    return Spectrum.from_dict(terms)


def dump_spectrum(s: Spectrum) -> str:
    lines = [f"{int(k)} {float(c.real)!r} {float(c.imag)!r}" for k, c in zip(s.freqs, s.coeffs) if c != 0]
    return "\n".join(lines) + ("\n" if lines else "")


def load_pair(path_P, path_Q) -> PolynomialPair:
    return PolynomialPair(load_spectrum(Path(path_P).read_text()),
                          load_spectrum(Path(path_Q).read_text()))

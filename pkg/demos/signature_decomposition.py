"""Split two weighted arcs of equal mass into shared signatures.

Run: python demos/signature_decomposition.py
"""
import math

from apbench.signatures import Quadruple, decompose, refine_signatures, residuals

eps = 1e-4
for l, L, R in [(1.0, 2.0, 0.5), (0.3, 1.7, 1.1), (1.0, (1 + math.sqrt(5)) / 2, 1.0)]:
    T = Quadruple(l, l * L / R, L, R)
    dec = decompose(T, eps)
    sigs = refine_signatures(dec.signatures, L, R)
    res = residuals(T, sigs)
    print(f"l={l:.3f} L={L:.3f} R={R:.3f}: {dec.iterations} steps, {len(sigs)} signatures, "
          f"total weight {dec.weight:.4f} <= l + r = {T.l + T.r:.4f}, residuals {res[0]:.1e} / {res[1]:.1e}")

# The golden-ratio quadruple never terminates exactly: every step rescales it
# by the same ratio, so the step count grows like log(1/eps).

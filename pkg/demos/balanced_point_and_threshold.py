"""Locate a balanced point by nested shrinking, then find the exponent threshold.

Run: python demos/balanced_point_and_threshold.py
"""
import numpy as np

from apbench.balanced import find_balanced_point
from apbench.lemma_lt import golden_threshold, theorem_exponent

res = find_balanced_point(np.sin, (0.3, 1.3), resolution=1 / 1024)
print(f"sin on [0.3, 1.3]: t0 = {res.t0:.5f} after {len(res.chain)} nested segments")
print(f"  cos(t0) = {np.cos(res.t0):.5f}, final average {res.y_final:.5f}")

phi = golden_threshold()
print(f"exponent sign changes at p = {phi:.12f}")
for p in np.linspace(1.1, 1.9, 5):
    print(f"  p = {p:.2f}: exponent {theorem_exponent(p):+.4f}")

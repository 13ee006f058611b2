"""How the A_p norm of an arc indicator scales as the arc shrinks.

Run: python demos/ap_norms_of_short_arcs.py
"""
import numpy as np

from apbench.circle import CircleGrid, ap_norm, dft_spectrum
from apbench.harness.fixtures import fat_cantor, single_interval

grid = CircleGrid(2**14)
p = 1.5

print(f"{'C':>5} {'|arc|_Ap':>12} {'|Cantor|_Ap':>12}")
rows = []
for C in (4, 8, 16, 32, 64):
    arc = ap_norm(dft_spectrum(single_interval(grid, C)), p)
    cantor = ap_norm(dft_spectrum(fat_cantor(grid, C)), p)
    rows.append((C, arc, cantor))
    print(f"{C:5d} {arc:12.5f} {cantor:12.5f}")

# An arc of length pi/C has |A|_{A_p} ~ C^{(1-p)/p}; at p = 3/2 that is C^{-1/3}.
logC = np.log([r[0] for r in rows])
for col, name in ((1, "arc"), (2, "fat Cantor")):
    slope = np.polyfit(logC, np.log([r[col] for r in rows]), 1)[0]
    print(f"log-log slope for {name}: {slope:.3f}   (1-p)/p = {(1 - p) / p:.3f}")

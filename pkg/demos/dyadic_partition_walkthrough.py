"""Build the halving partition of an arc indicator and look at its energy.

Run: python demos/dyadic_partition_walkthrough.py
"""
from apbench.circle import CircleGrid
from apbench.dyadic import classify_stellar, run_algorithm1, stellar_energy, telescoping_check
from apbench.harness.fixtures import single_interval

grid = CircleGrid(2**12)
C = 16
A = single_interval(grid, C, offset=0.3)
tree = run_algorithm1(A, C)

leaves = [v for v in tree.nodes if not v.children]
kinds = {}
for v in leaves:
    kinds[v.leaf_class] = kinds.get(v.leaf_class, 0) + 1
print(f"{len(tree.nodes)} nodes, leaves by class: {kinds}")

# The halving identity: squared mean jumps over internal nodes add up to the
# gain in sum |I| (E_I A)^2 from the root to the leaves.
lhs, rhs = telescoping_check(tree, tree.roots[0], A)
print(f"telescoping sides: {lhs:.12f} vs {rhs:.12f}")

sets = classify_stellar(tree, A)
E = stellar_energy(tree, A, sets)
print(f"stellar nodes: {len(sets.stellar)}, energy {E:.5f}, energy * C = {E * C:.4f}")

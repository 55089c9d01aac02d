"""Walk through the closed-form connection kernel.

Two points in the unit square are connected at depth k when a random
midpoint partition of depth k leaves them in the same cell.  The closed
form sums multinomial weights over the ways of spreading the k splits
across coordinates, keeping only the allocations under which the pair
shares every per-coordinate dyadic cell.
"""

import numpy as np

from kerflab import (
    KernelSpec,
    centered_kernel,
    compositions,
    multinomial_weight,
    same_cell_1d,
)

far = ((0.10, 0.60), (0.20, 0.40))
near = ((0.4140625, 0.7109375), (0.4140630, 0.7109380))

for label, (x, z) in (("well separated", far), ("nearly identical", near)):
    print(f"{label} pair: x={x}, z={z}")
    print("  depth k   kernel K_k(x,z)")
    for k in range(9):
        value = centered_kernel(KernelSpec(depth=k, dimension=2), x, z)
        bar = "#" * int(round(40 * value))
        print(f"  {k:7d}   {value:<11.6g} {bar}")
    print()

x, z = far
print("The k=2 value of the separated pair, split allocation by allocation:")
for comp in compositions(2, 2):
    weight = multinomial_weight(comp, 2)
    # coordinate j survives iff both points share the depth-k_j dyadic cell
    alive = all(same_cell_1d(x[j], z[j], comp[j]) for j in range(2))
    note = "kept" if alive else "dropped (a coordinate separates the pair)"
    print(f"  splits {comp}: weight {weight:.2f} -> {note}")

print("\nSymmetry and self-similarity on random triples (d=3, k=5):")
rng = np.random.default_rng(0)
spec = KernelSpec(depth=5, dimension=3)
for _ in range(3):
    a = rng.uniform(size=3)
    b = np.clip(a + rng.normal(0.0, 0.02, size=3), 0.0, 1.0)
    v = centered_kernel(spec, a, b)
    assert v == centered_kernel(spec, b, a)
    print(f"  K(a,b) = K(b,a) = {v:.6g}, K(a,a) = {centered_kernel(spec, a, a)}")

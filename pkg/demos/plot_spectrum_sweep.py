"""
Spectrum versus coupling and the first-order transition
=======================================================

For positive Stark coupling the two lowest levels, which have opposite
parity, cross once on the line E = -Delta/U.  Further crossings on the
same line form a ladder.  For negative U the ground state never changes
parity.
"""

import numpy as np

from rabistark import ModelParams, diagonalize, juddian_gcn, n_max, sweep

base = ModelParams(delta=0.5, u=1.0)
grid = np.linspace(0.0, 1.2, 13)
result = sweep(base, grid, (-1.5, 1.5), n_general=1)

print("  g      E_0          parity  E_1          parity")
for g, levs in zip(grid, result.levels):
    a, b = levs[0], levs[1]
    print(f"  {g:.2f}  {a.energy: .8f}   {a.parity_label:>3}   {b.energy: .8f}   {b.parity_label:>3}")

print("\nground-state transition at g =", result.transition_g)
print("crossings found (closed-form ladder and pole-line residual):")
for c in result.crossings:
    tag = "  <- ground state" if c.ground_state else ""
    print(f"  n={c.n}  g={c.g:.10f}  E={c.energy:.10f}  [{c.source}]{tag}")

# the ladder couplings are exact double degeneracies
for n in range(4):
    gc = juddian_gcn(n, base)
    gap = diagonalize(base.with_g(gc), 400).gap_at(-0.5)
    print(f"g_c^({n}) = {gc:.10f}   ED splitting at E=-0.5: {gap:.1e}")

# how many crossings lie below g = 0.6 for a strong Stark term
strong = ModelParams(delta=0.5, g=0.6, u=1.9)
print("\nU=1.9, g=0.6: n_max =", n_max(strong),
      " levels below -Delta/U:", diagonalize(strong, 400).below(-0.5 / 1.9))

# negative U: the two lowest levels stay apart
neg = ModelParams(delta=0.5, u=-1.0)
gaps = [np.diff(diagonalize(neg.with_g(g), 300).eigenvalues[:2])[0] for g in grid]
print("U=-1: smallest gap between the two lowest levels:", min(gaps))

"""
Spectral collapse at U = 2
==========================

At |U| = 2 omega the model reduces to an effective oscillator whose
frequency depends on the energy.  Below g_c = sqrt((1 - Delta)/2) the
lower branch is an infinite ladder of levels piling up under
E_c = -Delta/2 - 2 g^2, with a photon number that diverges as they get
there.
"""

import numpy as np

from rabistark import ModelParams, diagonalize
from rabistark import collapse

delta, g = 0.5, 0.3
gc, _ = collapse.critical_point(delta)
ec = collapse.collapse_energy(delta, g)
print(f"g_c = {gc:.6f}, E_c(g={g}) = {ec:.6f}")

reference = diagonalize(ModelParams(delta, g, 2.0), 2000)
print("\nlower branch            ED                 N (asymptotic)   N (ED)")
for sol in collapse.lower_branch(delta, g, 10):
    i = np.argmin(np.abs(reference.eigenvalues - sol.energy))
    n_est = collapse.photon_number_approx(delta, g, sol.energy)
    print(f"  n={sol.n}  {sol.energy:.12f}  {reference.eigenvalues[i]:.12f}"
          f"  {n_est:10.2f}  {reference.photon_numbers[i]:10.2f}")

print("\nupper branch:")
for sol in collapse.upper_branch(delta, g, 3):
    print(f"  n={sol.n}  E={sol.energy:.12f}  omega_eff={sol.omega_eff:.6f}")

# above g_c the truncated spectrum creeps down toward E_c as n_tr grows
g_big = 0.6
for n_tr in (500, 1000, 2000):
    ev = diagonalize(ModelParams(delta, g_big, 2.0), n_tr).eigenvalues
    print(f"g={g_big}, n_tr={n_tr}: lowest level {ev[0]:.8f}"
          f"  (E_c = {collapse.collapse_energy(delta, g_big):.8f})")

# wavefunction of the lowest lower-branch level on a position grid
x = np.linspace(-40, 40, 8001)
sol = collapse.lower_branch(delta, g, 1)[0]
psi1, psi2 = collapse.wavefunction_ho(delta, g, 0, sol.energy, x)
print("\nground-state weight in each component:",
      round(float(np.trapezoid(psi1 ** 2, x)), 6), round(float(np.trapezoid(psi2 ** 2, x)), 6))

"""
Nondegenerate exceptional solutions
===================================

Away from level crossings a single eigenvalue can still sit exactly on a
pole curve.  Such couplings are the zeros of an exceptional G-function
built with the energy pinned to the pole.
"""

import numpy as np

from rabistark import ModelParams, diagonalize, exceptional_levels

params = ModelParams(delta=1.0, u=1.9)

for m in range(4):
    levels = exceptional_levels(m, params, (1e-3, 1.0))
    print(f"pole line m={m}: {len(levels)} exceptional point(s) with g < 1")
    for lv in levels:
        ev = diagonalize(params.with_g(lv.g), 400).eigenvalues
        i = np.argmin(np.abs(ev - lv.energy))
        gap = np.min(np.abs(np.delete(ev, i) - ev[i]))
        print(f"   g*={lv.g:.10f}  E={lv.energy:.10f}  parity {lv.parity_label}"
              f"  |E-E_ED|={abs(ev[i] - lv.energy):.1e}  neighbour gap={gap:.2e}")

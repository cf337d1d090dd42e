"""
G-curves and their poles
========================

Regular eigenvalues of the Rabi-Stark model are the zeros of two
transcendental functions, one per parity.  This script samples both on an
energy window, lists the poles that cut the axis into segments and checks
the zeros against exact diagonalisation.
"""

import numpy as np

from rabistark import ModelParams, Parity, diagonalize, find_regular_levels, g_curve

# weak coupling, positive Stark term
params = ModelParams(delta=0.5, g=0.1, u=1.0)

# the curve is broken (NaN rows) at every pole
curve = g_curve(-1.0, 4.0, 2001, params)
print("poles in the window:")
print("  E_0 =", round(curve.poles.pole0, 6))
print("  E_n =", [round(e, 6) for e in curve.poles.poles if e < 4.0])

# zeros of G_+ and G_- are the even and odd levels
levels = find_regular_levels(params, None, (-1.0, 4.0))
reference = diagonalize(params, 300)

print("\n   E (G zero)        parity   |E - E_ED|")
for lv in levels:
    err = np.min(np.abs(reference.sector(lv.parity) - lv.energy))
    print(f"  {lv.energy: .12f}   {lv.parity_label:>4}     {err:.1e}")

# the sign of each curve flips once per level between two poles
for name, col, par in (("G_+", curve.g_plus, Parity.EVEN), ("G_-", curve.g_minus, Parity.ODD)):
    seg = np.cumsum(curve.is_break)[~curve.is_break]
    vals = col[~curve.is_break]
    flips = np.count_nonzero((np.sign(vals[1:]) != np.sign(vals[:-1])) & (seg[1:] == seg[:-1]))
    print(f"{name}: {flips} sign changes, {len([l for l in levels if l.parity is par])} levels")

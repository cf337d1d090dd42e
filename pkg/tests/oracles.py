"""Independent reference implementations used only by the tests."""
from __future__ import annotations

import math

import mpmath
import numpy as np
from scipy import optimize


def braak_g(energy, g, delta, sign):
    """Braak's G-function of the linear Rabi model.

    The Rabi Hamiltonian ``a^dag a + g sigma_x (a + a^dag) + Delta_B sigma_z``
    with ``Delta_B = delta / 2``; ``x = E + g^2``.  ``sign`` selects G_+ or G_-.
    """
    x = energy + g * g
    db = 0.5 * delta

    def f(n):
        return 2.0 * g + (n - x + db * db / (x - n)) / (2.0 * g)

    k_prev, k_cur = 1.0, f(0)
    total = k_prev * (1.0 - sign * db / x)
    gn = g
    n = 1
    while True:
        term = k_cur * (1.0 - sign * db / (x - n)) * gn
        total += term
        if n > 30 and abs(term) < 1e-17 * max(1.0, abs(total)):
            break
        if n > 2000:
            raise RuntimeError("Braak series did not converge")
        k_prev, k_cur = k_cur, (f(n) * k_cur - k_prev) / (n + 1)
        gn *= g
        n += 1
    return total


def braak_roots(g, delta, sign, e_max, samples=4000):
    """Sign-change zeros of ``braak_g`` below ``e_max``, skipping the poles x = n."""
    e_lo = -g * g - delta - 2.0
    roots = []
    poles = [n - g * g for n in range(int(e_max + g * g) + 2)]
    edges = [e_lo] + [p for p in poles if e_lo < p < e_max] + [e_max]
    for a, b in zip(edges[:-1], edges[1:]):
        grid = np.linspace(a, b, samples)[1:-1]
        vals = np.array([braak_g(e, g, delta, sign) for e in grid])
        for i in np.flatnonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0):
            lo, hi = grid[i], grid[i + 1]
            root = optimize.brentq(braak_g, lo, hi, args=(g, delta, sign), xtol=1e-14)
            # a genuine zero has small |G| compared with the bracket ends
            if abs(braak_g(root, g, delta, sign)) < min(abs(vals[i]), abs(vals[i + 1])):
                roots.append(root)
    return sorted(roots)


def mp_pole_energy(n, delta, u, g):
    """E_n^pole with mpmath arithmetic, written out from the shifted number operator."""
    u, g, delta = mpmath.mpf(u), mpmath.mpf(g), mpmath.mpf(delta)
    return (1 - u * u / 4) * n - u * delta / 4 - g * g


def mp_zeroth_pole(delta, u, g):
    """E_0^pole with mpmath arithmetic."""
    u, g, delta = mpmath.mpf(u), mpmath.mpf(g), mpmath.mpf(delta)
    c = mpmath.sqrt(1 - u * u / 4)
    return -(g * g + delta * u / 4) / c + delta * u / (4 - u * u + 4 * c)


def hermite_numpy(n, xi):
    """Normalised Hermite function via numpy's polynomial class (small n only)."""
    coef = np.zeros(n + 1)
    coef[n] = 1.0
    norm = 1.0 / math.sqrt(2.0 ** n * math.factorial(n) * math.sqrt(math.pi))
    return norm * np.polynomial.hermite.hermval(xi, coef) * np.exp(-0.5 * xi * xi)

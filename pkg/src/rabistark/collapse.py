"""Spectrum at |U| = 2 omega through the effective harmonic oscillator.

Eliminating the lower qubit component leaves an oscillator with frequency

    omega_eff(E) = sqrt(1 + 2 g^2 / (Delta/2 + E))

whose levels satisfy ``E + 1 - Delta/2 = 2 omega_eff (n + 1/2)``.  Two
branches have a real frequency: the upper one above ``-Delta/2`` and the
lower one below ``E_c = -Delta/2 - 2 g^2``.  Lower-branch levels pile up
under ``E_c`` and collapse onto it at ``g_c = sqrt((1 - Delta)/2)``.

Everything is in units of omega = 1.  ``u = -2`` is handled by flipping
the sign of ``Delta``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .model import RegimeError, TruncationError

__all__ = [
    "CollapseSolution",
    "NoLowerBranch",
    "NoCollapse",
    "effective_delta",
    "critical_point",
    "collapse_energy",
    "omega_eff",
    "upper_lhs",
    "lower_lhs",
    "solve_upper",
    "solve_lower",
    "lower_branch",
    "upper_branch",
    "photon_number_approx",
    "hermite_functions",
    "wavefunction_ho",
    "fock_to_position",
]

UPPER = "upper"
LOWER = "lower"


class NoLowerBranch(ValueError):
    """Lower-branch equation has no real root (g at or above g_c)."""


class NoCollapse(ValueError):
    """No finite collapse coupling for this Delta."""


def effective_delta(delta: float, u: float = 2.0) -> float:
    """Qubit splitting seen by the U = +2 equations."""
    if abs(u) != 2.0:
        raise RegimeError(f"collapse analysis needs |u| = 2 exactly, got {u!r}")
    return delta if u > 0 else -delta


@dataclass(frozen=True)
class CollapseSolution:
    branch: str
    n: int
    energy: float
    omega_eff: float
    delta: float
    g: float

    @property
    def residual(self) -> float:
        """|E + 1 - Delta/2 - 2 omega_eff (n + 1/2)|."""
        return abs(self.energy + 1 - 0.5 * self.delta - 2 * self.omega_eff * (self.n + 0.5))


def collapse_energy(delta: float, g: float, u: float = 2.0) -> float:
    """Accumulation energy ``-Delta/2 - 2 g^2``."""
    d = effective_delta(delta, u)
    return -0.5 * d - 2.0 * g * g


def critical_point(delta: float, u: float = 2.0):
    """Collapse coupling ``sqrt((1 - Delta)/2)`` and the energy there."""
    d = effective_delta(delta, u)
    if d >= 1:
        raise NoCollapse(f"Delta={d} >= 1: no finite-g collapse on this branch")
    gc = math.sqrt(0.5 * (1.0 - d))
    return gc, collapse_energy(delta, gc, u)


def omega_eff(delta: float, g: float, energy: float, u: float = 2.0) -> float:
    d = effective_delta(delta, u)
    val = 1.0 + 2.0 * g * g / (0.5 * d + energy)
    if val <= 0:
        raise ValueError(f"E={energy} lies in the gap where omega_eff is imaginary")
    return math.sqrt(val)


def upper_lhs(delta, g, energy, u: float = 2.0):
    """sqrt(E + D/2) (E + 1 - D/2) / sqrt(E + D/2 + 2 g^2), for E > -D/2."""
    d = effective_delta(delta, u)
    sig = np.asarray(energy, float) + 0.5 * d
    return np.sqrt(sig) * (sig + 1.0 - d) / np.sqrt(sig + 2.0 * g * g)


def _lower_lhs_gap(d, g, tau):
    """Lower-branch left-hand side written with tau = E_c - E > 0."""
    kappa = 1.0 - d - 2.0 * g * g
    return np.sqrt(2.0 * g * g + tau) * (kappa - tau) / np.sqrt(tau)


def lower_lhs(delta, g, energy, u: float = 2.0):
    """sqrt(-(E + D/2)) (E + 1 - D/2) / sqrt(-(E + D/2 + 2 g^2)), E < E_c."""
    d = effective_delta(delta, u)
    e = np.asarray(energy, float)
    return np.sqrt(-(0.5 * d + e)) * (e + 1.0 - 0.5 * d) / np.sqrt(-(0.5 * d + e + 2.0 * g * g))


def _check(g, n):
    if g < 0:
        raise ValueError("g must be non-negative")
    if n < 0 or int(n) != n:
        raise ValueError("n must be a non-negative integer")


def solve_upper(delta: float, g: float, n: int, u: float = 2.0, xtol: float = 1e-15) -> float:
    """Upper-branch level ``n`` (E > -Delta/2).

    The left-hand side starts near zero at ``E = -Delta/2`` and grows
    without bound; the first sign change of ``lhs - (2n+1)`` found by an
    expanding scan is bisected.
    """
    _check(g, n)
    d = effective_delta(delta, u)
    target = 2 * n + 1

    def f(sig):
        den = sig + 2.0 * g * g
        ratio = math.sqrt(sig / den) if den > 0 else 1.0
        return ratio * (sig + 1.0 - d) - target

    lo = 0.0
    if f(lo) > 0:
        raise ValueError(f"upper branch has no level n={n} for Delta={d}, g={g}: "
                         f"lhs already {f(lo) + target:.6g} at E = -Delta/2")
    hi = 1.0
    steps = 0
    while f(hi) <= 0:
        lo, hi = hi, 2.0 * hi
        steps += 1
        if steps > 200:
            raise RuntimeError(f"no bracket for upper level n={n} (scanned to sigma={hi:.3g})")
    # refine to the first sign change inside [lo, hi]
    grid = np.linspace(lo, hi, 65)
    vals = np.array([f(s) for s in grid])
    i = int(np.argmax(vals > 0))
    sig = optimize.bisect(f, grid[i - 1], grid[i], xtol=xtol * max(1.0, hi), maxiter=400)
    return sig - 0.5 * d


def solve_lower(delta: float, g: float, n: int, u: float = 2.0) -> float:
    """Lower-branch level ``n`` inside ``(Delta/2 - 1, -Delta/2 - 2 g^2)``.

    Solved in the gap variable ``tau = E_c - E`` where the left-hand side
    falls monotonically from infinity to zero, so each n has one root.
    """
    return _solve_lower_gap(delta, g, n, u)[0]


def _solve_lower_gap(delta, g, n, u=2.0):
    _check(g, n)
    d = effective_delta(delta, u)
    kappa = 1.0 - d - 2.0 * g * g
    if kappa <= 0:
        raise NoLowerBranch(f"g={g} is not below g_c={math.sqrt(max(0.5 * (1 - d), 0)):.6g}: "
                            "the lower branch has no real solutions")
    if g == 0:
        raise NoLowerBranch("the lower branch is empty at g = 0")
    target = 2 * n + 1

    def f(log_tau):
        return _lower_lhs_gap(d, g, math.exp(log_tau)) - target

    hi = math.log(kappa) - 1e-15
    lo = math.log(kappa) - 1.0
    while f(lo) <= 0:
        lo -= 1.0
        if lo < -700:
            raise RuntimeError(f"lower level n={n} is below double precision resolution")
    log_tau = optimize.brentq(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    tau = math.exp(log_tau)
    return collapse_energy(delta, g, u) - tau, tau


def lower_branch(delta: float, g: float, levels: int, u: float = 2.0) -> list:
    """First ``levels`` lower-branch solutions (ascending energy)."""
    d = effective_delta(delta, u)
    out = []
    for n in range(levels):
        e, tau = _solve_lower_gap(delta, g, n, u)
        w = math.sqrt(tau / (tau + 2.0 * g * g))
        out.append(CollapseSolution(LOWER, n, e, w, d, g))
    return out


def upper_branch(delta: float, g: float, levels: int, u: float = 2.0) -> list:
    d = effective_delta(delta, u)
    out = []
    for n in range(levels):
        try:
            e = solve_upper(delta, g, n, u)
        except ValueError:
            continue
        out.append(CollapseSolution(UPPER, n, e, omega_eff(delta, g, e, u), d, g))
    return out


def photon_number_approx(delta: float, g: float, energy: float, u: float = 2.0) -> float:
    """Mean photon number of a lower-branch level close to E_c.

    ``g^2 + 3 g^2 (D + 2 g^2 - 1) / (4 (E - E_c)) + 3 / (8 (1 - D - 2 g^2))``.
    Diverges as E approaches E_c.
    """
    d = effective_delta(delta, u)
    gap = energy - collapse_energy(delta, g, u)
    if gap == 0:
        raise ZeroDivisionError("photon number diverges at the collapse energy")
    return (g * g + 3.0 * g * g * (d + 2.0 * g * g - 1.0) / (4.0 * gap)
            + 3.0 / (8.0 * (1.0 - d - 2.0 * g * g)))


def hermite_functions(n_max: int, xi) -> np.ndarray:
    """Normalised Hermite functions psi_0..psi_{n_max} at ``xi`` (stable recurrence)."""
    xi = np.asarray(xi, float)
    out = np.empty((n_max + 1,) + xi.shape)
    out[0] = np.pi ** -0.25 * np.exp(-0.5 * xi * xi)
    if n_max >= 1:
        out[1] = math.sqrt(2.0) * xi * out[0]
    for k in range(2, n_max + 1):
        out[k] = math.sqrt(2.0 / k) * xi * out[k - 1] - math.sqrt((k - 1) / k) * out[k - 2]
    return out


def wavefunction_ho(delta: float, g: float, n: int, energy: float, x_grid,
                    u: float = 2.0, norm_tol: float = 1e-6):
    """Both spinor components of level ``n`` sampled on ``x_grid``.

    First component: oscillator eigenfunction of frequency omega_eff,
    ``H_n(sqrt(omega_eff) x) exp(-omega_eff x^2 / 2)``; second component:
    ``g sqrt(2) x / (E + Delta/2)`` times the first.  Normalised on the
    grid; a grid missing more than ``norm_tol`` of the norm is rejected.
    """
    d = effective_delta(delta, u)
    x = np.asarray(x_grid, float)
    w = omega_eff(delta, g, energy, u)
    root_w = math.sqrt(w)
    psi1 = hermite_functions(n, root_w * x)[n] * math.sqrt(root_w)
    coef = g * math.sqrt(2.0) / (energy + 0.5 * d)
    psi2 = coef * x * psi1
    # analytic norms: <psi1|psi1> = 1, <x^2> = (n + 1/2)/omega_eff
    exact = 1.0 + coef * coef * (n + 0.5) / w
    grid_norm = float(np.trapezoid(psi1 ** 2 + psi2 ** 2, x))
    if grid_norm < (1.0 - norm_tol) * exact:
        raise TruncationError(f"x grid holds only {grid_norm / exact:.6f} of the norm")
    scale = 1.0 / math.sqrt(grid_norm)
    return psi1 * scale, psi2 * scale


def fock_to_position(coeffs, x_grid) -> np.ndarray:
    """Position-space amplitude of a Fock-basis vector (m omega = 1)."""
    c = np.asarray(coeffs, float)
    basis = hermite_functions(len(c) - 1, x_grid)
    return c @ basis

"""G-functions and the pole ladder that cuts the energy axis into segments."""
from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np

from .model import (
    DEFAULT_MAX_ORDER,
    DEFAULT_POLE_RADIUS,
    DEFAULT_SERIES_TOL,
    ConvergenceError,
    ModelParams,
    Parity,
    RegimeError,
    _check_pole_distance,
    _propagate,
    _seed_regular,
    _stark_factor,
    pole_energy,
    zeroth_pole_energy,
)

__all__ = [
    "PoleSet",
    "GCurve",
    "pole_n",
    "pole_0",
    "omega_pole",
    "pole_set",
    "evaluate_g",
    "evaluate_g_many",
    "g_value_mp",
    "g_rounding",
    "g_curve",
]


def pole_n(n: int, params: ModelParams) -> float:
    """Energy of the n-th pole, ``(1 - U^2/4) n - U Delta/4 - g^2``, n >= 1."""
    if n < 1:
        raise ValueError("pole_n needs n >= 1; the zeroth pole comes from pole_0")
    p = params.require_boa()
    return pole_energy(n, p.delta, p.u, p.g) * params.omega


def pole_0(params: ModelParams) -> float:
    """Zeroth pole, where Omega_0 itself diverges."""
    p = params.require_boa()
    return zeroth_pole_energy(p.delta, p.u, p.g) * params.omega


def omega_pole(n: int, params: ModelParams) -> float:
    """Energy at which Omega_n diverges.

    Only n = 0 is a pole of G; for n >= 1 the product Omega_n f_n stays
    finite there.  Kept as a diagnostic.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    p = params.require_boa()
    c = _stark_factor(p.u)
    base = pole_energy(n, p.delta, p.u, p.g)
    return (base / c + p.delta * p.u / (4.0 - p.u * p.u + 4.0 * c)) * params.omega


@dataclass(frozen=True)
class PoleSet:
    pole0: float
    poles: tuple
    omega_poles: tuple

    def in_window(self, e_min, e_max):
        """Sorted pole energies (zeroth included) inside ``[e_min, e_max]``."""
        vals = [self.pole0, *self.poles]
        return sorted(v for v in vals if e_min <= v <= e_max)


def _default_cap(params: ModelParams, e_max: float) -> int:
    p = params.normalized()
    spacing = 1.0 - 0.25 * p.u * p.u
    top = (e_max / params.omega + 0.25 * p.u * p.delta + p.g * p.g) / spacing
    return max(int(math.ceil(top)), 0) + 2


def pole_set(params: ModelParams, n_cap: int | None = None,
             e_max: float | None = None) -> PoleSet:
    """Pole ladder up to ``n_cap`` (or far enough to cover ``e_max``)."""
    params.require_boa()
    if n_cap is None:
        if e_max is None:
            raise ValueError("give n_cap or e_max")
        n_cap = _default_cap(params, e_max)
    poles = tuple(pole_n(n, params) for n in range(1, n_cap + 1))
    omegas = tuple(omega_pole(n, params) for n in range(0, n_cap + 1))
    return PoleSet(pole_0(params), poles, omegas)


def evaluate_g_many(energies, parity, params: ModelParams, *,
                    tol: float = DEFAULT_SERIES_TOL,
                    max_order: int = DEFAULT_MAX_ORDER):
    """Vectorised G over an array of energies (physical units).

    No pole check is made; unconverged entries come back as NaN.
    """
    p = params.require_boa()
    if p.g == 0:
        raise RegimeError("G-function needs g > 0")
    e = np.asarray(energies, float) / params.omega
    s0, t0 = _seed_regular(e, p.g, p.delta, p.u)
    vals, conv, _, _ = _propagate(e, p.g, p.delta, p.u, s0, t0, 0,
                                  int(Parity.coerce(parity)), tol=tol, max_order=max_order)
    return np.where(conv, vals, np.nan)


def evaluate_g(E: float, parity, params: ModelParams, *,
               tol: float = DEFAULT_SERIES_TOL, max_order: int = DEFAULT_MAX_ORDER,
               pole_radius: float = DEFAULT_POLE_RADIUS) -> float:
    """G-function of the given parity at energy ``E``.

    The positive-parity function is sum (Omega_n - 1) f_n w^n and the
    negative-parity one sum (Omega_n + 1) f_n w^n.  Values are the raw
    sums; no normalisation is applied.
    """
    p = params.require_boa()
    if p.g == 0:
        raise RegimeError("G-function needs g > 0")
    _check_pole_distance(E / params.omega, p, pole_radius / params.omega)
    val = evaluate_g_many(np.array([E]), parity, params, tol=tol, max_order=max_order)[0]
    if not np.isfinite(val):
        raise ConvergenceError(f"G series did not converge at E={E!r} within {max_order} terms")
    return float(val)


def g_rounding(energies, params: ModelParams, *, tol: float = DEFAULT_SERIES_TOL,
               max_order: int = DEFAULT_MAX_ORDER):
    """Rough absolute rounding error of a double-precision G value.

    Machine epsilon times the summed term magnitudes; large when the series
    cancels heavily (many nearby poles at small coupling).
    """
    p = params.require_boa()
    e = np.asarray(energies, float) / params.omega
    s0, t0 = _seed_regular(e, p.g, p.delta, p.u)
    _, _, order, (s, t, _, _) = _propagate(e, p.g, p.delta, p.u, s0, t0, 0,
                                           tol=tol, max_order=max_order, record=True)
    mass = np.nansum(np.abs(s) + np.abs(t), axis=0)
    return np.finfo(float).eps * mass


def g_value_mp(E, parity, params: ModelParams, *, dps: int = 40,
               max_order: int = DEFAULT_MAX_ORDER):
    """G at energy ``E`` in mpmath arithmetic (same recurrence, ``dps`` digits)."""
    p = params.require_boa()
    par = int(Parity.coerce(parity))
    with mpmath.workdps(dps):
        mpf = mpmath.mpf
        d, u, g = mpf(p.delta), mpf(p.u), mpf(p.g)
        e = mpf(E) / mpf(params.omega)
        w = g / mpmath.sqrt(1 - u * u / 4)
        k = u * w / (g + w)

        def parts(m):
            gam = m + w * w
            x = k * (gam - e + 2 * g * w) - (d + u * gam)
            y = k * (d + u * gam) / 2 - 2 * (gam - e - 2 * g * w)
            return x, y

        x0, y0 = parts(0)
        s_prev, t_prev = x0 / y0, mpf(1)
        s_prev2 = t_prev2 = mpf(0)
        total = s_prev - par * t_prev
        tiny = mpmath.power(10, -dps)
        streak = 0
        for m in range(1, max_order + 1):
            gam = (m - 1) + w * w
            rhs = (w * ((d + u * gam) / 2 * s_prev - (gam - e + 2 * g * w) * t_prev)
                   - w * w * (u * w / 2 * s_prev2 - (g + w) * t_prev2))
            x, y = parts(m)
            den = m * (u * w / 2 * x - (g + w) * y)
            s_new, t_new = rhs * x / den, rhs * y / den
            total += s_new - par * t_new
            s_prev2, t_prev2, s_prev, t_prev = s_prev, t_prev, s_new, t_new
            streak = streak + 1 if abs(s_new) + abs(t_new) < tiny else 0
            if streak >= 2 and m > 2 + w * w:
                return +total
        raise ConvergenceError(f"mpmath G series did not converge at E={E!r}")


@dataclass(frozen=True)
class GCurve:
    """Sampled G-curves; rows with ``is_break`` mark pole positions."""

    energy: np.ndarray
    g_plus: np.ndarray
    g_minus: np.ndarray
    is_break: np.ndarray
    poles: PoleSet

    def rows(self):
        for e, gp, gm, b in zip(self.energy, self.g_plus, self.g_minus, self.is_break):
            yield float(e), float(gp), float(gm), bool(b)

    def __len__(self):
        return len(self.energy)


def g_curve(e_min: float, e_max: float, samples: int, params: ModelParams, *,
            pole_radius: float = DEFAULT_POLE_RADIUS, **series_kw) -> GCurve:
    """Sample both G-curves on a uniform grid, skipping pole neighbourhoods.

    A break row (G values NaN) is inserted at every pole inside the window.
    An empty window gives an empty curve.
    """
    params.require_boa()
    if e_max < e_min:
        raise ValueError("e_max must not be below e_min")
    poles = pole_set(params, e_max=max(e_max, e_min))
    if samples <= 0 or e_max == e_min:
        empty = np.array([])
        return GCurve(empty, empty, empty, np.array([], dtype=bool), poles)
    grid = np.linspace(e_min, e_max, samples)
    inside = poles.in_window(e_min, e_max)
    keep = np.ones(grid.shape, dtype=bool)
    for pe in [poles.pole0, *poles.poles]:
        keep &= np.abs(grid - pe) >= pole_radius
    grid = grid[keep]
    gp = evaluate_g_many(grid, Parity.EVEN, params, **series_kw)
    gm = evaluate_g_many(grid, Parity.ODD, params, **series_kw)
    energy = np.concatenate([grid, inside])
    g_plus = np.concatenate([gp, np.full(len(inside), np.nan)])
    g_minus = np.concatenate([gm, np.full(len(inside), np.nan)])
    brk = np.concatenate([np.zeros(len(grid), bool), np.ones(len(inside), bool)])
    order = np.argsort(energy, kind="stable")
    return GCurve(energy[order], g_plus[order], g_minus[order], brk[order], poles)

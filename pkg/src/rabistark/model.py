"""Model parameters, Bogoliubov shift and the coefficient recurrence.

All arithmetic inside this package is carried out in units of the cavity
frequency (omega = 1).  :class:`ModelParams` keeps the physical values and
exposes the normalised ones through :meth:`ModelParams.normalized`.

The coefficient recurrence is written for the scaled quantities

    t_n = f_n w**n,   s_n = e_n w**n = Omega_n t_n,

and each ratio Omega_n = x_n / y_n is carried as its numerator/denominator
pair so that the removable divergences of Omega_n never enter the
arithmetic.  The only genuine singularities left are the poles of the
G-function.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import IntEnum

import numpy as np

__all__ = [
    "ModelParams",
    "Parity",
    "CoefficientSeries",
    "WavefunctionFock",
    "RegimeError",
    "PoleProximityError",
    "ConvergenceError",
    "TruncationError",
    "shift_w",
    "omega_ratio",
    "coefficient_series",
    "fock_coefficients",
    "decoupled_levels",
    "DEFAULT_SERIES_TOL",
    "DEFAULT_MAX_ORDER",
    "DEFAULT_POLE_RADIUS",
]

DEFAULT_SERIES_TOL = 1e-14
DEFAULT_MAX_ORDER = 400
DEFAULT_POLE_RADIUS = 1e-8


class RegimeError(ValueError):
    """Parameters fall outside the regime a solver path supports."""


class PoleProximityError(ArithmeticError):
    """Trial energy sits on (or too close to) a pole of the recurrence."""

    def __init__(self, n, energy, message=None):
        self.n = n
        self.energy = energy
        super().__init__(message or f"energy {energy!r} lies on pole n={n}")


class ConvergenceError(ArithmeticError):
    """The coefficient series did not converge within ``max_order`` terms."""


class TruncationError(ValueError):
    """A finite basis or grid captures too little of the state's norm."""


class Parity(IntEnum):
    """Eigenvalue of exp(i pi N), N = (1 - sigma_x)/2 + a^dag a."""

    EVEN = 1
    ODD = -1

    @classmethod
    def coerce(cls, value) -> "Parity":
        if isinstance(value, Parity):
            return value
        if isinstance(value, str):
            key = value.strip().lower()
            if key in ("+", "+1", "1", "even", "plus", "positive"):
                return cls.EVEN
            if key in ("-", "-1", "odd", "minus", "negative"):
                return cls.ODD
            raise ValueError(f"unknown parity {value!r}")
        return cls(int(value))

    @property
    def label(self) -> str:
        return "+" if self is Parity.EVEN else "-"


@dataclass(frozen=True)
class ModelParams:
    """Rabi-Stark parameters.

    Parameters
    ----------
    delta : float
        Qubit frequency, must be positive.
    g : float
        Dipole coupling, ``g >= 0``.
    u : float
        Stark coupling.
    omega : float
        Cavity frequency, the energy unit.  Default 1.
    """

    delta: float
    g: float = 0.0
    u: float = 0.0
    omega: float = 1.0

    def __post_init__(self):
        for name in ("delta", "g", "u", "omega"):
            val = getattr(self, name)
            if not math.isfinite(val):
                raise ValueError(f"{name} must be finite, got {val!r}")
        if self.omega <= 0:
            raise ValueError("omega must be positive")
        if self.g < 0:
            raise ValueError("g must be non-negative")
        if self.delta <= 0:
            raise ValueError("delta must be positive")

    def normalized(self) -> "ModelParams":
        """Same model expressed in units of omega."""
        if self.omega == 1.0:
            return self
        w = self.omega
        return ModelParams(self.delta / w, self.g / w, self.u / w, 1.0)

    def with_g(self, g: float) -> "ModelParams":
        return replace(self, g=float(g))

    @property
    def stark_ratio(self) -> float:
        return self.u / self.omega

    @property
    def is_boa_regime(self) -> bool:
        return abs(self.stark_ratio) < 2.0

    @property
    def is_collapse_regime(self) -> bool:
        return abs(self.stark_ratio) == 2.0

    def require_boa(self) -> "ModelParams":
        """Return the normalised parameters, rejecting ``|u| >= 2 omega``."""
        if not self.is_boa_regime:
            raise RegimeError(
                f"|u/omega| = {abs(self.stark_ratio)} is not below 2; the "
                "G-function route only covers |u| < 2 omega"
            )
        return self.normalized()


def _stark_factor(u):
    """sqrt(1 - u^2/4); strictly positive inside the BOA regime."""
    return math.sqrt(1.0 - 0.25 * u * u)


def shift_w(params: ModelParams) -> float:
    """Bogoliubov displacement ``w = g / sqrt(1 - U^2/4)`` (units of omega^0)."""
    p = params.require_boa()
    return p.g / _stark_factor(p.u)


def _ratio_parts(m, E, delta, u, g, w):
    """Numerator and denominator of Omega_m (works on scalars or arrays)."""
    gam = m + w * w
    k = u * w / (g + w)
    x = k * (gam - E + 2.0 * g * w) - (delta + u * gam)
    y = 0.5 * k * (delta + u * gam) - 2.0 * (gam - E - 2.0 * g * w)
    return x, y


def omega_ratio(m: int, E: float, params: ModelParams) -> float:
    """Ratio Omega_m = e_m / f_m at trial energy ``E``.

    Raises :class:`PoleProximityError` when the denominator of the ratio
    vanishes to working precision (``E`` at the diverging point of
    Omega_m) instead of returning an overflowed number.
    """
    if m < 0:
        raise ValueError("m must be non-negative")
    p = params.require_boa()
    if p.g == 0:
        raise RegimeError("Omega_m is undefined at g = 0 (w = 0)")
    e = E / params.omega
    w = p.g / _stark_factor(p.u)
    x, y = _ratio_parts(m, e, p.delta, p.u, p.g, w)
    gam = m + w * w
    scale = max(abs(0.5 * p.u * w / (p.g + w) * (p.delta + p.u * gam)),
                2.0 * (abs(gam) + abs(e) + 2.0 * p.g * w))
    if abs(y) <= 64 * np.finfo(float).eps * scale:
        raise PoleProximityError(m, E, f"Omega_{m} diverges at E={E!r}")
    return x / y


def pole_energy(n: int, delta: float, u: float, g: float) -> float:
    """n-th pole (n >= 1) in omega = 1 units; shared with :mod:`gfunction`."""
    return (1.0 - 0.25 * u * u) * n - 0.25 * u * delta - g * g


def zeroth_pole_energy(delta: float, u: float, g: float) -> float:
    c = _stark_factor(u)
    return -(g * g + 0.25 * delta * u) / c + delta * u / (4.0 - u * u + 4.0 * c)


# --------------------------------------------------------------------------
# recurrence engine
# --------------------------------------------------------------------------

def _propagate(E, g, delta, u, s_seed, t_seed, start, parity=None, *,
               tol=DEFAULT_SERIES_TOL, max_order=DEFAULT_MAX_ORDER,
               record=False):
    """Run the scaled recurrence from index ``start``.

    ``E`` and ``g`` broadcast against each other.  The seeds are the scaled
    coefficients at index ``start``; everything below ``start`` is zero.

    Returns ``(sums, converged, order, terms)``.  ``sums`` holds
    sum_n (s_n - p t_n) for p = parity, or the tuple (sum s_n, sum t_n) when
    ``parity`` is None.  ``terms`` is ``(s, t, x, y)`` stacked along axis 0
    when ``record`` is set, otherwise ``None``.
    """
    E, g = np.broadcast_arrays(np.asarray(E, float), np.asarray(g, float))
    c = _stark_factor(u)
    w = g / c
    gw = g * w
    s_prev = np.broadcast_to(np.asarray(s_seed, float), E.shape).copy()
    t_prev = np.broadcast_to(np.asarray(t_seed, float), E.shape).copy()
    s_prev2 = np.zeros(E.shape)
    t_prev2 = np.zeros(E.shape)
    sum_s = s_prev.copy()
    sum_t = t_prev.copy()
    small = (np.abs(s_prev) + np.abs(t_prev)) < tol
    streak = small.astype(int)
    done = np.zeros(E.shape, dtype=bool)
    min_order = start + 2 + int(math.ceil(float(np.max(w * w, initial=0.0))))
    rec = []
    if record:
        x0, y0 = _ratio_parts(start, E, delta, u, g, w)
        rec.append((s_prev.copy(), t_prev.copy(), x0, y0))
    order = start
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        for m in range(start + 1, max_order + 1):
            gam = (m - 1) + w * w
            rhs = (w * (0.5 * (delta + u * gam) * s_prev - (gam - E + 2.0 * gw) * t_prev)
                   - w * w * (0.5 * u * w * s_prev2 - (g + w) * t_prev2))
            x, y = _ratio_parts(m, E, delta, u, g, w)
            den = m * (0.5 * u * w * x - (g + w) * y)
            t_new = rhs * y / den
            s_new = rhs * x / den
            live = ~done
            sum_s = np.where(live, sum_s + s_new, sum_s)
            sum_t = np.where(live, sum_t + t_new, sum_t)
            if record:
                rec.append((s_new, t_new, x, y))
            s_prev2, t_prev2, s_prev, t_prev = s_prev, t_prev, s_new, t_new
            order = m
            small = (np.abs(s_new) + np.abs(t_new)) < tol
            streak = np.where(small, streak + 1, 0)
            done |= (streak >= 2) & (m >= min_order)
            done |= ~np.isfinite(s_new) | ~np.isfinite(t_new)
            if done.all():
                break
    converged = done & np.isfinite(sum_s) & np.isfinite(sum_t)
    if parity is None:
        sums = (sum_s, sum_t)
    else:
        sums = sum_s - int(parity) * sum_t
    terms = None
    if record:
        terms = tuple(np.stack(col) for col in zip(*rec))
    return sums, converged, order, terms


def _seed_regular(E, g, delta, u):
    """Scaled seeds at n = 0 for f_0 = 1: (s_0, t_0) = (Omega_0, 1)."""
    w = np.asarray(g, float) / _stark_factor(u)
    x0, y0 = _ratio_parts(0, E, delta, u, g, w)
    with np.errstate(divide="ignore", invalid="ignore"):
        return x0 / y0, np.ones(np.shape(x0))


def _check_pole_distance(e, p, radius):
    """Raise if the normalised energy ``e`` is within ``radius`` of a pole."""
    if abs(e - zeroth_pole_energy(p.delta, p.u, p.g)) < radius:
        raise PoleProximityError(0, e)
    spacing = 1.0 - 0.25 * p.u * p.u
    offset = -0.25 * p.u * p.delta - p.g * p.g
    n = int(round((e - offset) / spacing))
    for k in (n - 1, n, n + 1):
        if k >= 1 and abs(e - pole_energy(k, p.delta, p.u, p.g)) < radius:
            raise PoleProximityError(k, e)


@dataclass(frozen=True)
class CoefficientSeries:
    """Scaled series at one trial energy.

    ``terms[n] = f_n w**n`` and ``eterms[n] = e_n w**n``; ``ratios[n]`` is
    Omega_n (``inf`` where it diverges).  Energies are in omega = 1 units.
    """

    energy: float
    terms: np.ndarray
    eterms: np.ndarray
    ratios: np.ndarray
    order: int
    converged: bool
    w: float
    tol: float

    def g_value(self, parity) -> float:
        """sum_n (Omega_n -/+ 1) f_n w**n for the requested parity."""
        p = int(Parity.coerce(parity))
        return float(np.sum(self.eterms) - p * np.sum(self.terms))


def coefficient_series(E: float, params: ModelParams, tol: float = DEFAULT_SERIES_TOL,
                       max_order: int = DEFAULT_MAX_ORDER,
                       pole_radius: float = DEFAULT_POLE_RADIUS) -> CoefficientSeries:
    """Coefficients f_n, e_n at trial energy ``E`` seeded with f_0 = 1.

    Non-convergence is reported through ``converged``; landing on a pole
    raises :class:`PoleProximityError` naming its index.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    p = params.require_boa()
    if p.g == 0:
        raise RegimeError("g = 0 has no G-function; use decoupled_levels")
    e = E / params.omega
    _check_pole_distance(e, p, pole_radius / params.omega)
    s0, t0 = _seed_regular(e, p.g, p.delta, p.u)
    _, conv, order, terms = _propagate(e, p.g, p.delta, p.u, s0, t0, 0,
                                       tol=tol, max_order=max_order, record=True)
    s, t, x, y = (np.asarray(a, float).reshape(-1) for a in terms)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(y != 0, x / np.where(y != 0, y, 1.0), np.inf)
    if not (np.all(np.isfinite(s)) and np.all(np.isfinite(t))):
        bad = int(np.argmax(~(np.isfinite(s) & np.isfinite(t))))
        raise PoleProximityError(bad, E)
    return CoefficientSeries(energy=e, terms=t, eterms=s, ratios=ratios, order=order,
                             converged=bool(conv), w=shift_w(p), tol=tol)


# --------------------------------------------------------------------------
# wavefunctions
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class WavefunctionFock:
    """Two-component state in the original Fock basis (sigma_z up / down).

    ``vector()`` concatenates the components in the same order as the
    exact-diagonalisation basis, ``[upper, lower]``.
    """

    upper: np.ndarray
    lower: np.ndarray
    parity: Parity
    norm_deficit: float

    def vector(self) -> np.ndarray:
        return np.concatenate([self.upper, self.lower])


def apply_parity(upper, lower):
    """Action of exp(i pi N) on a two-component Fock vector.

    Column stacks (photon index along axis 0) are accepted too.
    """
    upper, lower = np.asarray(upper), np.asarray(lower)
    sign = (-1.0) ** np.arange(upper.shape[0])
    sign = sign.reshape((-1,) + (1,) * (upper.ndim - 1))
    return sign * lower, sign * upper


def fock_coefficients(series: CoefficientSeries, params: ModelParams, parity,
                      fock_dim: int, norm_tol: float = 1e-10) -> WavefunctionFock:
    """Expand the displaced-basis solution into the bare Fock basis.

    Builds sum_n sqrt(n!) e_n |n>_A and sum_n sqrt(n!) f_n |n>_A with
    |n>_A = (a^dag + w)^n / sqrt(n!) |0>_A, projects onto the requested
    parity sector and normalises.  The sum stops at the smallest term of
    the tail, where the forward recurrence starts to follow its growing
    solution.
    """
    if not series.converged:
        raise ConvergenceError("series did not converge; refusing to build a state")
    par = Parity.coerce(parity)
    w = series.w
    dim = int(fock_dim)
    if dim < 2:
        raise ValueError("fock_dim must be at least 2")
    k = np.arange(dim)
    # |0>_A is the coherent state with amplitude -w
    log_fact = np.array([math.lgamma(i + 1) for i in range(dim)])
    with np.errstate(divide="ignore"):
        phi = np.exp(-0.5 * w * w + k * math.log(w) - 0.5 * log_fact) * (-1.0) ** k
    sqrt_k = np.sqrt(k[1:].astype(float))
    # sqrt(n!) f_n = sqrt(n!) t_n / w**n
    n_all = np.arange(series.order + 1)
    amp = np.exp(0.5 * np.array([math.lgamma(n + 1) for n in n_all]) - n_all * math.log(w))
    ce_all = series.eterms[: len(n_all)] * amp
    cf_all = series.terms[: len(n_all)] * amp
    # forward iteration picks up the growing solution; stop at the smallest tail term
    size = np.hypot(ce_all, cf_all)
    start = min(int(math.ceil(w * w)), len(size) - 1)
    cut = start + int(np.argmin(size[start:]))
    upper = np.zeros(dim)
    lower = np.zeros(dim)
    exact_norm = 0.0
    for n in range(cut + 1):
        if n > 0:
            nxt = w * phi
            nxt[1:] += sqrt_k * phi[:-1]
            phi = nxt / math.sqrt(n)
        ce, cf = ce_all[n], cf_all[n]
        exact_norm += ce * ce + cf * cf
        upper += ce * phi
        lower += cf * phi
    captured = float(upper @ upper + lower @ lower)
    deficit = 1.0 - captured / exact_norm if exact_norm > 0 else 1.0
    if deficit > norm_tol:
        raise TruncationError(
            f"fock_dim={dim} keeps only {1 - deficit:.3e} of the norm; increase it"
        )
    pu, pl = apply_parity(upper, lower)
    upper = 0.5 * (upper + int(par) * pu)
    lower = 0.5 * (lower + int(par) * pl)
    norm = math.sqrt(float(upper @ upper + lower @ lower))
    return WavefunctionFock(upper / norm, lower / norm, par, max(deficit, 0.0))


def decoupled_levels(params: ModelParams, n_levels: int):
    """Spectrum at g = 0: energies ``n - s (Delta + U n)/2`` with parities.

    Returns a list of ``(energy, Parity)`` sorted by energy, in physical
    units, covering photon numbers ``0 .. n_levels - 1`` for both qubit
    states.
    """
    p = params.normalized()
    out = []
    for n in range(n_levels):
        for s in (1, -1):
            energy = n - s * 0.5 * (p.delta + p.u * n)
            par = Parity(s * (1 if n % 2 == 0 else -1))
            out.append((energy * params.omega, par))
    out.sort(key=lambda item: item[0])
    return out

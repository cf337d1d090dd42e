"""Regular and exceptional eigenvalues, crossing ladders and coupling sweeps."""
from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import mpmath
import numpy as np

from . import ed
from .gfunction import evaluate_g_many, g_rounding, g_value_mp, pole_set
from .model import (
    DEFAULT_MAX_ORDER,
    DEFAULT_POLE_RADIUS,
    DEFAULT_SERIES_TOL,
    ModelParams,
    Parity,
    RegimeError,
    _propagate,
    _ratio_parts,
    _stark_factor,
    decoupled_levels,
    pole_energy,
    zeroth_pole_energy,
)

__all__ = [
    "EnergyLevel",
    "Crossing",
    "SpectrumSweep",
    "NoFirstOrderTransition",
    "TangencyWarning",
    "CoarseSamplingWarning",
    "REGULAR",
    "JUDDIAN",
    "EXCEPTIONAL",
    "COLLAPSE",
    "find_regular_levels",
    "crossing_energy",
    "juddian_gc",
    "juddian_gcn",
    "n_max",
    "juddian_residual",
    "juddian_general",
    "exceptional_g",
    "exceptional_nondegenerate",
    "sweep",
    "bisect_brackets",
]

REGULAR = "regular"
JUDDIAN = "juddian"
EXCEPTIONAL = "exceptional_nondegenerate"
COLLAPSE = "collapse_branch"

DEFAULT_SAMPLES = 64
DEFAULT_ROOT_TOL = 1e-10
TANGENCY_LEVEL = 1e-9


class NoFirstOrderTransition(ValueError):
    """No ground-state level crossing exists for these parameters."""


class TangencyWarning(RuntimeWarning):
    pass


class CoarseSamplingWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class EnergyLevel:
    """One eigenvalue.  ``parity`` is None for a doubly degenerate level."""

    energy: float
    parity: Parity | None
    g: float
    kind: str = REGULAR
    pole_index: int | None = None

    @property
    def parity_label(self) -> str:
        return "degenerate" if self.parity is None else self.parity.label


@dataclass(frozen=True)
class Crossing:
    g: float
    energy: float
    n: int
    source: str
    ground_state: bool = False


@dataclass
class SpectrumSweep:
    g_grid: np.ndarray
    levels: list
    crossings: list = field(default_factory=list)
    exceptional: list = field(default_factory=list)
    transition_g: float | None = None

    def lowest(self, k: int) -> np.ndarray:
        """Energy of the k-th level at each grid point (NaN when missing)."""
        out = np.full(len(self.g_grid), np.nan)
        for i, levs in enumerate(self.levels):
            if len(levs) > k:
                out[i] = levs[k].energy
        return out

    def rows(self):
        for g, levs in zip(self.g_grid, self.levels):
            for idx, lev in enumerate(levs):
                yield float(g), idx, lev.energy, lev.parity_label, lev.kind


# --------------------------------------------------------------------------
# root bracketing
# --------------------------------------------------------------------------

def bisect_brackets(func, lo, hi, tol, f_lo=None, max_iter=200):
    """Bisect many sign-change brackets at once.

    ``func`` maps an array of abscissae to values.  Returns the midpoints
    after every bracket has shrunk below ``tol``.
    """
    lo = np.array(lo, float)
    hi = np.array(hi, float)
    if lo.size == 0:
        return lo
    f_lo = func(lo) if f_lo is None else np.array(f_lo, float)
    for _ in range(max_iter):
        if np.all(hi - lo <= tol):
            break
        mid = 0.5 * (lo + hi)
        f_mid = func(mid)
        left = np.sign(f_mid) == np.sign(f_lo)
        lo = np.where(left, mid, lo)
        f_lo = np.where(left, f_mid, f_lo)
        hi = np.where(left, hi, mid)
    return 0.5 * (lo + hi)


def _scan(func, grid, tol, segment=None):
    """Roots of ``func`` from sign changes on ``grid``.

    ``segment`` labels grid points; sign changes between different labels
    (across a pole) are ignored.  Sign changes that turn out to be poles
    (|f| grows under bisection) are dropped.  Returns ``(roots, tangencies)``.
    """
    grid = np.asarray(grid, float)
    seg = np.zeros(len(grid), int) if segment is None else np.asarray(segment)
    vals = func(grid)
    finite = np.isfinite(vals)
    if not finite.all():
        warnings.warn(f"{np.count_nonzero(~finite)} sample(s) did not converge and were skipped",
                      RuntimeWarning, stacklevel=3)
    grid, vals, seg = grid[finite], vals[finite], seg[finite]
    if len(grid) < 2:
        return np.array([]), []
    s = np.sign(vals)
    same = seg[:-1] == seg[1:]
    exact = s == 0
    idx = np.nonzero((s[:-1] * s[1:] < 0) & same)[0]
    roots = bisect_brackets(func, grid[idx], grid[idx + 1], tol, vals[idx])
    if len(roots):
        at_root = np.abs(func(roots))
        bound = np.minimum(np.abs(vals[idx]), np.abs(vals[idx + 1]))
        roots = roots[at_root <= bound]
    # same-sign dips can hide a close pair of zeros between two samples
    dip = np.nonzero(same[:-1] & same[1:] & (s[:-2] == s[1:-1]) & (s[1:-1] == s[2:])
                     & (np.abs(vals[1:-1]) <= np.abs(vals[:-2]))
                     & (np.abs(vals[1:-1]) <= np.abs(vals[2:])))[0] + 1
    tang = []
    if len(dip):
        x_min, f_min = _golden_min(func, grid[dip - 1], grid[dip + 1], s[dip])
        split = np.sign(f_min) == -s[dip]
        if split.any():
            d = dip[split]
            left = bisect_brackets(func, grid[d - 1], x_min[split], tol, vals[d - 1])
            right = bisect_brackets(func, x_min[split], grid[d + 1], tol, f_min[split])
            roots = np.concatenate([roots, left, right])
        close = ~split & (np.abs(f_min) < TANGENCY_LEVEL)
        tang = [float(x) for x in x_min[close]]
    roots = np.concatenate([roots, grid[exact]])
    return np.sort(roots), tang


def _golden_min(func, a, b, sign, iters=60):
    """Vectorised golden-section search for the minimum of ``sign * func``."""
    r = 0.5 * (math.sqrt(5.0) - 1.0)
    a, b = np.array(a, float), np.array(b, float)
    c, d = b - r * (b - a), a + r * (b - a)
    fc, fd = sign * func(c), sign * func(d)
    for _ in range(iters):
        left = fc < fd
        b = np.where(left, d, b)
        a = np.where(left, a, c)
        c_new = np.where(left, b - r * (b - a), d)
        d_new = np.where(left, c, a + r * (b - a))
        probe = np.where(left, c_new, d_new)
        fp = sign * func(probe)
        fc, fd = np.where(left, fp, fd), np.where(left, fc, fp)
        c, d = c_new, d_new
    x = np.where(fc < fd, c, d)
    return x, func(x)


def _segments(params: ModelParams, e_min, e_max, radius):
    poles = pole_set(params, e_max=e_max).in_window(e_min, e_max)
    edges = [e_min, *poles, e_max]
    segs = []
    for a, b in zip(edges[:-1], edges[1:]):
        lo = a + radius if a in poles else a
        hi = b - radius if b in poles else b
        if hi > lo:
            segs.append((lo, hi))
    return segs


def _polish(roots, parity, params, tol, series_kw):
    """Redo ill-conditioned roots with a secant iteration in mpmath.

    A root is ill-conditioned when the rounding error of G divided by its
    slope exceeds ``tol``.
    """
    roots = np.asarray(roots, float)
    if roots.size == 0:
        return roots
    h = max(1e3 * tol, 1e-8) * params.omega
    slope = np.abs(evaluate_g_many(roots + h, parity, params, **series_kw)
                   - evaluate_g_many(roots - h, parity, params, **series_kw)) / (2 * h)
    err = g_rounding(roots, params, **series_kw) / slope
    out = roots.copy()
    for i in np.flatnonzero(~(err <= tol)):
        with mpmath.workdps(40):
            a, b = mpmath.mpf(roots[i] - h), mpmath.mpf(roots[i] + h)
            fa, fb = g_value_mp(a, parity, params), g_value_mp(b, parity, params)
            for _ in range(8):
                c = b - fb * (b - a) / (fb - fa)
                a, fa = b, fb
                b, fb = c, g_value_mp(c, parity, params)
                if abs(b - a) < tol or fb == 0:
                    break
            out[i] = float(b)
    return out


def _regular_roots(params, parity, e_min, e_max, samples, tol, radius, series_kw):
    def func(x):
        return evaluate_g_many(x, parity, params, **series_kw)

    grids, labels = [], []
    for i, (lo, hi) in enumerate(_segments(params, e_min, e_max, radius)):
        grids.append(np.linspace(lo, hi, max(int(samples), 2)))
        labels.append(np.full(len(grids[-1]), i))
    if not grids:
        return [], []
    roots, tangencies = _scan(func, np.concatenate(grids), tol, np.concatenate(labels))
    roots = _polish(roots, parity, params, tol, series_kw)
    return sorted(roots.tolist()), tangencies


def find_regular_levels(params: ModelParams, parity=None, e_window=(-1.0, 4.0),
                        samples_per_segment: int = DEFAULT_SAMPLES,
                        tol: float = DEFAULT_ROOT_TOL,
                        pole_radius: float = DEFAULT_POLE_RADIUS,
                        ed_check: int | None = None, max_refine: int = 4,
                        **series_kw) -> list:
    """Zeros of the G-function inside ``e_window``.

    The window is split at every pole; each open segment is sampled with
    ``samples_per_segment`` points and every sign change is bisected down
    to ``tol``.  ``parity=None`` collects both sectors.  At g = 0 the
    decoupled spectrum is returned directly.

    When ``ed_check`` is a truncation number, the root count per sector is
    compared with exact diagonalisation and the sampling density doubled
    (up to ``max_refine`` times) until they agree.
    """
    params.require_boa()
    e_min, e_max = map(float, e_window)
    if e_max < e_min:
        raise ValueError("empty energy window")
    sectors = [Parity.EVEN, Parity.ODD] if parity is None else [Parity.coerce(parity)]

    if params.g == 0:
        p = params.normalized()
        n_levels = int(math.ceil(e_max / params.omega / max(1.0 - 0.5 * abs(p.u), 1e-12))) + 3
        levels = [EnergyLevel(e, par, 0.0) for e, par in decoupled_levels(params, max(n_levels, 1))
                  if e_min <= e <= e_max and par in sectors]
        return sorted(levels, key=lambda lv: lv.energy)

    reference = None
    if ed_check is not None:
        reference = ed.diagonalize(params, ed_check)

    levels = []
    for par in sectors:
        samples = samples_per_segment
        for attempt in range(max_refine + 1):
            roots, tangencies = _regular_roots(params, par, e_min, e_max, samples, tol,
                                               pole_radius, series_kw)
            if reference is None:
                break
            expected = _ed_count(reference, par, params, e_min, e_max, pole_radius)
            if len(roots) >= expected:
                break
            if attempt == max_refine:
                warnings.warn(f"parity {par.label}: {len(roots)} roots but ED has {expected} "
                              f"levels in the window after {samples} samples per segment",
                              CoarseSamplingWarning, stacklevel=2)
            samples *= 2
        for t in tangencies:
            warnings.warn(f"suspected tangency (double root) of G near E={t:.12g}, "
                          f"parity {par.label}; not reported as a root",
                          TangencyWarning, stacklevel=2)
        levels.extend(EnergyLevel(float(e), par, params.g) for e in roots)
    return sorted(levels, key=lambda lv: lv.energy)


def _ed_count(result, parity, params, e_min, e_max, radius):
    vals = result.sector(parity)
    vals = vals[(vals >= e_min) & (vals <= e_max)]
    poles = pole_set(params, e_max=e_max)
    near = np.zeros(vals.shape, bool)
    for pe in [poles.pole0, *poles.poles]:
        near |= np.abs(vals - pe) < 10 * radius
    return int(np.count_nonzero(~near))


# --------------------------------------------------------------------------
# Juddian (doubly degenerate) solutions
# --------------------------------------------------------------------------

def crossing_energy(params: ModelParams) -> float:
    """Common energy ``-Delta/U`` of the crossings on the Juddian ladder."""
    if params.u == 0:
        raise NoFirstOrderTransition("no crossing ladder at U = 0")
    return -params.delta / params.u * params.omega


def juddian_gcn(n: int, params: ModelParams) -> float:
    """Coupling of the n-th crossing on the line E = -Delta/U.

    ``sqrt((n + Delta/U)(1 - U^2/4))``; raises when the radicand is not
    positive (no crossing for that n).
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    p = params.require_boa()
    if p.u == 0:
        raise NoFirstOrderTransition("no crossing ladder at U = 0")
    rad = (n + p.delta / p.u) * (1.0 - p.u * p.u / 4.0)
    if rad <= 0:
        raise NoFirstOrderTransition(f"no real crossing coupling for n={n} (radicand {rad:.6g})")
    return math.sqrt(rad) * params.omega


def juddian_gc(params: ModelParams) -> float:
    """First-order transition coupling, where the two lowest levels cross."""
    p = params.require_boa()
    if p.u <= 0:
        raise NoFirstOrderTransition("a ground-state crossing requires U > 0")
    return juddian_gcn(0, params)


def n_max(params: ModelParams) -> int:
    """Index of the last crossing below the current g, or -1 if none yet."""
    p = params.require_boa()
    if p.u <= 0:
        raise NoFirstOrderTransition("the crossing count is defined for U > 0")
    val = p.g * p.g / (1.0 - p.u * p.u / 4.0) - p.delta / p.u
    return max(int(math.floor(val)), -1)


def juddian_residual(n: int, params: ModelParams, g, dps: int = 40):
    """Numerator of f_n at E = E_n^pole(g), as an mpmath number.

    The recurrence is carried in homogeneous form (every Omega_k kept as
    x_k / y_k and every denominator multiplied out) so the result has no
    poles in ``g``.  For U != 0 it includes the factor y_n, whose zero
    marks the crossing on the line E = -Delta/U.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    p = params.require_boa()
    with mpmath.workdps(dps):
        d, u, gg = mpmath.mpf(p.delta), mpmath.mpf(p.u), mpmath.mpf(g)
        c = mpmath.sqrt(1 - u * u / 4)
        w = gg / c
        E = (1 - u * u / 4) * n - u * d / 4 - gg * gg

        def parts(k):
            gam = k + w * w
            kk = u * w / (gg + w)
            return (kk * (gam - E + 2 * gg * w) - (d + u * gam),
                    kk * (d + u * gam) / 2 - 2 * (gam - E - 2 * gg * w))

        x0, y0 = parts(0)
        e1, f1 = x0, y0
        e2 = f2 = mpmath.mpf(0)
        for k in range(1, n + 1):
            gam = k - 1 + w * w
            rhs = (w * ((d + u * gam) / 2 * e1 - (gam - E + 2 * gg * w) * f1)
                   - w * w * (u * w / 2 * e2 - (gg + w) * f2))
            xk, yk = parts(k)
            if k == n:
                return rhs * yk if p.u != 0 else rhs
            den = k * (u * w / 2 * xk - (gg + w) * yk)
            e2, f2 = e1 * den, f1 * den
            e1, f1 = rhs * xk, rhs * yk


def _mp_bisect(func, a, b, fa, tol):
    for _ in range(200):
        if b - a <= tol:
            break
        m = 0.5 * (a + b)
        fm = func(m)
        if fm == 0:
            return m
        if (fm > 0) == (fa > 0):
            a, fa = m, fm
        else:
            b = m
    return 0.5 * (a + b)


def juddian_general(n: int, params: ModelParams, g_window=(1e-3, 2.0), samples: int = 400,
                    tol: float = 1e-13) -> list:
    """Couplings where the n-th pole line carries a doubly degenerate level."""
    params.require_boa()
    g_lo, g_hi = (float(v) / params.omega for v in g_window)
    g_lo = max(g_lo, 1e-9)
    unit = params.normalized()
    grid = np.linspace(g_lo, g_hi, samples)
    vals = [juddian_residual(n, unit, g) for g in grid]
    roots = []
    for i in range(len(grid) - 1):
        a, b = vals[i], vals[i + 1]
        if a == 0:
            roots.append(float(grid[i]))
        elif a * b < 0:
            roots.append(float(_mp_bisect(lambda x: juddian_residual(n, unit, x),
                                          float(grid[i]), float(grid[i + 1]), a, tol)))
    if vals and vals[-1] == 0:
        roots.append(float(grid[-1]))
    return [r * params.omega for r in roots]


# --------------------------------------------------------------------------
# nondegenerate exceptional solutions
# --------------------------------------------------------------------------

def exceptional_g(g, m: int, parity, params: ModelParams, *,
                  tol: float = DEFAULT_SERIES_TOL, max_order: int = DEFAULT_MAX_ORDER):
    """Exceptional G-function of the m-th pole line, vectorised over ``g``.

    Energy is pinned to the m-th pole.  For m >= 1 the series starts at
    f_m = 1 (everything below vanishes); for m = 0 it starts from e_0 = 1,
    f_0 = 0.  Values are sum_n (e_n - p f_n) w^n; NaN where unconverged.
    """
    if m < 0:
        raise ValueError("m must be non-negative")
    p = params.require_boa()
    par = int(Parity.coerce(parity))
    gs = np.atleast_1d(np.asarray(g, float)) / params.omega
    w = gs / _stark_factor(p.u)
    if m == 0:
        E = zeroth_pole_energy(p.delta, p.u, gs)
        s0, t0 = np.ones_like(gs), np.zeros_like(gs)
    else:
        E = pole_energy(m, p.delta, p.u, gs)
        x, y = _ratio_parts(m, E, p.delta, p.u, gs, w)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            wm = w ** m
            s0, t0 = x / y * wm, wm
    vals, conv, _, _ = _propagate(E, gs, p.delta, p.u, s0, t0, m, par,
                                  tol=tol, max_order=max_order)
    out = np.where(conv, vals, np.nan)
    return out if np.ndim(g) else out[0]


def exceptional_nondegenerate(m: int, parity, params: ModelParams, g_window=(1e-3, 1.5),
                              samples: int = 600, tol: float = 1e-13,
                              crossing_guard: float = 1e-6, **series_kw) -> list:
    """Couplings at which a single level of the given parity sits on pole m.

    Sign changes caused by poles in ``g`` (the pinned energy meeting another
    pole line) are discarded, and so are roots within ``crossing_guard`` of
    a Juddian crossing of the same line.
    """
    params.require_boa()
    lo, hi = (float(v) for v in g_window)
    lo = max(lo, 1e-9 * params.omega)
    grid = np.linspace(lo, hi, samples)

    def func(x):
        return exceptional_g(x, m, parity, params, **series_kw)

    roots, _ = _scan(func, grid, tol)
    guards = []
    try:
        guards.append(juddian_gcn(m, params))
    except NoFirstOrderTransition:
        pass
    keep = [float(r) for r in roots if all(abs(r - gc) > crossing_guard for gc in guards)]
    return keep


def exceptional_levels(m: int, params: ModelParams, g_window=(1e-3, 1.5), **kw) -> list:
    """Both parities of :func:`exceptional_nondegenerate` as EnergyLevel objects."""
    out = []
    for par in (Parity.EVEN, Parity.ODD):
        for g in exceptional_nondegenerate(m, par, params, g_window, **kw):
            pg = params.with_g(g)
            p = pg.normalized()
            if m == 0:
                energy = zeroth_pole_energy(p.delta, p.u, p.g) * params.omega
            else:
                energy = pole_energy(m, p.delta, p.u, p.g) * params.omega
            out.append(EnergyLevel(energy, par, g, EXCEPTIONAL, m))
    return sorted(out, key=lambda lv: (lv.g, lv.energy))


# --------------------------------------------------------------------------
# sweeps
# --------------------------------------------------------------------------

def _levels_at(args):
    params, e_window, samples, tol = args
    return find_regular_levels(params, None, e_window, samples, tol)


def _worker_count(workers):
    if workers is not None:
        return max(int(workers), 1)
    return max(int(os.environ.get("RABISTARK_WORKERS", "1")), 1)


def _crossings(params: ModelParams, g_lo, g_hi, n_general):
    out = []
    p = params.normalized()
    if p.u != 0:
        e_cross = crossing_energy(params)
        n = 0
        while True:
            try:
                gc = juddian_gcn(n, params)
            except NoFirstOrderTransition:
                if p.u > 0:
                    break
                n += 1
                if n > 1000:
                    break
                continue
            if gc > g_hi:
                break
            if gc >= g_lo:
                out.append(Crossing(gc, e_cross, n, "ladder"))
            n += 1
    for n in range(1, n_general + 1):
        for g in juddian_general(n, params, (max(g_lo, 1e-6), g_hi)):
            if any(c.n == n and abs(c.g - g) < 1e-7 for c in out):
                continue
            pg = params.with_g(g).normalized()
            out.append(Crossing(g, pole_energy(n, pg.delta, pg.u, pg.g) * params.omega,
                                n, "residual"))
    return sorted(out, key=lambda c: (c.g, c.n))


def sweep(params: ModelParams, g_grid, e_window=(-1.0, 4.0), *,
          samples_per_segment: int = DEFAULT_SAMPLES, tol: float = DEFAULT_ROOT_TOL,
          n_general: int = 3, exceptional_m: int = -1, workers: int | None = None
          ) -> SpectrumSweep:
    """Regular spectrum over a coupling grid plus the crossing ladder.

    Crossings come from the closed-form ladder and the pole-line residuals,
    never from tracking levels between grid points.  The ground-state
    crossing is flagged when the parity of the lowest regular level flips
    across it.  ``exceptional_m >= 0`` also collects nondegenerate
    exceptional points on pole lines ``0..exceptional_m``.
    """
    params.require_boa()
    g_grid = np.asarray(g_grid, float)
    if g_grid.size == 0:
        raise ValueError("g_grid must not be empty")
    jobs = [(params.with_g(g), e_window, samples_per_segment, tol) for g in g_grid]
    n_workers = _worker_count(workers)
    if n_workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(n_workers) as pool:
            levels = list(pool.map(_levels_at, jobs))
    else:
        levels = [_levels_at(j) for j in jobs]

    g_lo, g_hi = float(g_grid.min()), float(g_grid.max())
    crossings = _crossings(params, g_lo, g_hi, n_general)
    result = SpectrumSweep(g_grid, levels)

    transition = None
    if params.u > 0:
        try:
            gc = juddian_gc(params)
        except NoFirstOrderTransition:
            gc = None
        if gc is not None and g_lo < gc < g_hi:
            below = [lv for g, lv in zip(g_grid, levels) if g < gc and lv]
            above = [lv for g, lv in zip(g_grid, levels) if g > gc and lv]
            if below and above and below[-1][0].parity != above[0][0].parity:
                transition = gc
    marked = []
    for c in crossings:
        is_ground = transition is not None and c.n == 0 and c.source == "ladder"
        marked.append(Crossing(c.g, c.energy, c.n, c.source, is_ground))
    result.crossings = marked
    result.transition_g = transition
    if exceptional_m >= 0:
        for m in range(exceptional_m + 1):
            result.exceptional.extend(exceptional_levels(m, params, (max(g_lo, 1e-3), g_hi)))
    return result

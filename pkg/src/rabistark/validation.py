"""Cross-checks of every solver against exact diagonalisation."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import collapse
from .ed import diagonalize
from .gfunction import pole_set
from .model import ModelParams, Parity
from .spectrum import find_regular_levels, juddian_gcn

__all__ = ["Check", "GRIDS", "regular_vs_ed", "juddian_degeneracy", "collapse_vs_ed", "run"]

GRIDS = {
    "standard": {"delta": (0.5, 1.0), "u": (-1.0, 1.0, 1.9), "g": (0.1, 0.7)},
    "quick": {"delta": (0.5,), "u": (1.0, -1.0), "g": (0.1, 0.7)},
}


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    tol: float
    passed: bool

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"{flag}  {self.name}: {self.value:.3e} (tol {self.tol:.1e})"


def regular_vs_ed(params: ModelParams, n_tr: int = 300, span: float = 3.0,
                  tol: float = 1e-6) -> Check:
    """Match G-function roots to ED levels one-to-one within a window.

    The window starts just under the ED ground state and is ``span`` wide.
    ED levels sitting on a pole line (exceptional) are left out because the
    regular route does not produce them.
    """
    ref = diagonalize(params, n_tr)
    lo = ref.eigenvalues[0] - 0.05
    hi = lo + span
    worst = 0.0
    poles = pole_set(params, e_max=hi)
    on_pole = [params.omega * 1e-7 > min(abs(e - q) for q in [poles.pole0, *poles.poles])
               for e in ref.eigenvalues]
    for par in (Parity.EVEN, Parity.ODD):
        roots = np.array([lv.energy for lv in find_regular_levels(params, par, (lo, hi))])
        mask = (ref.parities == int(par)) & (ref.eigenvalues >= lo) & (ref.eigenvalues <= hi)
        mask &= ~np.array(on_pole)
        expected = ref.eigenvalues[mask]
        # levels within tol of the window edges may legitimately be missed
        inner = expected[(expected > lo + tol) & (expected < hi - tol)]
        if len(roots) < len(inner):
            worst = math.inf
            continue
        for e in inner:
            worst = max(worst, float(np.min(np.abs(roots - e))))
        for r in roots:
            worst = max(worst, float(np.min(np.abs(expected - r))) if len(expected) else math.inf)
    name = (f"G roots vs ED  delta={params.delta:g} u={params.u:g} g={params.g:g}")
    return Check(name, worst, tol, worst <= tol)


def juddian_degeneracy(delta: float, u: float, n: int, n_tr: int = 400,
                       tol: float = 1e-6) -> Check:
    base = ModelParams(delta, 0.0, u)
    gc = juddian_gcn(n, base)
    ref = diagonalize(base.with_g(gc), n_tr)
    e_cross = -delta / u
    idx = np.argsort(np.abs(ref.eigenvalues - e_cross))[:2]
    gap = float(abs(ref.eigenvalues[idx[0]] - ref.eigenvalues[idx[1]]))
    off = float(np.max(np.abs(ref.eigenvalues[idx] - e_cross)))
    worst = max(gap, off)
    return Check(f"Juddian n={n} delta={delta:g} u={u:g} (gap, offset from -delta/u)",
                 worst, tol, worst <= tol)


def collapse_vs_ed(delta: float, g: float, lower: int = 5, upper: int = 3,
                   n_tr: int = 2000, tol: float = 1e-4) -> Check:
    ref = diagonalize(ModelParams(delta, g, 2.0), n_tr).eigenvalues
    worst = 0.0
    for i, sol in enumerate(collapse.lower_branch(delta, g, lower)):
        worst = max(worst, abs(sol.energy - ref[i]))
    for sol in collapse.upper_branch(delta, g, upper):
        worst = max(worst, float(np.min(np.abs(ref - sol.energy))))
    return Check(f"collapse branches vs ED delta={delta:g} g={g:g}", worst, tol, worst <= tol)


def run(grid: str = "standard"):
    """Run the cross-check suite; returns the list of :class:`Check`."""
    if grid not in GRIDS:
        raise ValueError(f"unknown grid {grid!r}; choose from {sorted(GRIDS)}")
    cfg = GRIDS[grid]
    checks = []
    for d in cfg["delta"]:
        for u in cfg["u"]:
            for g in cfg["g"]:
                checks.append(regular_vs_ed(ModelParams(d, g, u)))
    for n in range(4 if grid == "standard" else 2):
        checks.append(juddian_degeneracy(0.5, 1.0, n))
    checks.append(collapse_vs_ed(0.5, 0.3, n_tr=2000 if grid == "standard" else 1000))
    return checks

"""Truncated-Fock exact diagonalisation, the independent reference spectrum.

The Hamiltonian is the y-rotated Rabi-Stark form

    H = a^dag a + g (a^dag + a) sigma_z - (Delta + U a^dag a) sigma_x / 2

kept up to photon number ``n_tr``.  Full mode assembles the dense
``2(n_tr+1)`` block matrix in the sigma_z basis.  Sector mode works in the
sigma_x basis where each parity block is a tridiagonal chain
``|0,s>, |1,-s>, |2,s>, ...`` and is solved with LAPACK's tridiagonal
eigensolver.  Eigenvectors are always returned in the sigma_z block basis
``[upper; lower]``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .model import ModelParams, Parity, apply_parity

__all__ = [
    "EDResult",
    "ConvergenceTable",
    "build_hamiltonian",
    "sector_hamiltonian",
    "diagonalize",
    "convergence_sweep",
    "MAX_TRUNCATION",
]

MAX_TRUNCATION = 20000


def _check_ntr(n_tr):
    if int(n_tr) != n_tr or n_tr < 1:
        raise ValueError("n_tr must be an integer >= 1")
    if n_tr > MAX_TRUNCATION:
        raise ValueError(f"n_tr={n_tr} exceeds the supported maximum {MAX_TRUNCATION}")
    return int(n_tr)


def build_hamiltonian(params: ModelParams, n_tr: int) -> np.ndarray:
    """Dense symmetric matrix of dimension ``2 (n_tr + 1)`` (physical units).

    Block layout: ``[[n + g x, -(Delta + U n)/2], [-(Delta + U n)/2, n - g x]]``
    with ``x = a^dag + a``.
    """
    n_tr = _check_ntr(n_tr)
    p = params.normalized()
    dim = n_tr + 1
    n = np.arange(dim, dtype=float)
    x = np.diag(np.sqrt(n[1:]), 1)
    x = x + x.T
    num = np.diag(n)
    spin = -0.5 * np.diag(p.delta + p.u * n)
    h = np.block([[num + p.g * x, spin], [spin, num - p.g * x]])
    return h * params.omega


def sector_hamiltonian(params: ModelParams, n_tr: int, parity):
    """Diagonal and off-diagonal of one parity block (physical units).

    Basis state k is ``|k> (x) |sigma_x = s_k>`` with
    ``s_k = parity * (-1)^k``.
    """
    n_tr = _check_ntr(n_tr)
    par = int(Parity.coerce(parity))
    p = params.normalized()
    k = np.arange(n_tr + 1, dtype=float)
    s = par * np.where(np.arange(n_tr + 1) % 2 == 0, 1.0, -1.0)
    diag = k - 0.5 * s * (p.delta + p.u * k)
    off = p.g * np.sqrt(k[1:])
    return diag * params.omega, off * params.omega, s


@dataclass
class EDResult:
    """Truncated-Fock eigensystem (energies ascending)."""

    n_tr: int
    eigenvalues: np.ndarray
    parities: np.ndarray
    photon_numbers: np.ndarray
    eigenvectors: np.ndarray | None = None
    params: ModelParams | None = None
    mode: str = "sector"
    meta: dict = field(default_factory=dict)

    def sector(self, parity) -> np.ndarray:
        """Eigenvalues belonging to one parity sector."""
        par = int(Parity.coerce(parity))
        return self.eigenvalues[self.parities == par]

    def below(self, energy: float) -> int:
        return int(np.count_nonzero(self.eigenvalues < energy))

    def gap_at(self, energy: float) -> float:
        """Splitting of the two eigenvalues closest to ``energy``."""
        idx = np.argsort(np.abs(self.eigenvalues - energy))[:2]
        return float(abs(self.eigenvalues[idx[0]] - self.eigenvalues[idx[1]]))

    def to_dict(self) -> dict:
        out = {
            "n_tr": self.n_tr,
            "mode": self.mode,
            "eigenvalues": [float(v) for v in self.eigenvalues],
            "parities": [int(v) for v in self.parities],
            "photon_numbers": [float(v) for v in self.photon_numbers],
        }
        if self.params is not None:
            out["params"] = {"delta": self.params.delta, "omega": self.params.omega,
                             "u": self.params.u, "g": self.params.g}
        return out

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def _sector_solve(params, n_tr, parity, with_vectors):
    diag, off, s = sector_hamiltonian(params, n_tr, parity)
    vals, vecs = linalg.eigh_tridiagonal(diag, off, lapack_driver="stemr")
    k = np.arange(n_tr + 1, dtype=float)
    photons = (vecs * vecs).T @ k
    full = None
    if with_vectors:
        # |k, s> = (|k, up> + s |k, down>) / sqrt(2)
        full = np.vstack([vecs, s[:, None] * vecs]) / math.sqrt(2.0)
    return vals, photons, full


def _label_full(vals, vecs, n_tr, tol=1e-9):
    """Parity labels for a dense eigensystem, rotating degenerate clusters."""
    dim = n_tr + 1
    parities = np.zeros(len(vals), dtype=int)
    i = 0
    while i < len(vals):
        j = i + 1
        while j < len(vals) and vals[j] - vals[i] < tol * max(1.0, abs(vals[i])):
            j += 1
        block = vecs[:, i:j]
        pu, pl = apply_parity(block[:dim], block[dim:])
        proj = block.T @ np.vstack([pu, pl])
        pv, rot = np.linalg.eigh(0.5 * (proj + proj.T))
        vecs[:, i:j] = block @ rot
        parities[i:j] = np.where(pv > 0, 1, -1)
        i = j
    return parities


def diagonalize(params: ModelParams, n_tr: int, with_vectors: bool = False,
                by_sector: bool = True, parity=None) -> EDResult:
    """Diagonalise the truncated Hamiltonian.

    Any ``|U| <= 2 omega`` is accepted, so the collapse regime can be
    studied too.  With ``parity`` set only that sector is returned.
    """
    n_tr = _check_ntr(n_tr)
    if abs(params.stark_ratio) > 2.0:
        raise ValueError("the oracle is limited to |u| <= 2 omega")
    if parity is not None and not by_sector:
        raise ValueError("a single parity requires by_sector=True")
    if by_sector:
        sectors = [Parity.coerce(parity)] if parity is not None else [Parity.EVEN, Parity.ODD]
        vals, pars, phots, vecs = [], [], [], []
        for par in sectors:
            v, ph, vec = _sector_solve(params, n_tr, par, with_vectors)
            vals.append(v)
            phots.append(ph)
            pars.append(np.full(len(v), int(par)))
            if with_vectors:
                vecs.append(vec)
        vals = np.concatenate(vals)
        order = np.argsort(vals, kind="stable")
        eigvecs = np.hstack(vecs)[:, order] if with_vectors else None
        return EDResult(n_tr, vals[order], np.concatenate(pars)[order],
                        np.concatenate(phots)[order], eigvecs, params, "sector")

    h = build_hamiltonian(params, n_tr)
    try:
        vals, vecs = linalg.eigh(h)
    except linalg.LinAlgError as exc:
        cond = np.linalg.cond(h)
        raise RuntimeError(f"dense eigensolver failed (condition number {cond:.3e})") from exc
    parities = _label_full(vals, vecs, n_tr)
    dim = n_tr + 1
    k = np.arange(dim, dtype=float)
    photons = (vecs[:dim] ** 2 + vecs[dim:] ** 2).T @ k
    return EDResult(n_tr, vals, parities, photons, vecs if with_vectors else None,
                    params, "full")


@dataclass
class ConvergenceTable:
    """Lowest levels across truncations; ``drift`` compares the last two."""

    n_tr: list
    energies: np.ndarray  # shape (len(n_tr), level_count)
    drift: np.ndarray
    converged: np.ndarray
    threshold: float

    def rows(self):
        for i, nt in enumerate(self.n_tr):
            for lev, e in enumerate(self.energies[i]):
                yield nt, lev, float(e)


def convergence_sweep(params: ModelParams, n_tr_list, level_count: int,
                      threshold: float = 1e-8, parity=None) -> ConvergenceTable:
    """Rerun the eigensolve over several truncations and flag drifting levels."""
    n_list = sorted(_check_ntr(n) for n in n_tr_list)
    if not n_list:
        raise ValueError("n_tr_list must not be empty")
    rows = []
    for nt in n_list:
        res = diagonalize(params, nt, parity=parity)
        ev = np.full(level_count, np.nan)
        m = min(level_count, len(res.eigenvalues))
        ev[:m] = res.eigenvalues[:m]
        rows.append(ev)
    energies = np.array(rows)
    if len(n_list) > 1:
        drift = np.abs(energies[-1] - energies[-2])
    else:
        drift = np.full(level_count, np.nan)
    converged = drift < threshold
    return ConvergenceTable(n_list, energies, drift, converged, threshold)

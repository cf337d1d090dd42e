"""Exact spectrum of the quantum Rabi-Stark model.

Regular levels come from zeros of the G-function, exceptional levels from
the pole structure, the |U| = 2 omega spectrum from an effective
oscillator, and a truncated-Fock diagonalisation serves as the reference.
"""
from .model import (
    ConvergenceError,
    CoefficientSeries,
    ModelParams,
    Parity,
    PoleProximityError,
    RegimeError,
    TruncationError,
    WavefunctionFock,
    coefficient_series,
    decoupled_levels,
    fock_coefficients,
    omega_ratio,
    shift_w,
)
from .gfunction import GCurve, PoleSet, evaluate_g, g_curve, omega_pole, pole_0, pole_n, pole_set
from .spectrum import (
    Crossing,
    EnergyLevel,
    NoFirstOrderTransition,
    SpectrumSweep,
    crossing_energy,
    exceptional_g,
    exceptional_levels,
    exceptional_nondegenerate,
    find_regular_levels,
    juddian_gc,
    juddian_gcn,
    juddian_general,
    n_max,
    sweep,
)
from .ed import EDResult, build_hamiltonian, convergence_sweep, diagonalize
from . import collapse

__version__ = "0.1.0"

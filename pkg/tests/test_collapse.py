import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import hermite_numpy
from rabistark import ModelParams, RegimeError, TruncationError, diagonalize
from rabistark import collapse as cl

D, G = 0.5, 0.3


@pytest.fixture(scope="module")
def ed_u2():
    return diagonalize(ModelParams(D, G, 2.0), 2000, with_vectors=True)


class TestBasics:
    def test_collapse_point(self):
        gc, ec = cl.critical_point(D)
        assert gc == pytest.approx(0.5, abs=1e-15)
        assert ec == pytest.approx(-0.75, abs=1e-15)
        assert cl.collapse_energy(D, G) == pytest.approx(-0.43, abs=1e-15)

    def test_regime_errors(self):
        with pytest.raises(RegimeError):
            cl.collapse_energy(D, G, u=1.0)
        with pytest.raises(cl.NoCollapse):
            cl.critical_point(1.5)
        with pytest.raises(cl.NoLowerBranch):
            cl.solve_lower(D, 0.6, 0)
        with pytest.raises(cl.NoLowerBranch):
            cl.solve_lower(D, 0.0, 0)
        with pytest.raises(ValueError):
            cl.omega_eff(D, G, -0.3)

    def test_mirror_delta(self):
        assert cl.collapse_energy(D, G, u=-2.0) == pytest.approx(0.25 - 0.18)


class TestBranches:
    @given(st.floats(0.05, 0.95), st.floats(0.02, 0.98), st.integers(0, 30))
    @settings(max_examples=60)
    def test_lower_residual_and_bounds(self, delta, frac, n):
        g = frac * math.sqrt(0.5 * (1 - delta))
        e = cl.solve_lower(delta, g, n)
        ec = cl.collapse_energy(delta, g)
        assert delta / 2 - 1 < e < ec
        lhs = cl.lower_lhs(delta, g, e)
        # lhs ~ tau^(-1/2), so rounding of E near E_c adds lhs * eps|E| / (2 tau)
        rounding = lhs * 4 * np.finfo(float).eps * max(1.0, abs(e)) / (2 * (ec - e))
        assert abs(lhs - (2 * n + 1)) < 1e-10 * (2 * n + 1) + rounding

    @given(st.floats(0.05, 0.95), st.floats(0.0, 1.5), st.integers(0, 5))
    @settings(max_examples=60)
    def test_upper_residual(self, delta, g, n):
        e = cl.solve_upper(delta, g, n)
        assert e > -delta / 2
        assert abs(cl.upper_lhs(delta, g, e) - (2 * n + 1)) < 1e-10 * (2 * n + 1)

    def test_solution_residual_property(self):
        for s in cl.lower_branch(D, G, 5) + cl.upper_branch(D, G, 3):
            assert s.residual < 1e-10

    def test_accumulation(self):
        levels = [s.energy for s in cl.lower_branch(D, G, 25)]
        gaps = np.diff(levels)
        assert np.all(gaps > 0)
        assert np.all(np.diff(gaps) < 0)
        assert levels[-1] < cl.collapse_energy(D, G)
        assert cl.collapse_energy(D, G) - levels[-1] < 1e-3

    def test_against_ed(self, ed_u2):
        ev = ed_u2.eigenvalues
        for i, s in enumerate(cl.lower_branch(D, G, 5)):
            assert abs(s.energy - ev[i]) < 1e-8
        for s in cl.upper_branch(D, G, 3):
            assert np.min(np.abs(ev - s.energy)) < 1e-8

    @pytest.mark.parametrize("g", [0.3, 0.6])
    def test_negative_u_mirror(self, g):
        ev = diagonalize(ModelParams(D, g, -2.0), 1000).eigenvalues
        ours = [s.energy for s in cl.lower_branch(D, g, 3, u=-2.0)]
        ours += [s.energy for s in cl.upper_branch(D, g, 2, u=-2.0)]
        for e in ours:
            assert np.min(np.abs(ev - e)) < 1e-5


class TestPhotonNumber:
    def test_sign_and_divergence(self):
        ec = cl.collapse_energy(D, G)
        values = [cl.photon_number_approx(D, G, ec - t) for t in (1e-2, 1e-3, 1e-4)]
        assert all(v > 0 for v in values)
        assert values[0] < values[1] < values[2]
        with pytest.raises(ZeroDivisionError):
            cl.photon_number_approx(D, G, ec)

    def test_against_ed(self, ed_u2):
        for s in cl.lower_branch(D, G, 8)[4:]:
            i = int(np.argmin(np.abs(ed_u2.eigenvalues - s.energy)))
            approx = cl.photon_number_approx(D, G, s.energy)
            assert abs(approx - ed_u2.photon_numbers[i]) < 0.2 * ed_u2.photon_numbers[i]


class TestWavefunction:
    def test_hermite_matches_numpy(self):
        xi = np.linspace(-6, 6, 301)
        ours = cl.hermite_functions(12, xi)
        for n in range(13):
            assert np.allclose(ours[n], hermite_numpy(n, xi), atol=1e-12)

    def test_zero_coupling(self):
        x = np.linspace(-12, 12, 4001)
        e = cl.solve_upper(D, 0.0, 0)
        p1, p2 = cl.wavefunction_ho(D, 0.0, 0, e, x)
        assert np.all(p2 == 0)
        assert np.allclose(p1, np.pi ** -0.25 * np.exp(-x * x / 2), atol=1e-8)

    @pytest.mark.parametrize("n", [0, 1, 2, 3, 4])
    def test_nodes(self, n):
        e = cl.solve_lower(D, G, n)
        x = np.linspace(-80, 80, 40001)
        p1, _ = cl.wavefunction_ho(D, G, n, e, x)
        core = p1[np.abs(p1) > 1e-8 * np.max(np.abs(p1))]
        assert int(np.count_nonzero(np.diff(np.sign(core)) != 0)) == n

    def test_narrow_grid(self):
        e = cl.solve_lower(D, G, 3)
        with pytest.raises(TruncationError):
            cl.wavefunction_ho(D, G, 3, e, np.linspace(-1, 1, 101))

    def test_overlap_with_ed(self, ed_u2):
        dim = ed_u2.n_tr + 1
        x = np.linspace(-60, 60, 24001)
        sols = cl.lower_branch(D, G, 3) + cl.upper_branch(D, G, 2)
        for s in sols:
            i = int(np.argmin(np.abs(ed_u2.eigenvalues - s.energy)))
            v = ed_u2.eigenvectors[:, i]
            up, lo = v[:dim], v[dim:]
            # first component lives on sigma_x = -1, second on sigma_x = +1
            minus = cl.fock_to_position((up - lo) / math.sqrt(2), x)
            plus = cl.fock_to_position((up + lo) / math.sqrt(2), x)
            p1, p2 = cl.wavefunction_ho(D, G, s.n, s.energy, x)
            assert abs(np.trapezoid(p1 * minus + p2 * plus, x)) >= 0.999

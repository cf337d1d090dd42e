import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rabistark import ModelParams, Parity, build_hamiltonian, convergence_sweep, diagonalize
from rabistark.ed import MAX_TRUNCATION, sector_hamiltonian
from rabistark.model import apply_parity

params_st = st.builds(ModelParams, st.floats(0.1, 2.0), st.floats(0.0, 1.5), st.floats(-2.0, 2.0))


class TestMatrix:
    @given(params_st, st.integers(1, 30))
    @settings(max_examples=30)
    def test_symmetric(self, p, n_tr):
        h = build_hamiltonian(p, n_tr)
        assert h.shape == (2 * (n_tr + 1),) * 2
        assert np.array_equal(h, h.T)

    def test_parity_commutes(self):
        p = ModelParams(0.7, 0.4, 1.3)
        h = build_hamiltonian(p, 20)
        eye = np.eye(42)
        pu, pl = apply_parity(eye[:21], eye[21:])
        par = np.vstack([pu, pl])
        assert np.allclose(h @ par, par @ h)

    def test_truncation_bounds(self):
        with pytest.raises(ValueError):
            diagonalize(ModelParams(0.5, 0.1, 1.0), 0)
        with pytest.raises(ValueError):
            diagonalize(ModelParams(0.5, 0.1, 1.0), MAX_TRUNCATION + 1)
        with pytest.raises(ValueError):
            diagonalize(ModelParams(0.5, 0.1, 2.5), 10)


class TestSpectrum:
    @given(params_st, st.integers(2, 25))
    @settings(max_examples=25, deadline=None)
    def test_sector_equals_full(self, p, n_tr):
        a = diagonalize(p, n_tr)
        b = diagonalize(p, n_tr, by_sector=False)
        assert np.allclose(a.eigenvalues, b.eigenvalues, atol=1e-9)
        assert len(a.sector(Parity.EVEN)) == len(a.sector(Parity.ODD)) == n_tr + 1

    def test_full_parity_labels(self):
        p = ModelParams(0.5, 0.3, 1.0)
        a = diagonalize(p, 40)
        b = diagonalize(p, 40, by_sector=False)
        low = a.eigenvalues < 10
        assert np.array_equal(a.parities[low], b.parities[low])

    @given(params_st)
    @settings(max_examples=20, deadline=None)
    def test_variational(self, p):
        small = diagonalize(p, 20).eigenvalues[:10]
        large = diagonalize(p, 40).eigenvalues[:10]
        assert np.all(large <= small + 1e-10)

    def test_vectors(self):
        p = ModelParams(0.5, 0.6, -1.0)
        res = diagonalize(p, 60, with_vectors=True)
        h = build_hamiltonian(p, 60)
        v = res.eigenvectors[:, :6]
        assert np.allclose(h @ v, v * res.eigenvalues[:6], atol=1e-10)
        dim = 61
        for i in range(6):
            pu, pl = apply_parity(v[:dim, i], v[dim:, i])
            expval = np.concatenate([pu, pl]) @ v[:, i]
            assert abs(expval - res.parities[i]) < 1e-12
        assert np.all(res.photon_numbers >= 0)

    def test_single_sector(self):
        p = ModelParams(0.5, 0.3, 1.0)
        odd = diagonalize(p, 50, parity="-")
        assert np.all(odd.parities == -1)
        assert np.allclose(odd.eigenvalues, diagonalize(p, 50).sector(Parity.ODD))
        with pytest.raises(ValueError):
            diagonalize(p, 50, parity="+", by_sector=False)

    def test_sector_chain(self):
        diag, off, s = sector_hamiltonian(ModelParams(0.5, 0.2, 1.0), 3, Parity.EVEN)
        assert np.allclose(s, [1, -1, 1, -1])
        assert np.allclose(diag, [-0.25, 1.75, 0.75, 4.75])
        assert np.allclose(off, 0.2 * np.sqrt([1, 2, 3]))

    def test_omega_units(self):
        a = diagonalize(ModelParams(0.5, 0.3, 1.0), 40).eigenvalues
        b = diagonalize(ModelParams(1.0, 0.6, 2.0, omega=2.0), 40).eigenvalues
        assert np.allclose(b, 2 * a)

    def test_json(self):
        res = diagonalize(ModelParams(0.5, 0.3, 1.0), 5)
        text = res.to_json()
        assert '"n_tr": 5' in text and '"params"' in text


class TestConvergence:
    def test_table(self):
        table = convergence_sweep(ModelParams(0.5, 0.3, 1.0), [200, 25, 50], 5)
        assert table.n_tr == [25, 50, 200]
        assert table.energies.shape == (3, 5)
        assert np.all(table.converged)
        assert len(list(table.rows())) == 15

    def test_flags_drift(self):
        table = convergence_sweep(ModelParams(0.5, 0.1, 2.0), [50, 100], 30)
        assert not np.all(table.converged)

    def test_empty(self):
        with pytest.raises(ValueError):
            convergence_sweep(ModelParams(0.5, 0.3, 1.0), [], 3)

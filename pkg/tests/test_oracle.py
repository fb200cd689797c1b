import numpy as np
import pytest

from cpbath.dynamics import integrate
from cpbath.errors import DimensionMismatch
from cpbath.geometry import to_projective
from cpbath.hamiltonians import SIGMA_X, SIGMA_Z, HermitianOperator, TwoQubitCoefficients, two_qubit_hamiltonian
from cpbath.oracle import integrate_schrodinger, populations_from_amplitudes

from conftest import REF_AMPS, random_amplitudes, random_hermitian


def test_sigma_z_eigenstate():
    tr = integrate_schrodinger(HermitianOperator(SIGMA_Z), [1, 0], 3.0, 0.1)
    np.testing.assert_allclose(tr.amplitudes[:, 0], np.exp(-1j * tr.times), atol=1e-14)
    assert np.all(tr.amplitudes[:, 1] == 0)


@pytest.mark.parametrize("method", ["eigen", "rk"])
def test_rabi_flopping(method):
    tr = integrate_schrodinger(HermitianOperator(SIGMA_X), [1, 0], 5.0, 0.1, method=method)
    np.testing.assert_allclose(tr.populations[:, 0], np.cos(tr.times) ** 2, atol=1e-9)


def test_ref_state_matches_classical_flow():
    H = two_qubit_hamiltonian(TwoQubitCoefficients())
    q = integrate_schrodinger(H, REF_AMPS, 20.0, 0.1)
    c = integrate(H, to_projective(REF_AMPS, 3), None, 20.0, 0.1)
    assert np.max(np.abs(q.populations - c.populations)) < 1e-8


def test_populations_from_amplitudes():
    np.testing.assert_allclose(populations_from_amplitudes(REF_AMPS), [0.4, 0.4, 0, 0.2], atol=1e-15)
    np.testing.assert_array_equal(populations_from_amplitudes([0, 1, 0]), [0, 1, 0])
    np.testing.assert_allclose(populations_from_amplitudes(np.ones(2) / np.sqrt(2)), [0.5, 0.5])


def test_norm_energy_and_paths_agree(rng):
    for n in (2, 5, 8):
        H = random_hermitian(rng, n)
        a0 = random_amplitudes(rng, n)
        e = integrate_schrodinger(H, a0, 4.0, 0.2, method="eigen")
        r = integrate_schrodinger(H, a0, 4.0, 0.2, method="rk")
        assert np.max(np.abs(np.linalg.norm(e.amplitudes, axis=1) - 1)) < 1e-12
        assert np.max(np.abs(np.linalg.norm(r.amplitudes, axis=1) - 1)) < 1e-10
        assert np.max(np.abs(e.energy - e.energy[0])) < 1e-10
        assert np.max(np.abs(e.amplitudes - r.amplitudes)) < 1e-8


def test_errors():
    with pytest.raises(DimensionMismatch):
        integrate_schrodinger(HermitianOperator(np.eye(3)), [1, 0], 1.0, 0.1)
    with pytest.raises(ValueError):
        integrate_schrodinger(HermitianOperator(np.eye(2)), [1, 1], 1.0, 0.1)
    with pytest.raises(ValueError):
        integrate_schrodinger(HermitianOperator(np.eye(2)), [1, 0], 1.0, 0.1, method="magic")

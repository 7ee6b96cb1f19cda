import math

import numpy as np
import pytest

from uscgate.errors import CutoffError, UsageError
from uscgate.numerics import expm_phase
from uscgate.operators import (
    BosonSpec,
    EnsembleSpec,
    SystemLayout,
    boson_operators,
    coherent_state,
    dicke_all_down,
    dicke_all_up,
    effective_jx,
    fock_cutoff_rule,
    full_qubit_oracle,
    hamiltonian_full,
    hamiltonian_h0,
    initial_state,
    qubit_collective_operators,
    spin_operators,
    total_jz,
)

SQRT2 = math.sqrt(2)


def test_spin_half_is_pauli_over_two():
    jx, jy, jz = spin_operators(0.5)
    # basis ordered m = -1/2, +1/2, i.e. (|1>, |0>)
    np.testing.assert_array_equal(jx, [[0, 0.5], [0.5, 0]])
    np.testing.assert_array_equal(jy, [[0, 0.5j], [-0.5j, 0]])
    np.testing.assert_array_equal(jz, np.diag([-0.5, 0.5]))


@pytest.mark.parametrize("j", [0.5, 1, 1.5, 5, 10.5])
def test_spin_algebra(j):
    jx, jy, jz = spin_operators(j)
    assert np.max(np.abs(jx @ jy - jy @ jx - 1j * jz)) < 1e-13
    assert np.max(np.abs(jy @ jz - jz @ jy - 1j * jx)) < 1e-12
    casimir = jx @ jx + jy @ jy + jz @ jz
    assert np.max(np.abs(casimir - j * (j + 1) * np.eye(int(2 * j + 1)))) < 1e-12


@pytest.mark.parametrize("j", [0, 0.3, -1])
def test_spin_rejects_bad_j(j):
    with pytest.raises(UsageError):
        spin_operators(j)


def test_boson_operators():
    a, ad = boson_operators(6)
    one = np.eye(7)[1]
    np.testing.assert_allclose(a @ one, np.eye(7)[0])
    np.testing.assert_allclose(ad @ a, np.diag(np.arange(7)), atol=1e-14)
    comm = a @ ad - ad @ a
    expected = np.eye(7)
    expected[-1, -1] = -6  # DERIVED: truncation defect at the top level
    np.testing.assert_allclose(comm, expected, atol=1e-13)
    with pytest.raises(UsageError):
        boson_operators(0)


def test_coherent_state():
    vac = coherent_state(BosonSpec(0.0, 5))
    np.testing.assert_array_equal(vac, np.eye(6)[0])
    psi = coherent_state(BosonSpec(SQRT2, 30))
    assert abs(np.linalg.norm(psi) - 1) < 1e-12
    n = np.arange(31)
    assert abs(np.sum(n * np.abs(psi) ** 2) - 2.0) < 1e-8


def test_coherent_state_is_annihilation_eigenvector():
    alpha = 1.2 - 0.7j
    psi = coherent_state(BosonSpec(alpha, 40))
    a, _ = boson_operators(40)
    assert np.linalg.norm(a @ psi - alpha * psi) < 1e-8


def test_coherent_state_cutoff_error():
    with pytest.raises(CutoffError) as err:
        coherent_state(BosonSpec(3.0, 10))
    assert err.value.suggested_n_max > 10


def test_dicke_states():
    for n in (1, 2, 7):
        jz = spin_operators(n / 2)[2]
        down, up = dicke_all_down(n), dicke_all_up(n)
        assert np.vdot(down, jz @ down).real == pytest.approx(-n / 2)
        assert np.vdot(up, jz @ up).real == pytest.approx(n / 2)
        assert np.linalg.norm(down) == 1
    # N = 2: the Dicke image of |11> is m = -1
    v = full_qubit_oracle(2)
    np.testing.assert_allclose(v @ dicke_all_down(2), np.eye(4)[3])


def test_effective_jx():
    single = SystemLayout.single(3, 0.4, n_max=2)
    np.testing.assert_allclose(effective_jx(single, embed=False), spin_operators(1.5)[0])
    equal = SystemLayout((EnsembleSpec(1, 0.3), EnsembleSpec(1, 0.3)), BosonSpec(0, 2))
    jx = spin_operators(0.5)[0]
    want = (np.kron(jx, np.eye(2)) + np.kron(np.eye(2), jx)) / SQRT2
    np.testing.assert_allclose(effective_jx(equal, embed=False), want, atol=1e-15)
    lone = SystemLayout((EnsembleSpec(2, 0.3), EnsembleSpec(1, 0.0)), BosonSpec(0, 2))
    np.testing.assert_allclose(effective_jx(lone, embed=False), np.kron(spin_operators(1)[0], np.eye(2)))
    assert effective_jx(single).shape == (12, 12)
    with pytest.raises(UsageError):
        effective_jx(SystemLayout.single(2, 0.0, n_max=3))


def test_effective_jx_spectrum():
    layout = SystemLayout.two_ensembles(3, 2, 0.7, 0.3, n_max=2)
    c, s = math.cos(0.3), math.sin(0.3)
    want = sorted(c * m1 + s * m2 for m1 in np.arange(-1.5, 2) for m2 in np.arange(-1, 2))
    np.testing.assert_allclose(np.linalg.eigvalsh(effective_jx(layout, embed=False)), want, atol=1e-13)


def test_layout_validation():
    with pytest.raises(UsageError):
        SystemLayout((EnsembleSpec(1, 0.1), EnsembleSpec(1, 0.5)))
    with pytest.raises(UsageError):
        SystemLayout.two_ensembles(1, 1, 0.5, math.pi / 3)
    with pytest.raises(UsageError):
        EnsembleSpec(0, 0.1)
    with pytest.raises(UsageError):
        SystemLayout(())
    layout = SystemLayout.two_ensembles(2, 3, 1 / SQRT2, 5 * math.pi / 36, SQRT2)
    assert layout.theta == pytest.approx(5 * math.pi / 36)
    assert layout.g == pytest.approx(1 / SQRT2)
    assert layout.indexing.dims == (3, 4, layout.n_max + 1)


@pytest.mark.parametrize(
    "alpha,g,spin,expected",
    [(SQRT2, 0.5, 5.0, 84), (SQRT2, 0.5, 5.5, 93), (SQRT2, 0.5, 1.0, 28), (0.0, 0.0, 1.0, 10)],
)
def test_cutoff_rule(alpha, g, spin, expected):
    # DERIVED: ceil(x^2 + 5x + 10), x = |alpha| + 2 g sum j
    assert fock_cutoff_rule(alpha, g, spin) == expected


def test_h0_limits():
    layout = SystemLayout.single(2, 0.0, n_max=4)
    _, ad = boson_operators(4)
    np.testing.assert_array_equal(hamiltonian_h0(layout), np.kron(np.eye(3), ad @ ad.conj().T))
    h = hamiltonian_h0(SystemLayout.single(3, 0.6, n_max=10))
    assert np.max(np.abs(h - h.conj().T)) < 1e-12


@pytest.mark.parametrize("g", [0.2, 0.5, 1.0])
def test_single_qubit_ground_energy(g):
    # DERIVED: displaced oscillator per Jx branch, E = -g^2 m^2 with m = +-1/2
    h = hamiltonian_h0(SystemLayout.single(1, g, n_max=60))
    assert np.linalg.eigvalsh(h)[0] == pytest.approx(-g * g / 4, abs=1e-12)


def test_hamiltonian_full():
    layout = SystemLayout.single(10, 0.5, SQRT2, n_max=12)
    np.testing.assert_array_equal(hamiltonian_full(layout, 0.0), hamiltonian_h0(layout))
    h = hamiltonian_full(layout, 0.01)
    np.testing.assert_allclose(h - hamiltonian_h0(layout), 0.01 * total_jz(layout), atol=1e-15)
    h0 = hamiltonian_h0(layout)
    assert np.linalg.norm(h @ h0 - h0 @ h) > 1e-3


def test_jx_conserved_jz_not():
    layout = SystemLayout.single(2, 0.5, SQRT2, n_max=40)
    psi0 = initial_state(layout)
    h0, jx, jz = hamiltonian_h0(layout), effective_jx(layout), total_jz(layout)
    # Jx commutes with both terms of H0; Jz does not
    assert np.linalg.norm(h0 @ jx - jx @ h0) < 1e-12
    assert np.linalg.norm(h0 @ jz - jz @ h0) > 1e-1
    psi = expm_phase(h0, 1.0) @ psi0
    assert abs(np.vdot(psi, jx @ psi) - np.vdot(psi0, jx @ psi0)) < 1e-12
    assert abs(np.vdot(psi, jz @ psi) - np.vdot(psi0, jz @ psi0)) > 1e-3


@pytest.mark.parametrize("n", [1, 2, 3])
def test_full_qubit_oracle(n):
    v = full_qubit_oracle(n)
    assert np.allclose(v.conj().T @ v, np.eye(n + 1), atol=1e-15)
    for full, dicke in zip(qubit_collective_operators(n), spin_operators(n / 2)):
        assert np.max(np.abs(v.conj().T @ full @ v - dicke)) < 1e-12


def test_full_qubit_oracle_n1_is_basis_relabelling():
    v = full_qubit_oracle(1)
    np.testing.assert_array_equal(np.abs(v), [[0, 1], [1, 0]])
    with pytest.raises(UsageError):
        full_qubit_oracle(4)


def test_initial_state():
    layout = SystemLayout.two_ensembles(1, 2, 0.5, 0.2, SQRT2)
    psi = initial_state(layout)
    assert psi.shape == (layout.dim,)
    assert abs(np.linalg.norm(psi) - 1) < 1e-12
    with pytest.raises(UsageError):
        initial_state(layout, np.ones(3))

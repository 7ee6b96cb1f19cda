import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from uscgate.errors import CutoffError, UsageError
from uscgate.numerics import expm_phase, reduced_density, schmidt_coefficients
from uscgate.operators import (
    SystemLayout,
    dicke_all_down,
    dicke_all_up,
    hamiltonian_h0,
    initial_state,
)
from uscgate.propagator import (
    FactoredPropagator,
    coefficients,
    coefficients_via_ode,
    disentangled_gate,
    displacement_check,
    evolve,
    factored_unitary,
    gate_design,
    interior_columns,
    interior_levels,
    twisting_gate,
)
from uscgate.verify import oracle_residual, ordering_residual

SQRT2 = math.sqrt(2)
TWO_PI = 2 * math.pi


@pytest.mark.parametrize("ordering", ["normal", "antinormal"])
def test_coefficients_vanish_at_zero(ordering):
    c = coefficients(0.0, 0.7, ordering)
    assert np.all(c.as_array() == 0)


def test_coefficients_at_first_revival():
    c = coefficients(TWO_PI, 0.5)
    assert c.s == pytest.approx(math.pi / 2, abs=1e-15)
    assert abs(c.p) < 1e-15 and abs(c.r) < 1e-15
    assert c.q == -TWO_PI


def test_coefficients_at_pi():
    # DERIVED: direct substitution with e^{-i pi} = -1
    c = coefficients(math.pi, 1.0)
    assert c.s == pytest.approx(math.pi + 2j, abs=1e-15)
    assert c.p == pytest.approx(2j, abs=1e-15)
    assert c.r == pytest.approx(2j, abs=1e-15)
    assert c.q == -math.pi


def test_antinormal_coefficients():
    c = coefficients(TWO_PI, 0.5, "antinormal")
    assert abs(c.P) < 1e-15 and abs(c.R) < 1e-15
    assert c.Q == pytest.approx(-1j * TWO_PI)
    assert c.s == pytest.approx(math.pi / 2, abs=1e-15)
    c = coefficients(math.pi, 1.0, "antinormal")
    assert c.P == pytest.approx(2.0) and c.R == pytest.approx(2.0)


def test_aliases():
    c = coefficients(1.1, 0.3)
    assert c.P == 1j * c.p and c.Q == 1j * c.q and c.R == 1j * c.r and c.S == 1j * c.s


@pytest.mark.parametrize("ordering", ["normal", "antinormal"])
def test_ode_matches_closed_form_at_revival(ordering):
    num = coefficients_via_ode(TWO_PI, 0.5, ordering)
    ref = coefficients(TWO_PI, 0.5, ordering)
    assert np.max(np.abs(num.as_array() - ref.as_array())) < 1e-8


@settings(max_examples=15, deadline=None)
@given(st.floats(0, 6 * math.pi), st.floats(0, 1), st.sampled_from(["normal", "antinormal"]))
def test_ode_matches_closed_form_sweep(tau, g, ordering):
    num = coefficients_via_ode(tau, g, ordering)
    ref = coefficients(tau, g, ordering)
    assert np.max(np.abs(num.as_array() - ref.as_array())) < 1e-8


def test_ode_edge_cases():
    assert np.all(coefficients_via_ode(0.0, 0.4).as_array() == 0)
    with pytest.raises(UsageError):
        coefficients_via_ode(-1.0, 0.4)
    with pytest.raises(UsageError):
        coefficients(1.0, 0.4, "weyl")


def test_factored_unitary_identity_at_zero():
    layout = SystemLayout.single(2, 0.5, SQRT2, 30)
    np.testing.assert_allclose(factored_unitary(0.0, layout), np.eye(layout.dim), atol=1e-13)


def test_factored_unitary_matches_dense_exponential():
    # DERIVED: dense eigendecomposition oracle, compared on columns whose support stays interior
    layout = SystemLayout.single(2, 0.5, SQRT2, 50)
    u = factored_unitary(math.pi / 3, layout)
    ref = expm_phase(hamiltonian_h0(layout), math.pi / 3)
    cols = interior_columns(layout, FactoredPropagator(layout).interior_levels())
    assert len(cols) >= 3 * 10
    assert np.linalg.norm(u[:, cols] - ref[:, cols], 2) < 1e-8


@pytest.mark.parametrize("n,g", [(1, 0.1), (2, 0.5), (3, 1 / SQRT2), (4, 0.5)])
def test_oracle_equivalence(n, g):
    assert oracle_residual(n, g, np.linspace(0, 6 * math.pi, 9)) < 1e-7


@pytest.mark.parametrize("n", [1, 2, 3])
def test_series_and_displacement_agree(n):
    layout = SystemLayout.single(n, 0.3, 0.0, 40)
    prop = FactoredPropagator(layout)
    for tau in (0.4, 2.0, 4.1):
        a = prop.matrix(tau, method="series")
        b = prop.matrix(tau, method="displacement")
        # both are the compression of the exact propagator onto the truncated space
        assert np.max(np.abs(a - b)) < 1e-10


def test_apply_matches_matrix():
    layout = SystemLayout.two_ensembles(2, 1, 0.6, 0.4, SQRT2, 40)
    prop = FactoredPropagator(layout)
    rng = np.random.default_rng(0)
    psi = rng.normal(size=layout.dim) + 1j * rng.normal(size=layout.dim)
    u = prop.matrix(2.3)
    np.testing.assert_allclose(prop.apply(2.3, psi), u @ psi, atol=1e-12)
    np.testing.assert_allclose(prop.apply(2.3, psi, adjoint=True), u.conj().T @ psi, atol=1e-12)


def test_apply_is_contractive_for_large_ensembles():
    # the literal series loses all precision at high Fock levels here; the default path must not
    layout = SystemLayout.single(10, 1 / SQRT2, SQRT2)
    prop = FactoredPropagator(layout)
    rng = np.random.default_rng(1)
    psi = rng.normal(size=layout.dim) + 1j * rng.normal(size=layout.dim)
    psi /= np.linalg.norm(psi)
    for tau in (1.5, math.pi, 5.0):
        out = prop.apply(tau, psi)
        assert np.all(np.isfinite(out))
        assert np.linalg.norm(out) <= 1 + 1e-12
        # physical state: the auto cutoff keeps leakage below 1e-8
        lab = prop.apply(tau, initial_state(layout))
        assert abs(np.linalg.norm(lab) - 1) < 1e-8


def test_unitary_on_interior_columns():
    layout = SystemLayout.single(3, 0.5, 0.0, 50)
    prop = FactoredPropagator(layout)
    cols = interior_columns(layout, prop.interior_levels())
    u = prop.matrix(2.7)[:, cols]
    assert np.linalg.norm(u.conj().T @ u - np.eye(len(cols)), 2) < 1e-8


@pytest.mark.parametrize("n_rev", [1, 2, 3])
def test_factorization_at_disentangling_times(n_rev):
    layout = SystemLayout.single(3, 0.5, SQRT2, 40)
    tau = TWO_PI * n_rev
    qubit_gate, boson_phase = disentangled_gate(tau, layout)
    assert np.max(np.abs(factored_unitary(tau, layout) - np.kron(qubit_gate, boson_phase))) < 1e-9


def test_disentangled_gate_rejects_generic_time():
    with pytest.raises(UsageError):
        disentangled_gate(3.0, SystemLayout.single(2, 0.5, n_max=5))


def _gate_state(g, tau=TWO_PI):
    qubit_gate, _ = disentangled_gate(tau, SystemLayout.single(2, g, n_max=5))
    return qubit_gate @ dicke_all_down(2)


def test_two_qubit_cat_at_quarter_turn():
    psi = _gate_state(0.5)
    target = np.exp(1j * math.pi / 4) / SQRT2 * (1j * dicke_all_up(2) + dicke_all_down(2))
    np.testing.assert_allclose(psi, target, atol=1e-12)


def test_two_qubit_flip_and_return():
    assert abs(np.vdot(dicke_all_up(2), _gate_state(1 / SQRT2))) ** 2 == pytest.approx(1, abs=1e-12)
    assert abs(np.vdot(dicke_all_down(2), _gate_state(1.0))) ** 2 == pytest.approx(1, abs=1e-12)


def test_twisting_gate_matches_disentangled_gate():
    layout = SystemLayout.two_ensembles(2, 2, 0.6, 0.3, n_max=5)
    qubit_gate, _ = disentangled_gate(TWO_PI, layout)
    np.testing.assert_allclose(twisting_gate(0.36 * TWO_PI, layout), qubit_gate, atol=1e-12)


@pytest.mark.parametrize("tau", [0.0, 1.3, TWO_PI, 4.0])
def test_displacement_relations(tau):
    r_a, r_ad = displacement_check(tau, SystemLayout.single(2, 0.5, 0.0, 50))
    assert r_a < 1e-7 and r_ad < 1e-7
    if tau == 0.0:
        assert r_a < 1e-12 and r_ad < 1e-12


def test_displacement_check_needs_room():
    with pytest.raises(UsageError):
        displacement_check(1.0, SystemLayout.single(2, 0.5, 0.0, 4), interior=None)


@pytest.mark.parametrize("seed", range(4))
def test_ordering_equivalence(seed):
    rng = np.random.default_rng(seed)
    tau, g = rng.uniform(0, 6 * math.pi), rng.uniform(0.05, 0.7)
    assert ordering_residual(2, g, tau) < 1e-7


@pytest.mark.parametrize("n_rev", [1, 2, 3])
def test_schmidt_rank_one_at_disentangling_times(n_rev):
    layout = SystemLayout.single(3, 0.4, SQRT2)
    psi = evolve(TWO_PI * n_rev, layout, initial_state(layout))
    sv = schmidt_coefficients(psi, layout.indexing, [0])
    assert sv[0] == pytest.approx(1.0, abs=1e-8)


def test_spin_state_period_eight_pi():
    layout = SystemLayout.single(4, 0.5, SQRT2)
    psi0 = initial_state(layout)
    rho0 = reduced_density(psi0, layout.indexing, [0])
    rho = reduced_density(evolve(8 * math.pi, layout, psi0), layout.indexing, [0])
    assert np.max(np.abs(rho - rho0)) < 1e-10


def test_leakage_guard():
    layout = SystemLayout.single(6, 0.7, 2.0, n_max=15)
    with pytest.raises(CutoffError) as err:
        factored_unitary(math.pi, layout)
    assert err.value.suggested_n_max > 15
    ok = layout.with_n_max(None)
    assert FactoredPropagator(ok).leakage(math.pi) < 1e-8


def test_interior_levels_rule():
    # DERIVED: largest n with n + 6 sqrt(n) + 10 <= 60 is 21
    assert interior_levels(60, 0.0) == 22
    assert interior_levels(60, 2.0) < interior_levels(60, 1.0)
    assert interior_levels(10, 5.0) == 1


@pytest.mark.parametrize("beta,n,g", [(0.5, 1, 0.5), (0.5, 2, 1 / math.sqrt(8)), (0.25, 1, math.sqrt(0.125)), (0, 3, 0)])
def test_gate_design(beta, n, g):
    d = gate_design(beta, n)
    assert d.g == pytest.approx(g, abs=1e-15)
    assert d.g**2 * TWO_PI * n == pytest.approx(math.pi * beta)
    assert d.t_gate is None


def test_gate_design_times():
    d = gate_design(0.5, 1, G=TWO_PI * 1e6)
    assert d.entangling_times(3) == pytest.approx([TWO_PI, 3 * TWO_PI, 5 * TWO_PI])
    # DERIVED: pi sqrt(2*1*0.5) / (2 pi 1e6) = 5e-7 s
    assert d.t_gate == pytest.approx(5e-7, rel=1e-15)
    assert gate_design(0.5, 2).entangling_times(2) == pytest.approx([4 * math.pi, 12 * math.pi])


@pytest.mark.parametrize("beta,n,G", [(0.6, 1, None), (-0.1, 1, None), (0.5, 0, None), (0.5, 1.5, None), (0.5, 1, -1.0)])
def test_gate_design_rejects(beta, n, G):
    with pytest.raises(UsageError):
        gate_design(beta, n, G)

import cmath
import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from prepost import qcore
from prepost.errors import DimensionMismatch, NotHermitian, ZeroVector

UP_X = np.array([1, 1]) / math.sqrt(2)
UP_Y = np.array([1, 1j]) / math.sqrt(2)


def test_normalize_scales():
    assert np.allclose(qcore.normalize([2, 0]).amplitudes, [1, 0])
    assert np.allclose(qcore.normalize([1, 1j]).amplitudes, [1 / math.sqrt(2), 1j / math.sqrt(2)])


def test_normalize_keeps_global_phase():
    s = qcore.normalize([1j, 0])
    assert s.amplitudes[0] == pytest.approx(1j)


def test_normalize_zero_vector():
    with pytest.raises(ZeroVector):
        qcore.normalize([0, 0])


def test_state_is_immutable():
    s = qcore.normalize([1, 0])
    with pytest.raises(ValueError):
        s.amplitudes[0] = 2


def test_inner_examples():
    assert qcore.inner([1, 0], [0, 1]) == 0
    psi = qcore.normalize([0.3, 0.4j, -1])
    assert qcore.inner(psi, psi) == pytest.approx(1, abs=1e-14)
    # <up_y|up_x> = (1*1 + (-i)*1) / 2
    assert qcore.inner(UP_Y, UP_X) == pytest.approx((1 - 1j) / 2, abs=1e-15)


def test_inner_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        qcore.inner([1, 0], [1, 0, 0])


def test_fidelity_examples():
    psi = qcore.normalize([1, 2j])
    assert qcore.state_fidelity(psi, psi) == pytest.approx(1)
    assert qcore.state_fidelity([1, 0], [0, 1]) == 0
    assert qcore.state_fidelity(UP_Y, UP_X) == pytest.approx(0.5, abs=1e-15)


def test_eigh_diagonal_and_identity():
    spec = qcore.eigh(qcore.SIGMA_Z)
    assert np.allclose(spec.eigenvalues, [-1, 1])
    spec = qcore.eigh(np.eye(3))
    assert np.allclose(spec.eigenvalues, 1)
    assert np.allclose(spec.eigenvectors.conj().T @ spec.eigenvectors, np.eye(3))


def test_eigh_sigma_x_analytic():
    spec = qcore.eigh(qcore.SIGMA_X)
    assert np.allclose(spec.eigenvalues, [-1, 1], atol=1e-15)
    for k, sign in enumerate((-1, 1)):
        expected = np.array([1, sign]) / math.sqrt(2)
        assert abs(np.vdot(expected, spec.eigenvectors[:, k])) == pytest.approx(1, abs=1e-12)


def test_eigh_rejects_non_hermitian():
    with pytest.raises(NotHermitian):
        qcore.eigh(np.array([[0, 1], [0, 0]]))


def test_unitary_trivial_cases(rng):
    H = qcore.random_hermitian(4, rng)
    assert np.allclose(qcore.unitary_from_hamiltonian(H, 0).entries, np.eye(4), atol=1e-14)
    for t in (-3.0, 0.5, 10.0):
        assert np.allclose(qcore.unitary_from_hamiltonian(np.zeros((3, 3)), t).entries, np.eye(3))


def test_unitary_sigma_z_analytic():
    t = 0.731
    U = qcore.unitary_from_hamiltonian(qcore.SIGMA_Z, t).entries
    assert np.allclose(U, np.diag([cmath.exp(-1j * t), cmath.exp(1j * t)]), atol=1e-15)


def test_unitary_matches_expm(rng):
    for d in (2, 5, 8):
        H = qcore.random_hermitian(d, rng)
        t = rng.uniform(-10, 10)
        U = qcore.unitary_from_hamiltonian(H, t).entries
        assert np.allclose(U, scipy.linalg.expm(-1j * t * H.entries), atol=1e-9)


def test_apply_examples():
    psi = qcore.normalize([0.6, 0.8j])
    out, norm = qcore.apply(np.eye(2), psi)
    assert np.allclose(out, psi.amplitudes) and norm == pytest.approx(1)
    out, _ = qcore.apply(qcore.SIGMA_X, [1, 0])
    assert np.allclose(out, [0, 1])
    t = 1.3
    out, _ = qcore.apply(np.diag([cmath.exp(-1j * t), cmath.exp(1j * t)]), [1, 0])
    assert np.allclose(out, [cmath.exp(-1j * t), 0])
    with pytest.raises(DimensionMismatch):
        qcore.apply(np.eye(3), [1, 0])


def test_pairs_round_trip(rng):
    m = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    pairs = qcore.to_pairs(m)
    assert pairs[0][1] == [m[0, 1].real, m[0, 1].imag]
    assert np.array_equal(qcore.from_pairs(pairs), m)


seeds = st.integers(0, 2**32 - 1)


@settings(max_examples=60, deadline=None)
@given(seed=seeds, d=st.integers(1, 8), t1=st.floats(-10, 10), t2=st.floats(-10, 10))
def test_unitary_group_law(seed, d, t1, t2):
    H = qcore.random_hermitian(d, np.random.default_rng(seed))
    u1 = qcore.unitary_from_hamiltonian(H, t1).entries
    u2 = qcore.unitary_from_hamiltonian(H, t2).entries
    u12 = qcore.unitary_from_hamiltonian(H, t1 + t2).entries
    assert np.max(np.abs(u1 @ u1.conj().T - np.eye(d))) <= 1e-9
    assert np.max(np.abs(u1 @ u2 - u12)) <= 1e-8


@settings(max_examples=60, deadline=None)
@given(seed=seeds, d=st.integers(1, 16))
def test_eigh_reconstruction(seed, d):
    H = qcore.random_hermitian(d, np.random.default_rng(seed))
    spec = qcore.eigh(H)
    assert np.all(np.diff(spec.eigenvalues) >= 0)
    assert np.max(np.abs(spec.reconstruct() - H.entries)) <= 1e-9


@settings(max_examples=60, deadline=None)
@given(seed=seeds, d=st.integers(1, 6), theta=st.floats(-10, 10))
def test_fidelity_symmetric_and_phase_blind(seed, d, theta):
    rng = np.random.default_rng(seed)
    a, b = qcore.random_state(d, rng), qcore.random_state(d, rng)
    f = qcore.state_fidelity(a, b)
    assert qcore.state_fidelity(b, a) == pytest.approx(f, abs=1e-12)
    rotated = qcore.State(np.exp(1j * theta) * a.amplitudes)
    assert qcore.state_fidelity(rotated, b) == pytest.approx(f, abs=1e-12)

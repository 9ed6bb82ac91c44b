import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hbnmem.qops import (
    DensityMatrix,
    DimensionError,
    HilbertSpace,
    StateVector,
    annihilation_operator,
    atomic_operator,
    commutator,
    dag,
    excitation_number,
    expectation,
    hermitian_eig,
    matmul,
    number_operator,
)


def test_basis_ordering():
    sp = HilbertSpace(2)
    assert sp.dim == 9
    assert sp.index("g", 0) == 0
    assert sp.index("e", 1) == 4
    assert sp.index("s", 2) == 8
    with pytest.raises(KeyError):
        sp.level_index("x")


def test_invalid_cutoff():
    with pytest.raises(ValueError):
        HilbertSpace(0)


def test_sigma_gg_projector():
    sp = HilbertSpace(1)
    p = atomic_operator("g", "g", sp)
    assert np.count_nonzero(p) == 2
    np.testing.assert_array_equal(np.diag(p).real, [1, 1, 0, 0, 0, 0])


@pytest.mark.parametrize("n_max", [1, 2, 4])
def test_atomic_operator_unit_entries(n_max):
    sp = HilbertSpace(n_max)
    op = atomic_operator("e", "s", sp)
    assert np.count_nonzero(op) == n_max + 1
    assert np.all(op[op != 0] == 1)


def test_annihilation_and_number():
    sp = HilbertSpace(3)
    a = annihilation_operator(sp)
    np.testing.assert_allclose(dag(a) @ a, number_operator(sp))
    v = sp.basis("g", 2)
    np.testing.assert_allclose(a @ v, np.sqrt(2) * sp.basis("g", 1))


def test_excitation_number_commutes_with_coupling():
    sp = HilbertSpace(2)
    a = annihilation_operator(sp)
    h = atomic_operator("e", "g", sp) @ a
    h = h + dag(h) + atomic_operator("s", "e", sp) + atomic_operator("e", "s", sp)
    assert np.abs(commutator(h, excitation_number(sp))).max() < 1e-14


def test_matmul_dimension_check():
    with pytest.raises(DimensionError):
        matmul(np.eye(3), np.eye(4))
    np.testing.assert_allclose(matmul(np.eye(3), 2 * np.eye(3), np.eye(3)), 2 * np.eye(3))


def test_expectation_examples():
    sp = HilbertSpace(1)
    rho = DensityMatrix.pure(sp, "g", 1)
    assert expectation(rho, atomic_operator("g", "g", sp)) == pytest.approx(1)
    assert expectation(rho, sp.identity()) == pytest.approx(1)
    mixed = DensityMatrix.maximally_mixed(sp)
    assert expectation(mixed, atomic_operator("s", "s", sp)).real == pytest.approx(1 / 3)
    with pytest.raises(DimensionError):
        expectation(rho, np.eye(9))


def test_density_matrix_validation():
    sp = HilbertSpace(1)
    with pytest.raises(ValueError):
        DensityMatrix(sp, np.eye(6))  # trace 6
    bad = np.zeros((6, 6), complex)
    bad[0, 1] = 1
    bad[0, 0] = 1
    with pytest.raises(ValueError):
        DensityMatrix(sp, bad)  # not Hermitian
    neg = np.diag([1.5, -0.5, 0, 0, 0, 0]).astype(complex)
    with pytest.raises(ValueError):
        DensityMatrix(sp, neg)
    with pytest.raises(DimensionError):
        DensityMatrix(sp, np.eye(4) / 4)


def test_state_vector_normalized():
    sp = HilbertSpace(1)
    psi = StateVector(sp, np.arange(6) + 1j)
    assert np.linalg.norm(psi.amplitudes) == pytest.approx(1, abs=1e-12)
    assert psi.density_matrix().purity() == pytest.approx(1)


def _hermitian(rng_seed, dim):
    rng = np.random.default_rng(rng_seed)
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return m + m.conj().T


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(2, 9))
def test_hermitian_eig_reconstructs(seed, dim):
    h = _hermitian(seed, dim)
    w, v = hermitian_eig(h)
    assert np.all(np.diff(w) >= -1e-12)
    np.testing.assert_allclose(v @ np.diag(w) @ dag(v), h, atol=1e-10)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_random_states_satisfy_invariants(seed):
    sp = HilbertSpace(1)
    rng = np.random.default_rng(seed)
    m = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    rho = m @ m.conj().T
    rho /= np.trace(rho)
    dm = DensityMatrix(sp, rho)
    assert dm.populations().sum() == pytest.approx(1)
    assert 1 / 6 - 1e-12 <= dm.purity() <= 1 + 1e-12

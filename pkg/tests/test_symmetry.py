import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import bracelet_count, dense_shift
from ringspin.basis import Frame, StateVector
from ringspin.fermion import FermionLabel, all_labels, construct_state
from ringspin.hamiltonian import build_h_spin
from ringspin.model import SystemParams
from ringspin.symmetry import (
    SymmetryKind,
    SymmetryOperator,
    apply_reversal,
    apply_shift,
    is_fully_symmetric,
    project_fully_symmetric,
    sector_dimension,
    symmetry_residuals,
)


@pytest.mark.parametrize("L", [3, 4, 5, 6])
def test_shift_matches_oracle(L):
    ours = SymmetryOperator(SymmetryKind.SHIFT, L).matrix().toarray()
    assert np.array_equal(ours, dense_shift(L))


def test_shift_moves_site_one_to_site_two():
    s = StateVector.basis_state(4, 0b0001)
    assert apply_shift(s).amplitudes[0b0010] == 1


@pytest.mark.parametrize("L", [3, 4, 7])
def test_group_relations(L):
    s = StateVector.random(L, rng=1)
    assert np.array_equal(apply_shift(s, times=L).amplitudes, s.amplitudes)
    out = s
    for _ in range(L):
        out = apply_shift(out)
    assert np.array_equal(out.amplitudes, s.amplitudes)
    assert np.array_equal(apply_reversal(apply_reversal(s)).amplitudes, s.amplitudes)


def test_reversal_maps_site_k_to_mirror():
    L = 5
    s = StateVector.basis_state(L, 1 << 1)  # site 2
    assert apply_reversal(s).amplitudes[1 << (L - 2)] == 1  # site L-1


def test_permutations_are_orthogonal():
    for kind in SymmetryKind:
        m = SymmetryOperator(kind, 5).matrix().toarray()
        assert np.array_equal(m.T @ m, np.eye(32))


def test_known_states_are_fully_symmetric():
    L = 6
    assert is_fully_symmetric(StateVector.basis_state(L, 0, Frame.LAB))
    g = construct_state(L, FermionLabel.ground())
    one = construct_state(L, FermionLabel.single())
    assert np.array_equal(apply_shift(g).amplitudes, g.amplitudes)
    assert np.array_equal(apply_reversal(g).amplitudes, g.amplitudes)
    assert max(symmetry_residuals(apply_reversal(one))) < 1e-14
    assert not is_fully_symmetric(StateVector.basis_state(L, 1))


@pytest.mark.parametrize("L", [5, 6, 7, 8, 10])
def test_all_constructed_states_fully_symmetric(L):
    for lab in all_labels(L):
        assert is_fully_symmetric(construct_state(L, lab), tol=1e-10), lab


def test_sector_dimension_matches_bracelet_count():
    assert bracelet_count(4) == 6
    for L in range(3, 11):
        assert sector_dimension(L) == bracelet_count(L)


def test_projection_of_vacuum():
    vac = StateVector.basis_state(5, 0)
    proj = project_fully_symmetric(vac)
    assert proj.weight == pytest.approx(1.0, abs=1e-15)
    assert abs(proj.state.overlap(vac)) == pytest.approx(1.0, abs=1e-15)


def test_projection_empty_sector():
    L = 3
    # antisymmetric under shift: zero weight on the symmetric sector
    amps = np.zeros(8, dtype=complex)
    amps[0b001], amps[0b010] = 1, -1
    proj = project_fully_symmetric(StateVector.normalized(amps))
    assert proj.empty and proj.weight == 0.0


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31))
def test_projection_idempotent(seed):
    s = StateVector.random(4, rng=seed)
    p1 = project_fully_symmetric(s)
    p2 = project_fully_symmetric(p1.state)
    assert p2.weight == pytest.approx(1.0, abs=1e-12)
    assert np.abs(p2.state.amplitudes - p1.state.amplitudes).max() < 1e-12
    assert is_fully_symmetric(p1.state)


@settings(max_examples=10, deadline=None)
@given(
    L=st.integers(3, 8),
    omega=st.floats(0, 20),
    delta=st.floats(-5, 5),
    beta=st.floats(0, 3),
)
def test_hamiltonian_commutes_with_symmetries(L, omega, delta, beta):
    H = build_h_spin(SystemParams(L=L, omega=omega, delta=delta, beta=beta)).matrix
    rng = np.random.default_rng(L)
    for kind in SymmetryKind:
        S = SymmetryOperator(kind, L).matrix()
        comm = H @ S - S @ H
        for _ in range(20):
            v = rng.normal(size=1 << L) + 1j * rng.normal(size=1 << L)
            v /= np.linalg.norm(v)
            assert np.linalg.norm(comm @ v) < 1e-10

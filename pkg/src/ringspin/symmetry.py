"""Cyclic shift and reversal of ring sites, and the fully-symmetric sector.

Both symmetries are permutations of basis indices, so they act identically
in the lab and rotated frames.  The shift moves site k to site k+1; the
reversal sends site k to site L-k+1 (1-based).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np
import scipy.sparse as sp

from .basis import StateVector, basis_indices

SYMMETRY_TOL = 1e-8
EMPTY_SECTOR_TOL = 1e-14


class SymmetryKind(enum.Enum):
    SHIFT = "shift"
    REVERSAL = "reversal"


@lru_cache(maxsize=None)
def shift_table(L) -> np.ndarray:
    """``table[a]`` is the index that basis state ``a`` is sent to by one cyclic shift."""
    idx = basis_indices(L)
    full = (1 << L) - 1
    table = ((idx << 1) | (idx >> (L - 1))) & full
    table.setflags(write=False)
    return table


@lru_cache(maxsize=None)
def reversal_table(L) -> np.ndarray:
    idx = basis_indices(L)
    table = np.zeros_like(idx)
    for k in range(L):
        table |= ((idx >> k) & 1) << (L - 1 - k)
    table.setflags(write=False)
    return table


@dataclass(frozen=True)
class SymmetryOperator:
    """A site permutation stored as a basis-index table."""

    kind: SymmetryKind
    L: int

    @property
    def table(self) -> np.ndarray:
        return shift_table(self.L) if self.kind is SymmetryKind.SHIFT else reversal_table(self.L)

    def apply_amplitudes(self, amplitudes) -> np.ndarray:
        out = np.empty_like(amplitudes)
        out[self.table] = amplitudes
        return out

    def apply(self, state: StateVector) -> StateVector:
        return StateVector(self.apply_amplitudes(state.amplitudes), state.frame)

    def matrix(self) -> sp.csr_matrix:
        n = 1 << self.L
        return sp.csr_matrix((np.ones(n), (self.table, np.arange(n))), shape=(n, n))


def apply_shift(state: StateVector, times=1) -> StateVector:
    op = SymmetryOperator(SymmetryKind.SHIFT, state.L)
    amps = state.amplitudes
    for _ in range(times % state.L):
        amps = op.apply_amplitudes(amps)
    return StateVector(amps, state.frame)


def apply_reversal(state: StateVector) -> StateVector:
    return SymmetryOperator(SymmetryKind.REVERSAL, state.L).apply(state)


def symmetry_residuals(state: StateVector) -> tuple[float, float]:
    """(||X psi - psi||, ||R psi - psi||)."""
    psi = state.amplitudes
    L = state.L
    shifted = SymmetryOperator(SymmetryKind.SHIFT, L).apply_amplitudes(psi)
    reversed_ = SymmetryOperator(SymmetryKind.REVERSAL, L).apply_amplitudes(psi)
    return float(np.linalg.norm(shifted - psi)), float(np.linalg.norm(reversed_ - psi))


def is_fully_symmetric(state: StateVector, tol=SYMMETRY_TOL) -> bool:
    rx, rr = symmetry_residuals(state)
    return rx < tol and rr < tol


@lru_cache(maxsize=None)
def _group_images(L) -> np.ndarray:
    """All 2L dihedral images of every basis index, shape (2L, 2**L)."""
    shift = shift_table(L)
    rev = reversal_table(L)
    rows = []
    cur = basis_indices(L)
    for _ in range(L):
        rows.append(cur)
        rows.append(rev[cur])
        cur = shift[cur]
    images = np.array(rows)
    images.setflags(write=False)
    return images


@lru_cache(maxsize=None)
def fully_symmetric_basis(L) -> sp.csr_matrix:
    """Isometry B (2**L x d) whose columns span the fully-symmetric sector.

    Column j is the uniform superposition over one dihedral orbit of basis
    states, so B^T H B is the Hamiltonian restricted to the sector.
    """
    images = _group_images(L)
    reps = images.min(axis=0)
    uniq, col = np.unique(reps, return_inverse=True)
    orbit_size = np.bincount(col)
    n = 1 << L
    data = 1.0 / np.sqrt(orbit_size[col])
    return sp.csr_matrix((data, (np.arange(n), col)), shape=(n, uniq.size))


def sector_dimension(L) -> int:
    return fully_symmetric_basis(L).shape[1]


class Projection(NamedTuple):
    state: StateVector | None
    weight: float

    @property
    def empty(self) -> bool:
        return self.state is None


def project_fully_symmetric(state: StateVector) -> Projection:
    """Project onto the fully-symmetric sector.

    Returns the normalized projection and its squared weight.  An empty
    projection is reported as ``Projection(None, 0.0)`` rather than a NaN state.
    """
    images = _group_images(state.L)
    psi = state.amplitudes
    # Group average: P psi = (1/2L) sum_g g psi, with (g psi)[g(a)] = psi[a].
    out = np.zeros_like(psi)
    for row in images:
        out[row] += psi
    out /= images.shape[0]
    weight = float(np.vdot(out, out).real)
    if weight < EMPTY_SECTOR_TOL:
        return Projection(None, 0.0)
    return Projection(StateVector.normalized(out, state.frame), weight)

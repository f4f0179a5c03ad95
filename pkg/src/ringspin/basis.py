"""Bit-encoded spin basis, frame-tagged states and operators.

Basis index ``a`` in ``[0, 2**L)`` encodes site ``k`` (0-based) in bit ``k``.
A set bit is the "up" local state: ``|R>`` in the lab frame, ``|+>`` in the
rotated frame.  Both frames use the same bit convention, so ``popcount(a)``
counts Rydberg excitations (lab) or fermions (rotated).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from .errors import ContractViolationError, FrameMismatchError, InvalidParameterError

NORM_TOL = 1e-8


class Frame(enum.Enum):
    LAB = "lab"
    ROTATED = "rotated"

    @classmethod
    def parse(cls, value) -> Frame:
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError as exc:
            raise InvalidParameterError(f"unknown frame {value!r}; use 'lab' or 'rotated'") from exc


def _require_same_frame(a, b):
    if a != b:
        raise FrameMismatchError(f"cannot combine {a.value}-frame and {b.value}-frame objects")


@lru_cache(maxsize=None)
def basis_indices(L) -> np.ndarray:
    idx = np.arange(1 << L, dtype=np.int64)
    idx.setflags(write=False)
    return idx


@lru_cache(maxsize=None)
def occupations(L) -> np.ndarray:
    """Array of shape (L, 2**L); entry [k, a] is bit k of a."""
    idx = basis_indices(L)
    occ = np.array([(idx >> k) & 1 for k in range(L)], dtype=np.int8)
    occ.setflags(write=False)
    return occ


@lru_cache(maxsize=None)
def popcounts(L) -> np.ndarray:
    pc = occupations(L).sum(axis=0).astype(np.int64)
    pc.setflags(write=False)
    return pc


def dimension_to_sites(dim) -> int:
    L = int(dim).bit_length() - 1
    if dim < 2 or (1 << L) != dim:
        raise InvalidParameterError(f"vector length {dim} is not a power of two >= 2")
    return L


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalized amplitudes over the 2**L bit basis, tagged with a frame."""

    amplitudes: np.ndarray
    frame: Frame = Frame.ROTATED

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=np.complex128).reshape(-1)
        dimension_to_sites(amps.size)
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise ContractViolationError(
                f"state is not normalized (|psi| = {norm:.12g}); use StateVector.normalized"
            )
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "frame", Frame.parse(self.frame))

    @classmethod
    def normalized(cls, amplitudes, frame=Frame.ROTATED) -> StateVector:
        amps = np.asarray(amplitudes, dtype=np.complex128).reshape(-1)
        norm = np.linalg.norm(amps)
        if norm == 0:
            raise ContractViolationError("cannot normalize the zero vector")
        return cls(amps / norm, frame)

    @classmethod
    def basis_state(cls, L, index, frame=Frame.ROTATED) -> StateVector:
        amps = np.zeros(1 << L, dtype=np.complex128)
        amps[index] = 1.0
        return cls(amps, frame)

    @classmethod
    def random(cls, L, rng=None, frame=Frame.ROTATED) -> StateVector:
        rng = np.random.default_rng(rng)
        amps = rng.normal(size=1 << L) + 1j * rng.normal(size=1 << L)
        return cls.normalized(amps, frame)

    @property
    def L(self) -> int:
        return dimension_to_sites(self.amplitudes.size)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def overlap(self, other: StateVector) -> complex:
        """<self|other>."""
        _require_same_frame(self.frame, other.frame)
        if self.dim != other.dim:
            raise ContractViolationError("states live on different lattice sizes")
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def with_fixed_phase(self, tol=1e-12) -> StateVector:
        """Rotate the global phase so the lowest-index nonzero amplitude is real positive."""
        nz = np.flatnonzero(np.abs(self.amplitudes) > tol)
        if nz.size == 0:
            return self
        a = self.amplitudes[nz[0]]
        return StateVector(self.amplitudes * (abs(a) / a), self.frame)

    def __repr__(self):
        return f"StateVector(L={self.L}, frame={self.frame.value})"


@dataclass(frozen=True, eq=False)
class SparseOperator:
    """Sparse complex matrix on the 2**L space with a frame tag."""

    matrix: sp.csr_matrix
    frame: Frame
    hermitian: bool = False
    name: str = field(default="", compare=False)

    def __post_init__(self):
        m = sp.csr_matrix(self.matrix, dtype=np.complex128)
        if m.shape[0] != m.shape[1]:
            raise ContractViolationError(f"operator must be square, got shape {m.shape}")
        dimension_to_sites(m.shape[0])
        m.sum_duplicates()
        m.eliminate_zeros()
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "frame", Frame.parse(self.frame))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def L(self) -> int:
        return dimension_to_sites(self.dim)

    def _vector(self, other):
        if isinstance(other, StateVector):
            _require_same_frame(self.frame, other.frame)
            return other.amplitudes
        return np.asarray(other)

    def __matmul__(self, other):
        if isinstance(other, SparseOperator):
            _require_same_frame(self.frame, other.frame)
            return SparseOperator(self.matrix @ other.matrix, self.frame)
        return self.matrix @ self._vector(other)

    def apply(self, other) -> np.ndarray:
        return self.matrix @ self._vector(other)

    def __add__(self, other):
        if isinstance(other, SparseOperator):
            _require_same_frame(self.frame, other.frame)
            return SparseOperator(
                self.matrix + other.matrix, self.frame, self.hermitian and other.hermitian
            )
        if np.isscalar(other):
            ident = sp.identity(self.dim, dtype=np.complex128, format="csr")
            herm = self.hermitian and np.isreal(other)
            return SparseOperator(self.matrix + other * ident, self.frame, herm)
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-1.0) * other

    def __mul__(self, scalar):
        if not np.isscalar(scalar):
            return NotImplemented
        return SparseOperator(self.matrix * scalar, self.frame, self.hermitian and np.isreal(scalar))

    __rmul__ = __mul__

    def __neg__(self):
        return (-1.0) * self

    def adjoint(self) -> SparseOperator:
        return SparseOperator(self.matrix.conj().T.tocsr(), self.frame, self.hermitian)

    def expectation(self, state: StateVector) -> complex:
        _require_same_frame(self.frame, state.frame)
        return complex(np.vdot(state.amplitudes, self.matrix @ state.amplitudes))

    def commutator(self, other: SparseOperator) -> SparseOperator:
        _require_same_frame(self.frame, other.frame)
        return SparseOperator(self.matrix @ other.matrix - other.matrix @ self.matrix, self.frame)

    def hermiticity_error(self) -> float:
        diff = self.matrix - self.matrix.conj().T
        return float(abs(diff).max()) if diff.nnz else 0.0

    def norm_bound(self) -> float:
        """Cheap upper bound on the spectral norm (max absolute row sum)."""
        if self.matrix.nnz == 0:
            return 0.0
        return float(abs(self.matrix).sum(axis=1).max())

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()

    def __repr__(self):
        tag = f" {self.name}" if self.name else ""
        return f"SparseOperator{tag}(L={self.L}, frame={self.frame.value}, nnz={self.matrix.nnz})"


# Single-site frame change exp(-i pi/4 sigma_y) in the (bit 0, bit 1) ordering.
# Columns are the rotated states |-> and |+> written in the lab basis (|P>, |R>).
SITE_ROTATION = np.array([[1.0, 1.0], [-1.0, 1.0]], dtype=np.complex128) / np.sqrt(2.0)


def _apply_sitewise(amplitudes, L, u):
    psi = np.asarray(amplitudes, dtype=np.complex128)
    for k in range(L):
        view = psi.reshape(1 << (L - 1 - k), 2, 1 << k)
        psi = np.einsum("ij,ajb->aib", u, view).reshape(-1)
    return psi


def rotate_amplitudes(amplitudes, L, to: Frame) -> np.ndarray:
    """Change frame of a raw amplitude array without forming the 4**L unitary."""
    to = Frame.parse(to)
    u = SITE_ROTATION if to is Frame.LAB else SITE_ROTATION.conj().T
    return _apply_sitewise(amplitudes, L, u)


def rotate_state(state: StateVector, to) -> StateVector:
    """Express ``state`` in frame ``to``; psi_lab = U psi_rot."""
    to = Frame.parse(to)
    if state.frame is to:
        return state
    return StateVector(rotate_amplitudes(state.amplitudes, state.L, to), to)


ROTATION_MAX_L = 12


def rotation_u(L) -> SparseOperator:
    """The frame-change unitary U = prod_k exp(-i pi/4 sigma_y^(k)) as an explicit matrix.

    U is dense (every entry has modulus 2**(-L/2)), so this is capped at
    L <= 12; use :func:`rotate_state` for the matrix-free action.
    """
    if L < 1 or L > ROTATION_MAX_L:
        raise InvalidParameterError(
            f"explicit rotation matrix limited to 1 <= L <= {ROTATION_MAX_L}; use rotate_state"
        )
    u = sp.csr_matrix(SITE_ROTATION)
    mat = u
    for _ in range(L - 1):
        mat = sp.kron(u, mat, format="csr")
    return SparseOperator(mat, Frame.LAB, hermitian=False, name="U")


def rotate_operator(op: SparseOperator, to) -> SparseOperator:
    """Conjugate an operator into frame ``to``: A_rot = U^dag A_lab U."""
    to = Frame.parse(to)
    if op.frame is to:
        return op
    U = rotation_u(op.L).matrix
    if to is Frame.ROTATED:
        mat = U.conj().T @ op.matrix @ U
    else:
        mat = U @ op.matrix @ U.conj().T
    out = sp.csr_matrix(mat)
    out.data[np.abs(out.data) < 1e-14] = 0.0
    return SparseOperator(out, to, op.hermitian, op.name)

"""Spin Hamiltonian of the driven ring, its rotated decomposition, and eigensolvers.

Lab frame::

    H_spin = sum_k [ omega X_k + delta n_k + beta n_k n_{k+1} ],   n_k = (1 + Z_k)/2

Rotated frame (H = U^dag H_spin U)::

    H = beta L/4 + H_xy + H_1 + H_2
    H_xy = sum_k [ omega Z_k + beta/4 (s+_k s-_{k+1} + h.c.) ]
    H_1  = delta/2 sum_k (1 - X_k)
    H_2  = beta/4 sum_k [ (s+_k s+_{k+1} + h.c.) - 2 X_k ]

All terms are assembled from bit-flip and diagonal rules; no Kronecker
products are formed.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .basis import Frame, SparseOperator, StateVector, basis_indices, occupations, popcounts
from .errors import ContractViolationError, DiagonalizationError, FrameMismatchError
from .model import DENSE_MAX_L, SystemParams
from .symmetry import fully_symmetric_basis

DEGENERACY_RTOL = 1e-9


def _flip_matrix(L, masks, values=None) -> sp.csr_matrix:
    """Sum over (mask, value-per-column) of |a ^ mask><a| * value."""
    idx = basis_indices(L)
    n = idx.size
    rows, cols, data = [], [], []
    for i, mask in enumerate(masks):
        vals = np.ones(n) if values is None else values[i]
        keep = vals != 0
        rows.append(idx[keep] ^ mask)
        cols.append(idx[keep])
        data.append(vals[keep])
    if not rows:
        return sp.csr_matrix((n, n), dtype=np.complex128)
    return sp.csr_matrix(
        (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n, n),
        dtype=np.complex128,
    )


@lru_cache(maxsize=None)
def sigma_x_total(L) -> sp.csr_matrix:
    """sum_k X_k (same matrix in both frames' bit basis)."""
    return _flip_matrix(L, [1 << k for k in range(L)])


@lru_cache(maxsize=None)
def excitation_number(L) -> np.ndarray:
    """Diagonal of sum_k n_k, i.e. popcount."""
    return popcounts(L).astype(float)


@lru_cache(maxsize=None)
def neighbour_pairs(L) -> np.ndarray:
    """Diagonal of sum_k n_k n_{k+1} on the ring."""
    occ = occupations(L).astype(np.int64)
    out = (occ * np.roll(occ, -1, axis=0)).sum(axis=0).astype(float)
    out.setflags(write=False)
    return out


@lru_cache(maxsize=None)
def _hopping(L) -> sp.csr_matrix:
    """sum_k (s+_k s-_{k+1} + h.c.): exchanges unequal neighbouring bits."""
    occ = occupations(L)
    masks, vals = [], []
    for k in range(L):
        k2 = (k + 1) % L
        masks.append((1 << k) | (1 << k2))
        vals.append((occ[k] != occ[k2]).astype(float))
    return _flip_matrix(L, masks, vals)


@lru_cache(maxsize=None)
def _pair_flips(L) -> sp.csr_matrix:
    """sum_k (s+_k s+_{k+1} + s-_k s-_{k+1}): flips equal neighbouring bits together."""
    occ = occupations(L)
    masks, vals = [], []
    for k in range(L):
        k2 = (k + 1) % L
        masks.append((1 << k) | (1 << k2))
        vals.append((occ[k] == occ[k2]).astype(float))
    return _flip_matrix(L, masks, vals)


def _diag(values) -> sp.csr_matrix:
    return sp.diags(np.asarray(values, dtype=np.complex128), format="csr")


def sigma_z_total(L) -> np.ndarray:
    """Diagonal of sum_k Z_k = 2 popcount - L."""
    return 2.0 * popcounts(L) - L


def build_h_spin(params: SystemParams) -> SparseOperator:
    """Lab-frame Hamiltonian with periodic nearest-neighbour interaction."""
    L = params.L
    diag = params.delta * excitation_number(L) + params.beta * neighbour_pairs(L)
    mat = params.omega * sigma_x_total(L) + _diag(diag)
    return SparseOperator(mat, Frame.LAB, hermitian=True, name="H_spin")


@dataclass(frozen=True)
class RotatedParts:
    offset: float
    h_xy: SparseOperator
    h_1: SparseOperator
    h_2: SparseOperator

    def total(self) -> SparseOperator:
        return self.h_xy + self.h_1 + self.h_2 + self.offset

    def __iter__(self):
        return iter((self.offset, self.h_xy, self.h_1, self.h_2))


def build_h_xy(params: SystemParams) -> SparseOperator:
    L = params.L
    mat = _diag(params.omega * sigma_z_total(L)) + (params.beta / 4.0) * _hopping(L)
    return SparseOperator(mat, Frame.ROTATED, hermitian=True, name="H_xy")


def build_rotated_parts(params: SystemParams) -> RotatedParts:
    """Offset beta L/4 and the operators H_xy, H_1, H_2 in the rotated frame."""
    L = params.L
    sx = sigma_x_total(L)
    ident = sp.identity(1 << L, dtype=np.complex128, format="csr")
    h1 = (params.delta / 2.0) * (L * ident - sx)
    h2 = (params.beta / 4.0) * (_pair_flips(L) - 2.0 * sx)
    return RotatedParts(
        offset=params.beta * L / 4.0,
        h_xy=build_h_xy(params),
        h_1=SparseOperator(h1, Frame.ROTATED, hermitian=True, name="H_1"),
        h_2=SparseOperator(h2, Frame.ROTATED, hermitian=True, name="H_2"),
    )


def build_h_rotated(params: SystemParams) -> SparseOperator:
    op = build_rotated_parts(params).total()
    return SparseOperator(op.matrix, Frame.ROTATED, hermitian=True, name="H")


def number_operator(L, frame=Frame.LAB) -> SparseOperator:
    """sum_k n_k with n_k = (1 + Z_k)/2 of the lab frame, expressed in ``frame``.

    In the rotated frame Z_k -> -X_k, so n_k = (1 - X_k)/2.
    """
    frame = Frame.parse(frame)
    if frame is Frame.LAB:
        return SparseOperator(_diag(excitation_number(L)), frame, True, "N")
    ident = sp.identity(1 << L, dtype=np.complex128, format="csr")
    return SparseOperator(0.5 * (L * ident - sigma_x_total(L)), frame, True, "N")


def detuning_derivative(L, frame=Frame.LAB) -> SparseOperator:
    """dH/d(delta): the operator multiplying the detuning."""
    return number_operator(L, frame)


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Ascending eigenvalues with eigenvectors stored as columns."""

    values: np.ndarray
    vectors: np.ndarray
    frame: Frame
    sector: str = "full"

    def __len__(self):
        return self.values.size

    def state(self, i) -> StateVector:
        return StateVector.normalized(self.vectors[:, i], self.frame)

    def cluster(self, i, rtol=DEGENERACY_RTOL) -> np.ndarray:
        """Indices of eigenvalues degenerate with eigenvalue i."""
        scale = max(1.0, float(np.max(np.abs(self.values)))) if self.values.size else 1.0
        return np.flatnonzero(np.abs(self.values - self.values[i]) <= rtol * scale)

    def subspace_weight(self, state: StateVector, indices) -> float:
        """sum_{i in indices} |<v_i|psi>|^2, i.e. <psi|P|psi> for the spanned projector."""
        if state.frame is not self.frame:
            raise FrameMismatchError("state and spectrum live in different frames")
        amp = self.vectors[:, np.atleast_1d(indices)].conj().T @ state.amplitudes
        return float(np.sum(np.abs(amp) ** 2))

    def overlaps(self, state: StateVector) -> np.ndarray:
        if state.frame is not self.frame:
            raise FrameMismatchError("state and spectrum live in different frames")
        return np.abs(self.vectors.conj().T @ state.amplitudes) ** 2


def _check_residuals(matrix, values, vectors, scale):
    if values.size == 0:
        return
    res = matrix @ vectors - vectors * values
    worst = float(np.max(np.linalg.norm(res, axis=0)))
    if worst > 1e-8 * max(scale, 1.0):
        raise DiagonalizationError("eigenpair residual above 1e-8 ||H||", residual=worst)


def diagonalize(op: SparseOperator, k=None, sector="full", tol=0.0) -> Spectrum:
    """Eigenpairs of a Hermitian operator, ascending.

    Parameters
    ----------
    op : SparseOperator
        Must carry the hermitian flag.
    k : int, optional
        Number of lowest eigenpairs.  ``None`` asks for the full spectrum,
        which is only allowed on the dense path (L <= 14 or a small sector).
    sector : {"full", "symmetric"}
        ``"symmetric"`` restricts to the span of shift- and reversal-invariant
        states first; eigenvectors are returned in the full 2**L space.
    """
    if not op.hermitian:
        raise ContractViolationError("diagonalize requires an operator flagged hermitian")
    if sector not in ("full", "symmetric"):
        raise ContractViolationError(f"unknown sector {sector!r}")
    mat = op.matrix
    embed = None
    if sector == "symmetric":
        embed = fully_symmetric_basis(op.L)
        mat = (embed.T @ mat @ embed).tocsr()
    dim = mat.shape[0]
    scale = op.norm_bound()

    dense = dim <= (1 << DENSE_MAX_L)
    if dense and (k is None or k >= dim - 1 or dim <= 2048):
        values, vectors = scipy.linalg.eigh(mat.toarray())
        if k is not None:
            values, vectors = values[:k], vectors[:, :k]
    else:
        if k is None:
            raise ContractViolationError(
                f"full spectrum of a {dim}-dimensional operator requested above the dense ceiling"
            )
        try:
            values, vectors = spla.eigsh(mat, k=k, which="SA", tol=tol)
        except spla.ArpackNoConvergence as exc:
            raise DiagonalizationError(f"Lanczos did not converge for k={k}") from exc
        order = np.argsort(values)
        values, vectors = values[order], vectors[:, order]
        vectors = _orthonormalize_clusters(values, vectors)
    _check_residuals(mat, values, vectors, scale)
    if embed is not None:
        vectors = embed @ vectors
    return Spectrum(np.asarray(values), np.asarray(vectors), op.frame, sector)


def _orthonormalize_clusters(values, vectors):
    scale = max(1.0, float(np.max(np.abs(values))))
    out = vectors.copy()
    start = 0
    for i in range(1, values.size + 1):
        if i == values.size or abs(values[i] - values[start]) > DEGENERACY_RTOL * scale:
            if i - start > 1:
                q, _ = np.linalg.qr(out[:, start:i])
                out[:, start:i] = q
            start = i
    return out


def manifold_number(state: StateVector) -> tuple[float, float]:
    """Mean and variance of m = sum_k Z_k for a rotated-frame state."""
    if state.frame is not Frame.ROTATED:
        raise FrameMismatchError("manifold number m is defined in the rotated frame")
    p = state.probabilities()
    m = sigma_z_total(state.L)
    mean = float(p @ m)
    var = float(p @ (m - mean) ** 2)
    return mean, max(var, 0.0)

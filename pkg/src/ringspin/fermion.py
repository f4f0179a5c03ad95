"""Free-fermion solution of the xy ring: labels, closed-form energies and states.

In the rotated frame the xy part of the Hamiltonian maps, through a
Jordan-Wigner transformation, onto spinless fermions hopping on a ring.
Even fermion number gives antiperiodic boundary conditions (mode momenta
2 pi (n - 1/2) / L), odd number periodic ones (2 pi n / L).  Only the
states invariant under cyclic shifts and reversal are built here, since
they are the only ones reachable from the all-ground initial state.

The explicit Jordan-Wigner operators at the bottom of the module are slow
and meant as an independent check of the closed forms.
"""

from __future__ import annotations

import enum
import itertools
import logging
import math
import re
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.optimize
import scipy.sparse as sp

from .basis import Frame, SparseOperator, StateVector, basis_indices, occupations, rotate_state
from .errors import (
    DegeneratePerturbationError,
    InvalidLabelError,
    InvalidParameterError,
)
from .hamiltonian import Spectrum, build_h_spin, diagonalize
from .model import SystemParams, check_sites

log = logging.getLogger(__name__)

NORM_FLAG_TOL = 1e-6


# --------------------------------------------------------------------------
# labels
# --------------------------------------------------------------------------


@dataclass(frozen=True, order=True)
class FermionLabel:
    """Fully-symmetric eigenstate label: Ground, One, Two(p) or Three(p, q, r)."""

    modes: tuple[int, ...] = ()
    one: bool = False

    @classmethod
    def ground(cls):
        return cls()

    @classmethod
    def single(cls):
        return cls(one=True)

    @classmethod
    def two(cls, p):
        return cls((int(p),))

    @classmethod
    def three(cls, p, q, r):
        return cls(tuple(int(m) for m in (p, q, r)))

    def __post_init__(self):
        if len(self.modes) not in (0, 1, 3) or (self.one and self.modes):
            raise InvalidLabelError(f"malformed fermion label modes={self.modes} one={self.one}")

    @property
    def n_fermions(self) -> int:
        if self.one:
            return 1
        return (0, 2, None, 3)[len(self.modes)]

    @property
    def kind(self) -> str:
        return ("ground", "one", "two", "three")[self.n_fermions]

    def validate(self, L) -> FermionLabel:
        n = self.n_fermions
        if n == 2:
            (p,) = self.modes
            if not 1 <= p <= L // 2:
                raise InvalidLabelError(f"two-fermion mode p={p} outside 1..{L // 2} for L={L}")
        elif n == 3:
            p, q, r = self.modes
            if not 1 <= p < q < r <= L:
                raise InvalidLabelError(f"three-fermion modes {self.modes} must satisfy 1 <= p < q < r <= L={L}")
            if p + q + r not in (L, 2 * L):
                raise InvalidLabelError(f"p+q+r={p + q + r} must equal L or 2L (L={L})")
            if conjugate_triple(L, self.modes) < self.modes:
                raise InvalidLabelError(
                    f"{self.modes} is not canonical; use {conjugate_triple(L, self.modes)}"
                )
        return self

    @classmethod
    def parse(cls, text: str) -> FermionLabel:
        """Parse ``ground``, ``one``, ``two:p`` or ``three:p,q,r`` (also ``G``, ``1``, ``2_3``)."""
        t = text.strip().lower()
        if t in ("ground", "g", "0"):
            return cls.ground()
        if t in ("one", "1"):
            return cls.single()
        m = re.fullmatch(r"(two|2)[:_ ]?(\d+)", t)
        if m:
            return cls.two(int(m.group(2)))
        m = re.fullmatch(r"(three|3)[:_ ]?(\d+)[, ]+(\d+)[, ]+(\d+)", t)
        if m:
            return cls.three(*(int(g) for g in m.groups()[1:]))
        raise InvalidLabelError(f"cannot parse fermion label {text!r}")

    def __str__(self):
        if self.n_fermions == 0:
            return "G"
        if self.n_fermions == 1:
            return "1"
        if self.n_fermions == 2:
            return f"2_{self.modes[0]}"
        return "3_" + ",".join(str(m) for m in self.modes)


def conjugate_triple(L, modes) -> tuple[int, int, int]:
    """Reversal partner (p,q,r) -> sorted(L-r, L-q, L-p), with mode 0 read as L."""
    return tuple(sorted((L - m) or L for m in modes))


def enumerate_labels(L, n_fermions) -> list[FermionLabel]:
    """All fully-symmetric labels with the given fermion number (0..3)."""
    L = check_sites(L)
    if n_fermions == 0:
        return [FermionLabel.ground()]
    if n_fermions == 1:
        return [FermionLabel.single()]
    if n_fermions == 2:
        return [FermionLabel.two(p) for p in range(1, L // 2 + 1)]
    if n_fermions == 3:
        out = []
        for triple in itertools.combinations(range(1, L + 1), 3):
            if sum(triple) in (L, 2 * L) and conjugate_triple(L, triple) >= triple:
                out.append(FermionLabel.three(*triple))
        return out
    raise InvalidParameterError(f"analytic states are available for 0..3 fermions, got {n_fermions}")


def all_labels(L, max_fermions=3) -> list[FermionLabel]:
    return [lab for n in range(max_fermions + 1) for lab in enumerate_labels(L, n)]


# --------------------------------------------------------------------------
# energies
# --------------------------------------------------------------------------


class Order(enum.Enum):
    ZEROTH = "zeroth"
    WITH_CORRECTIONS = "with_corrections"


@dataclass(frozen=True)
class AnalyticEnergy:
    value: float
    order: Order = Order.ZEROTH

    def __float__(self):
        return float(self.value)


def _half_phases(L):
    return 2 * np.pi / L * (np.arange(1, L // 2 + 1) - 0.5)


def mode_energies(params: SystemParams, parity="even") -> np.ndarray:
    """Single-fermion energies 2 omega + (beta/4) eps_n for n = 1..L.

    ``parity`` selects the sector fixing the boundary condition: even
    fermion number uses half-integer momenta, odd integer ones.
    """
    n = np.arange(1, params.L + 1)
    shift = 0.5 if parity == "even" else 0.0
    if parity not in ("even", "odd"):
        raise InvalidParameterError(f"parity must be 'even' or 'odd', got {parity!r}")
    return 2 * params.omega + params.beta / 2 * np.cos(2 * np.pi / params.L * (n - shift))


def _ground_zeroth(params):
    return -params.L * (params.omega - params.beta / 4)


def energy_ground(params: SystemParams, corrected=False) -> AnalyticEnergy:
    """E_G = -L (omega - beta/4); offset beta L/4 already included."""
    e = _ground_zeroth(params)
    if not corrected:
        return AnalyticEnergy(e)
    e += first_order_shift(params) + second_order_shift_ground(params)
    return AnalyticEnergy(e, Order.WITH_CORRECTIONS)


def energy_one(params: SystemParams, corrected=False) -> AnalyticEnergy:
    e = _ground_zeroth(params) + 2 * params.omega + params.beta / 2
    if not corrected:
        return AnalyticEnergy(e)
    e += first_order_shift(params) + second_order_shift_one(params)
    return AnalyticEnergy(e, Order.WITH_CORRECTIONS)


def energy_two(params: SystemParams, p, corrected=False) -> AnalyticEnergy:
    """E_G + 4 omega + beta cos(2 pi (p - 1/2) / L).

    ``corrected`` only adds the first-order detuning shift; no second-order
    result exists for two-fermion states.
    """
    FermionLabel.two(p).validate(params.L)
    e = _ground_zeroth(params) + 4 * params.omega + params.beta * math.cos(2 * math.pi / params.L * (p - 0.5))
    if corrected:
        return AnalyticEnergy(e + first_order_shift(params), Order.WITH_CORRECTIONS)
    return AnalyticEnergy(e)


def energy_three(params: SystemParams, p, q, r, corrected=False) -> AnalyticEnergy:
    FermionLabel.three(p, q, r).validate(params.L)
    k = 2 * math.pi / params.L
    e = _ground_zeroth(params) + 6 * params.omega + params.beta / 2 * (
        math.cos(k * p) + math.cos(k * q) + math.cos(k * r)
    )
    if corrected:
        return AnalyticEnergy(e + first_order_shift(params), Order.WITH_CORRECTIONS)
    return AnalyticEnergy(e)


def label_energy(params: SystemParams, label: FermionLabel, corrected=False) -> AnalyticEnergy:
    n = label.n_fermions
    if n == 0:
        return energy_ground(params, corrected)
    if n == 1:
        return energy_one(params, corrected)
    if n == 2:
        return energy_two(params, label.modes[0], corrected)
    return energy_three(params, *label.modes, corrected=corrected)


def first_order_shift(params: SystemParams) -> float:
    """Constant part of H_1: L delta / 2."""
    return params.L * params.delta / 2


def _check_denominators(den, what):
    if np.any(np.abs(den) < 1e-12):
        raise DegeneratePerturbationError(f"vanishing energy denominator in {what}")


def second_order_shift_ground(params: SystemParams) -> float:
    L, om, b, d = params.L, params.omega, params.beta, params.delta
    if om <= b / 4:
        raise InvalidParameterError(f"second-order shifts need omega > beta/4 (omega={om}, beta={b})")
    th = _half_phases(L)
    den = np.append(4 * om + b * np.cos(th), 8 * om + 2 * b)
    _check_denominators(den, "E_G^(2)")
    single = -L * abs(d + b) ** 2 / (8 * om + 2 * b)
    pairs = -(b**2 / 4) * (1 + 2 / L) ** 2 * np.sum(np.sin(th) ** 2 / den[:-1])
    return float(single + pairs)


def second_order_shift_one(params: SystemParams) -> float:
    L, om, b, d = params.L, params.omega, params.beta, params.delta
    if om <= b / 4:
        raise InvalidParameterError(f"second-order shifts need omega > beta/4 (omega={om}, beta={b})")
    th = _half_phases(L)
    den = 2 * om + b / 2 * (2 * np.cos(th) - 1)
    _check_denominators(np.append(den, 8 * om + 2 * b), "E_1^(2)")
    cot2 = 1.0 / np.tan(th / 2) ** 2
    up = L * abs(d + b) ** 2 / (8 * om + 2 * b)
    down = -(abs(d + b) ** 2 / L) * np.sum(cot2 / den)
    return float(up + down)


# --------------------------------------------------------------------------
# states
# --------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _occupied_sites(L, n):
    """Basis indices with popcount n and their occupied sites (1-based, descending)."""
    idx = basis_indices(L)
    occ = occupations(L)
    sel = idx[occ.sum(axis=0) == n]
    sites = np.array([[k + 1 for k in reversed(range(L)) if a >> k & 1] for a in sel], dtype=float)
    return sel, sites.reshape(len(sel), n)


def _two_amplitudes(L, p):
    sel, sites = _occupied_sites(L, 2)
    th = 2 * np.pi / L * (p - 0.5)
    return sel, 2 / (1j * L) * np.sin(th * (sites[:, 0] - sites[:, 1]))


def _three_amplitudes(L, modes):
    sel, sites = _occupied_sites(L, 3)
    k = 2 * np.pi / L
    modes = np.asarray(modes, dtype=float)
    if conjugate_triple(L, tuple(int(m) for m in modes)) == tuple(int(m) for m in modes):
        # Self-conjugate: the two-term combination collapses onto a single
        # Slater determinant, so build that product directly.
        mats = np.exp(1j * k * modes[None, :, None] * sites[:, None, :])
        return sel, np.linalg.det(mats) / L**1.5
    acc = np.zeros(len(sel))
    for perm in itertools.permutations(range(3)):
        sign = np.linalg.det(np.eye(3)[list(perm)])
        m = modes[list(perm)]
        acc += sign * np.sin(k * (sites @ m))
    return sel, -math.sqrt(2) * 1j / L**1.5 * acc


def construction_norm(L, label: FermionLabel) -> float:
    """Norm of the amplitudes used by :func:`construct_state` before renormalization."""
    return float(np.linalg.norm(_raw_amplitudes(L, label)))


def sine_form_norm(L, modes) -> float:
    """Norm of the Levi-Civita sine expression with prefactor sqrt(2)/L^{3/2}.

    It is 1 for conjugate-pair triples and sqrt(2) for self-conjugate ones,
    which is why the latter are built from a single determinant instead.
    """
    label = FermionLabel.three(*modes).validate(L)
    _, sites = _occupied_sites(L, 3)
    k = 2 * np.pi / L
    m = np.asarray(label.modes, dtype=float)
    acc = np.zeros(len(sites))
    for perm in itertools.permutations(range(3)):
        acc += np.linalg.det(np.eye(3)[list(perm)]) * np.sin(k * (sites @ m[list(perm)]))
    return float(math.sqrt(2) / L**1.5 * np.linalg.norm(acc))


def _raw_amplitudes(L, label):
    label.validate(L)
    amps = np.zeros(1 << L, dtype=np.complex128)
    n = label.n_fermions
    if n == 0:
        amps[0] = 1.0
    elif n == 1:
        amps[1 << np.arange(L)] = 1 / math.sqrt(L)
    elif n == 2:
        sel, vals = _two_amplitudes(L, label.modes[0])
        amps[sel] = vals
    else:
        sel, vals = _three_amplitudes(L, label.modes)
        amps[sel] = vals
    return amps


def construct_state(L, label: FermionLabel, return_norm=False):
    """Rotated-frame state vector of a fully-symmetric eigenstate.

    The closed-form amplitudes are renormalized; a construction norm off
    by more than 1e-6 is logged (it happens for self-conjugate three-fermion
    triples).  The global phase makes the lowest-index nonzero amplitude
    real and positive.
    """
    L = check_sites(L)
    amps = _raw_amplitudes(L, label)
    norm = float(np.linalg.norm(amps))
    if abs(norm - 1) > NORM_FLAG_TOL:
        log.debug("construction norm of |%s> at L=%d is %.12g; renormalized", label, L, norm)
    state = StateVector.normalized(amps, Frame.ROTATED).with_fixed_phase()
    return (state, norm) if return_norm else state


# --------------------------------------------------------------------------
# Jordan-Wigner operators (verification oracle)
# --------------------------------------------------------------------------

JW_MAX_L = 10


@lru_cache(maxsize=None)
def _site_annihilator(L, k):
    """c_k = prod_{j<k} (-Z_j) s-_k for 1-based site k, as a real csr matrix."""
    idx = basis_indices(L)
    bit = 1 << (k - 1)
    has = (idx & bit) != 0
    below = idx & (bit - 1)
    parity = np.array([bin(int(a)).count("1") & 1 for a in below])
    sign = np.where(parity == 1, -1.0, 1.0)
    src = idx[has]
    return sp.csr_matrix((sign[has], (src ^ bit, src)), shape=(idx.size, idx.size))


def jw_site_operator(L, k) -> SparseOperator:
    """Jordan-Wigner annihilator c_k (1-based site) in the rotated frame."""
    if not 1 <= L <= JW_MAX_L:
        raise InvalidParameterError(f"Jordan-Wigner oracle limited to L <= {JW_MAX_L}")
    if not 1 <= k <= L:
        raise InvalidParameterError(f"site {k} outside 1..{L}")
    return SparseOperator(_site_annihilator(L, k), Frame.ROTATED, name=f"c_{k}")


def jw_mode_operator(L, n, parity="even") -> SparseOperator:
    """Mode annihilator eta_n = L^{-1/2} sum_k exp(-i phi_n k) c_k.

    phi_n = 2 pi (n - 1/2)/L in the even sector, 2 pi n / L in the odd one.
    """
    if parity not in ("even", "odd"):
        raise InvalidParameterError(f"parity must be 'even' or 'odd', got {parity!r}")
    if not 1 <= L <= JW_MAX_L:
        raise InvalidParameterError(f"Jordan-Wigner oracle limited to L <= {JW_MAX_L}")
    phi = 2 * np.pi / L * (n - (0.5 if parity == "even" else 0.0))
    mat = sum(np.exp(-1j * phi * k) * _site_annihilator(L, k) for k in range(1, L + 1)) / math.sqrt(L)
    return SparseOperator(mat, Frame.ROTATED, name=f"eta_{n}{parity[0]}")


# --------------------------------------------------------------------------
# matching analytic labels with numerical eigenvectors
# --------------------------------------------------------------------------


def assign_labels(spectrum, labels, L):
    """Pair each label with a distinct eigenvector by maximal total overlap.

    ``spectrum`` is a :class:`~ringspin.hamiltonian.Spectrum`; the analytic
    states are rotated into its frame first.  Returns ``{label: index}``.
    """
    states = [rotate_state(construct_state(L, lab), spectrum.frame) for lab in labels]
    weights = np.array([spectrum.overlaps(s) for s in states])
    rows, cols = scipy.optimize.linear_sum_assignment(-weights)
    return {labels[r]: int(c) for r, c in zip(rows, cols)}


def degenerate_group(params: SystemParams, label: FermionLabel, labels=None, tol=1e-9):
    """Labels sharing the zeroth-order energy of ``label`` (including itself)."""
    labels = enumerate_labels(params.L, label.n_fermions) if labels is None else labels
    e = label_energy(params, label).value
    return [lab for lab in labels if abs(label_energy(params, lab).value - e) <= tol * max(1.0, abs(e))]


@dataclass(frozen=True, eq=False)
class MatchedState:
    """Exact eigenpair of H_spin identified with an analytic label."""

    label: FermionLabel
    energy: float
    state: StateVector
    overlap: float


def matched_eigenstates(params: SystemParams, labels=None, spectrum: Spectrum | None = None):
    """Exact fully-symmetric eigenstates of H_spin paired with analytic labels.

    Returns ``{label: MatchedState}`` with lab-frame states.
    """
    labels = all_labels(params.L) if labels is None else list(labels)
    if spectrum is None:
        spectrum = diagonalize(build_h_spin(params), sector="symmetric")
    assignment = assign_labels(spectrum, labels, params.L)
    out = {}
    for lab, i in assignment.items():
        ref = rotate_state(construct_state(params.L, lab), spectrum.frame)
        out[lab] = MatchedState(lab, float(spectrum.values[i]), spectrum.state(i), float(spectrum.overlaps(ref)[i]))
    return out

"""Density-density correlations g2(x) of ring states.

g2(x) = <n_1 n_{1+x}> / <n_1>^2 - 1 for a fully-symmetric state, where by
default n_k is the Rydberg number operator (1 + Z_k)/2 of the lab frame.
For states with a fixed number of rotated-frame fermions this equals the
hopping correlator <s+_1 s-_{1+x} + h.c.>, which is what the closed form
for the two-fermion states evaluates.  ``density="plus"`` measures the
rotated-frame |+> occupation instead.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .basis import Frame, StateVector, occupations, rotate_state
from .errors import InvalidLabelError, InvalidParameterError, SymmetryWarning, UndefinedCorrelationError
from .fermion import FermionLabel, construct_state
from .model import DENSE_MAX_L, check_sites
from .symmetry import SYMMETRY_TOL, is_fully_symmetric

DENSITY_FLOOR = 1e-12


class Density(enum.Enum):
    RYDBERG = "rydberg"
    PLUS = "plus"


def ring_distance(L, x) -> int:
    """Map any separation onto 0..L//2 using x -> L - x."""
    if isinstance(x, bool) or int(x) != x or x < 0:
        raise InvalidParameterError(f"distance must be a non-negative integer, got {x!r}")
    x = int(x) % L
    return min(x, L - x)


def _density_probabilities(state, density):
    density = Density(density)
    target = Frame.LAB if density is Density.RYDBERG else Frame.ROTATED
    return rotate_state(state, target).probabilities()


def g2_numeric(state: StateVector, x, density="rydberg", check_symmetry=True) -> float:
    """<n_1 n_{1+x}> / <n_1>^2 - 1 evaluated directly on the amplitudes.

    Sites are not averaged: the formula assumes every site has the same
    density, which a non-symmetric state violates (a SymmetryWarning is issued).
    """
    L = state.L
    x = ring_distance(L, x)
    if check_symmetry and not is_fully_symmetric(state, SYMMETRY_TOL):
        warnings.warn("g2 evaluated on a state that is not fully symmetric", SymmetryWarning, stacklevel=2)
    prob = _density_probabilities(state, density)
    occ = occupations(L)
    n1 = float(prob @ occ[0])
    if n1 < DENSITY_FLOOR:
        raise UndefinedCorrelationError(f"<n_1> = {n1:.3e}: g2 undefined for a state without excitations")
    n1x = float(prob @ (occ[0] * occ[x]))
    return n1x / n1**2 - 1.0


def g2_two_analytic(L, p, x) -> float:
    """Closed-form g2(x) of the two-fermion state |2_p>."""
    if isinstance(L, bool) or int(L) != L or L < 3:
        raise InvalidParameterError(f"ring needs L >= 3 sites, got {L!r}")
    if isinstance(p, bool) or int(p) != p or not 1 <= p <= L // 2:
        raise InvalidLabelError(f"p={p!r} outside 1..{L // 2} for L={L}")
    if isinstance(x, bool) or int(x) != x or not 0 <= x <= L // 2:
        raise InvalidParameterError(f"x={x!r} outside 0..{L // 2}")
    if x == 0:
        return 1.0
    th = 2 * math.pi / L * (p - 0.5)
    # th lies strictly inside (0, pi) for allowed p, so cot is finite.
    assert 0 < th < math.pi
    return 4 / L**2 * ((L - 2 * x) * math.cos(th * x) + 2 * math.sin(th * x) / math.tan(th))


def g2_two_profile(L, p) -> np.ndarray:
    return np.array([g2_two_analytic(L, p, x) for x in range(L // 2 + 1)])


@dataclass(frozen=True, eq=False)
class CorrelationProfile:
    """g2 at ring distances 0..L//2."""

    L: int
    values: np.ndarray
    source: str
    meta: dict = field(default_factory=dict)

    @property
    def distances(self) -> np.ndarray:
        return np.arange(self.values.size)


@dataclass(frozen=True, eq=False)
class CorrelationReport:
    analytic: CorrelationProfile
    numeric: CorrelationProfile | None

    @property
    def abs_diff(self) -> np.ndarray | None:
        if self.numeric is None:
            return None
        return np.abs(self.analytic.values - self.numeric.values)

    @property
    def max_abs_diff(self) -> float | None:
        d = self.abs_diff
        return None if d is None else float(d.max())


def profile_of_state(state: StateVector, density="rydberg", source="numeric") -> CorrelationProfile:
    vals = np.array([g2_numeric(state, x, density) for x in range(state.L // 2 + 1)])
    return CorrelationProfile(state.L, vals, source)


def correlation_report(L, p, analytic_only=False, state=None) -> CorrelationReport:
    """Analytic and numeric g2 profiles of |2_p> side by side.

    The numeric side uses the constructed state unless ``state`` is given
    (e.g. an exact eigenvector of the full Hamiltonian).
    """
    # analytic-only runs allocate no state vector, so the Hilbert ceiling does not apply
    L = check_sites(L, ceiling=None if not analytic_only else max(L, 3))
    label = FermionLabel.two(p).validate(L)
    analytic = CorrelationProfile(L, g2_two_profile(L, p), f"analytic(p={p})")
    if analytic_only:
        return CorrelationReport(analytic, None)
    if L > DENSE_MAX_L:
        raise InvalidParameterError(f"numeric g2 needs L <= {DENSE_MAX_L}; use analytic_only for L={L}")
    if state is None:
        state = construct_state(L, label)
    numeric = profile_of_state(state, source=f"numeric(p={p})")
    return CorrelationReport(analytic, numeric)


def extremal_ratio(L) -> float:
    """g2(1) / g2(L//2) for the most oscillating two-fermion state, p = L//2."""
    p = L // 2
    return g2_two_analytic(L, p, 1) / g2_two_analytic(L, p, L // 2)


def envelope_residual(L) -> float:
    """max_x |g2(x, 2_{L/2}) - (-1)^x g2(x, 2_1)| for even L."""
    if L % 2:
        raise InvalidParameterError("the envelope identity holds for even L only")
    xs = range(L // 2 + 1)
    return max(abs(g2_two_analytic(L, L // 2, x) - (-1) ** x * g2_two_analytic(L, 1, x)) for x in xs)

"""Physical parameters of the driven Rydberg ring.

Energies are measured in units of the nearest-neighbour interaction
``beta`` (hbar = 1), times in units of ``1/beta``.
"""

from __future__ import annotations

import math
import os
from dataclasses import asdict, dataclass, replace

from .errors import InvalidParameterError

DEFAULT_MAX_L = 24
DENSE_MAX_L = 14
MAX_L_ENV = "RINGSPIN_MAX_L"


def max_sites() -> int:
    """Hilbert-space ceiling on L, overridable through ``RINGSPIN_MAX_L``."""
    raw = os.environ.get(MAX_L_ENV)
    if raw is None or raw.strip() == "":
        return DEFAULT_MAX_L
    try:
        value = int(raw)
    except ValueError as exc:
        raise InvalidParameterError(f"{MAX_L_ENV}={raw!r} is not an integer") from exc
    if value < 3:
        raise InvalidParameterError(f"{MAX_L_ENV} must be >= 3, got {value}")
    return value


def check_sites(L, ceiling=None) -> int:
    if isinstance(L, bool) or int(L) != L:
        raise InvalidParameterError(f"L must be an integer, got {L!r}")
    L = int(L)
    if L < 3:
        raise InvalidParameterError(f"ring needs L >= 3 sites, got L={L}")
    ceiling = max_sites() if ceiling is None else ceiling
    if L > ceiling:
        raise InvalidParameterError(
            f"L={L} exceeds the Hilbert-space ceiling {ceiling} (set {MAX_L_ENV} to raise it)"
        )
    return L


@dataclass(frozen=True)
class SystemParams:
    """Lattice size and couplings of the spin Hamiltonian.

    Attributes
    ----------
    L : int
        Number of ring sites.
    omega : float
        Collective Rabi frequency (already includes the sqrt(n0) enhancement).
    delta : float
        Laser detuning.
    beta : float
        Nearest-neighbour interaction; 1 sets the energy unit.
    n0 : int
        Atoms per site. Only enters through :func:`collective_rabi`.
    """

    L: int
    omega: float = 0.0
    delta: float = 0.0
    beta: float = 1.0
    n0: int = 1

    def __post_init__(self):
        object.__setattr__(self, "L", check_sites(self.L))
        for name in ("omega", "delta", "beta"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise InvalidParameterError(f"{name} must be finite, got {value}")
            object.__setattr__(self, name, value)
        if self.omega < 0:
            raise InvalidParameterError(f"omega must be >= 0, got {self.omega}")
        if self.beta < 0:
            raise InvalidParameterError(f"beta must be >= 0, got {self.beta}")
        if isinstance(self.n0, bool) or int(self.n0) != self.n0 or self.n0 < 1:
            raise InvalidParameterError(f"n0 must be a positive integer, got {self.n0!r}")
        object.__setattr__(self, "n0", int(self.n0))

    @classmethod
    def from_single_atom(cls, L, omega0, n0=1, delta=0.0, beta=1.0) -> SystemParams:
        return cls(L=L, omega=collective_rabi(omega0, n0), delta=delta, beta=beta, n0=n0)

    def with_(self, **changes) -> SystemParams:
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return asdict(self)


def collective_rabi(omega0, n0):
    """Rabi frequency of a blockaded site holding ``n0`` atoms: ``omega0 * sqrt(n0)``."""
    if isinstance(n0, bool) or int(n0) != n0 or n0 < 1:
        raise InvalidParameterError(f"n0 must be a positive integer, got {n0!r}")
    if omega0 < 0:
        raise InvalidParameterError(f"omega0 must be >= 0, got {omega0}")
    return omega0 * math.sqrt(n0)


def interaction_ratio_nnn(L):
    """Next-nearest over nearest-neighbour van der Waals ratio on a ring of L sites.

    Sites sit on a circle, so the chord to the second neighbour is
    ``2 cos(pi/L)`` times the first; with a 1/r^6 potential the ratio is
    ``(2 cos(pi/L))**-6``, tending to 1/64 for large rings.
    """
    if isinstance(L, bool) or int(L) != L or L < 3:
        raise InvalidParameterError(f"ring needs L >= 3 sites, got L={L!r}")
    return 1.0 / (2.0 * math.cos(math.pi / L)) ** 6

"""Driven Rydberg superatoms on a ring: exact diagonalization, free-fermion states and pulses."""

__version__ = "0.1.0"

from .basis import Frame, SparseOperator, StateVector, rotate_operator, rotate_state, rotation_u
from .correlations import (
    Density,
    correlation_report,
    envelope_residual,
    extremal_ratio,
    g2_numeric,
    g2_two_analytic,
    g2_two_profile,
)
from .dynamics import (
    PropagationResult,
    PulseSchedule,
    Segment,
    excitation_protocol,
    fidelity,
    ground_target,
    leakage_estimate,
    make_ground_prep_schedule,
    pi_pulse_schedule,
    prepare_ground,
    propagate,
    rabi_scan,
    resolve_transition,
)
from .errors import (
    ContractViolationError,
    DegeneratePerturbationError,
    DiagonalizationError,
    ForbiddenTransitionError,
    FrameMismatchError,
    IntegrationError,
    InvalidLabelError,
    InvalidParameterError,
    LifetimeWarning,
    NumericalError,
    RegimeWarning,
    RingSpinError,
    StiffScheduleError,
    SymmetryWarning,
    UndefinedCorrelationError,
    UnsupportedTargetError,
)
from .fermion import (
    FermionLabel,
    all_labels,
    construct_state,
    enumerate_labels,
    label_energy,
    matched_eigenstates,
    second_order_shift_ground,
    second_order_shift_one,
)
from .hamiltonian import Spectrum, build_h_rotated, build_h_spin, build_rotated_parts, diagonalize, manifold_number
from .model import SystemParams
from .symmetry import apply_reversal, apply_shift, fully_symmetric_basis, is_fully_symmetric, project_fully_symmetric

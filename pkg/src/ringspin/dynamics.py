"""Time-dependent driving of the ring: pulse schedules and Schrodinger propagation.

Propagation always runs in the lab frame under H_spin(omega(t), delta(t));
analytic targets are rotated into the lab frame before fidelities are taken.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp

from .basis import Frame, StateVector, rotate_state
from .errors import (
    ForbiddenTransitionError,
    FrameMismatchError,
    IntegrationError,
    InvalidParameterError,
    LifetimeWarning,
    RegimeWarning,
    StiffScheduleError,
    UnsupportedTargetError,
)
from .fermion import FermionLabel, all_labels, construct_state, label_energy, matched_eigenstates
from .hamiltonian import excitation_number, manifold_number, neighbour_pairs, number_operator, sigma_x_total
from .model import SystemParams
from .symmetry import symmetry_residuals

NORM_DRIFT_MAX = 1e-8
LIFETIME_BUDGET = 60.0


# --------------------------------------------------------------------------
# waveforms and schedules
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Const:
    value: float
    kind = "const"

    def __call__(self, t, duration):
        return np.full_like(np.asarray(t, dtype=float), self.value)


@dataclass(frozen=True)
class Sin2Rise:
    """final * sin^2(pi t / (2 duration)): 0 at the start, ``final`` at the end."""

    final: float
    kind = "sin2_rise"

    def __call__(self, t, duration):
        return self.final * np.sin(np.pi * np.asarray(t, dtype=float) / (2 * duration)) ** 2


@dataclass(frozen=True)
class Sin2Fall:
    """initial * (1 - sin^2(pi t / (2 duration)))."""

    initial: float
    kind = "sin2_fall"

    def __call__(self, t, duration):
        return self.initial * (1 - np.sin(np.pi * np.asarray(t, dtype=float) / (2 * duration)) ** 2)


@dataclass(frozen=True)
class Cosine:
    """offset + amplitude * cos(frequency t + phase), t local to the segment."""

    amplitude: float
    frequency: float
    phase: float = 0.0
    offset: float = 0.0
    kind = "cosine"

    def __call__(self, t, duration):
        t = np.asarray(t, dtype=float)
        return self.offset + self.amplitude * np.cos(self.frequency * t + self.phase)


_WAVEFORMS = {cls.kind: cls for cls in (Const, Sin2Rise, Sin2Fall, Cosine)}


def _waveform_to_dict(w):
    d = {"kind": w.kind}
    d.update(w.__dict__)
    return d


def _waveform_from_dict(d):
    d = dict(d)
    return _WAVEFORMS[d.pop("kind")](**d)


@dataclass(frozen=True)
class Segment:
    """A time window with one waveform per control channel."""

    duration: float
    omega: object
    delta: object
    name: str = ""

    def __post_init__(self):
        if not self.duration > 0:
            raise InvalidParameterError(f"segment duration must be > 0, got {self.duration}")
        # omega(t) >= 0 is checked on a grid: waveforms are smooth on the segment.
        ts = np.linspace(0, self.duration, 257)
        if np.min(self.omega(ts, self.duration)) < -1e-12:
            raise InvalidParameterError(f"segment {self.name or '?'} drives omega(t) < 0")

    def to_dict(self):
        return {
            "name": self.name,
            "duration": self.duration,
            "omega": _waveform_to_dict(self.omega),
            "delta": _waveform_to_dict(self.delta),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            duration=float(d["duration"]),
            omega=_waveform_from_dict(d["omega"]),
            delta=_waveform_from_dict(d["delta"]),
            name=d.get("name", ""),
        )


def omega_ramp_sin2(omega_final, t_final, delta=0.0) -> Segment:
    return Segment(t_final, Sin2Rise(omega_final), Const(delta), "omega_ramp_sin2")


def delta_ramp_sin2(delta0, t_final, omega=0.0) -> Segment:
    return Segment(t_final, Const(omega), Sin2Fall(delta0), "delta_ramp_sin2")


def delta_cosine(omega, delta_osc, frequency, duration, phase=0.0, delta_offset=0.0) -> Segment:
    return Segment(duration, Const(omega), Cosine(delta_osc, frequency, phase, delta_offset), "delta_cosine")


def constant(omega, delta, duration) -> Segment:
    return Segment(duration, Const(omega), Const(delta), "constant")


@dataclass(frozen=True)
class PulseSchedule:
    """Ordered segments defining omega(t) and delta(t) on [0, T]."""

    segments: tuple[Segment, ...]

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        if not self.segments:
            raise InvalidParameterError("a schedule needs at least one segment")

    @property
    def total_duration(self) -> float:
        return float(sum(s.duration for s in self.segments))

    @property
    def boundaries(self) -> np.ndarray:
        return np.concatenate([[0.0], np.cumsum([s.duration for s in self.segments])])

    def _locate(self, t):
        b = self.boundaries
        i = int(np.clip(np.searchsorted(b, t, side="right") - 1, 0, len(self.segments) - 1))
        return i, t - b[i]

    def omega(self, t) -> float:
        i, tl = self._locate(t)
        seg = self.segments[i]
        return float(seg.omega(tl, seg.duration))

    def delta(self, t) -> float:
        i, tl = self._locate(t)
        seg = self.segments[i]
        return float(seg.delta(tl, seg.duration))

    def then(self, other: PulseSchedule) -> PulseSchedule:
        return PulseSchedule(self.segments + other.segments)

    def to_dict(self):
        return {"segments": [s.to_dict() for s in self.segments], "total_duration": self.total_duration}

    @classmethod
    def from_dict(cls, d):
        return cls(tuple(Segment.from_dict(s) for s in d["segments"]))


# --------------------------------------------------------------------------
# propagation
# --------------------------------------------------------------------------


def fidelity(a: StateVector, b: StateVector) -> float:
    """|<a|b>|^2."""
    if a.frame is not b.frame:
        raise FrameMismatchError("fidelity between states in different frames")
    return float(abs(a.overlap(b)) ** 2)


@dataclass(frozen=True, eq=False)
class PropagationResult:
    final_state: StateVector
    times: np.ndarray
    states: list
    nfev: int
    norm_drift: float
    symmetry_residuals: np.ndarray
    duration: float
    rel_tol: float
    meta: dict = field(default_factory=dict)

    @property
    def max_symmetry_residual(self) -> float:
        return float(self.symmetry_residuals.max()) if self.symmetry_residuals.size else 0.0


def _rhs_factory(L, beta, segment):
    sx = sigma_x_total(L)
    n = excitation_number(L)
    interaction = beta * neighbour_pairs(L)
    T = segment.duration

    def rhs(t, y):
        om = float(segment.omega(t, T))
        de = float(segment.delta(t, T))
        return -1j * (om * (sx @ y) + (de * n + interaction) * y)

    return rhs


def propagate(
    initial: StateVector,
    schedule: PulseSchedule,
    params: SystemParams,
    rel_tol=1e-10,
    n_checkpoints=10,
    checkpoint_times=None,
    on_checkpoint: Callable | None = None,
) -> PropagationResult:
    """Integrate i d/dt psi = H_spin(t) psi over the schedule.

    ``params`` supplies L and beta; omega and delta come from the schedule.
    An adaptive 8th-order Runge-Kutta (DOP853) runs segment by segment so
    no step straddles a waveform kink.  The state is never renormalized:
    a norm drift above 1e-8 raises :class:`IntegrationError`.
    """
    if not 1e-12 <= rel_tol <= 1e-6:
        raise InvalidParameterError(f"rel_tol must lie in [1e-12, 1e-6], got {rel_tol}")
    if initial.L != params.L:
        raise InvalidParameterError(f"initial state has L={initial.L}, params L={params.L}")
    T = schedule.total_duration
    if T > LIFETIME_BUDGET:
        warnings.warn(
            f"schedule lasts {T:.3g}/beta, above the {LIFETIME_BUDGET:g}/beta Rydberg lifetime budget",
            LifetimeWarning,
            stacklevel=2,
        )
    if checkpoint_times is None:
        checkpoint_times = np.linspace(0.0, T, max(int(n_checkpoints), 1) + 1)
    checkpoint_times = np.unique(np.clip(np.asarray(checkpoint_times, dtype=float), 0.0, T))

    y = rotate_state(initial, Frame.LAB).amplitudes.copy()
    bounds = schedule.boundaries
    times, states = [], []
    nfev = 0

    def record(t, vec):
        st = StateVector(vec, Frame.LAB) if abs(np.linalg.norm(vec) - 1) <= NORM_DRIFT_MAX else None
        if st is None:
            raise IntegrationError(
                f"norm drift {abs(np.linalg.norm(vec) - 1):.2e} exceeds {NORM_DRIFT_MAX:g} at t={t:.6g}"
            )
        times.append(float(t))
        states.append(st)
        if on_checkpoint is not None:
            on_checkpoint(float(t), st)

    if checkpoint_times.size and checkpoint_times[0] == 0.0:
        record(0.0, y)
    atol = rel_tol * 1e-2
    for i, seg in enumerate(schedule.segments):
        t0, t1 = bounds[i], bounds[i + 1]
        inside = checkpoint_times[(checkpoint_times > t0) & (checkpoint_times <= t1)]
        sol = solve_ivp(
            _rhs_factory(params.L, params.beta, seg),
            (0.0, t1 - t0),
            y,
            method="DOP853",
            rtol=rel_tol,
            atol=atol,
            t_eval=np.unique(np.append(inside - t0, t1 - t0)),
        )
        nfev += sol.nfev
        if sol.status != 0:
            raise StiffScheduleError(f"segment {i} ({seg.name}) failed at t={t0 + sol.t[-1]:.6g}: {sol.message}")
        for j, tl in enumerate(inside - t0):
            record(t0 + tl, sol.y[:, j])
        y = sol.y[:, -1]

    drift = abs(np.linalg.norm(y) - 1.0)
    if drift > NORM_DRIFT_MAX:
        raise IntegrationError(f"norm drift {drift:.2e} exceeds {NORM_DRIFT_MAX:g}")
    final = StateVector(y, Frame.LAB)
    if not times or times[-1] < T:
        times.append(T)
        states.append(final)
    drift = max(drift, max(abs(s.norm() - 1.0) for s in states))
    residuals = np.array([symmetry_residuals(s) for s in states]).reshape(-1, 2)
    return PropagationResult(
        final_state=final,
        times=np.array(times),
        states=states,
        nfev=nfev,
        norm_drift=float(drift),
        symmetry_residuals=residuals,
        duration=T,
        rel_tol=rel_tol,
    )


def time_series(result: PropagationResult, target: StateVector) -> np.ndarray:
    """Rows (t, fidelity-to-target, <m>, norm) for every checkpoint."""
    target = rotate_state(target, Frame.LAB)
    rows = []
    for t, s in zip(result.times, result.states):
        m, _ = manifold_number(rotate_state(s, Frame.ROTATED))
        rows.append((t, fidelity(target, s), m, s.norm()))
    return np.array(rows)


# --------------------------------------------------------------------------
# ground-state preparation
# --------------------------------------------------------------------------

DEFAULT_OMEGA_FINAL = 10.0


def make_ground_prep_schedule(delta0, omega_final=DEFAULT_OMEGA_FINAL, t_final=0.9) -> PulseSchedule:
    """Simultaneous sin^2 ramps: omega 0 -> omega_final, delta delta0 -> 0."""
    if not delta0 > 0:
        raise InvalidParameterError(
            "delta0 must be > 0: only the branch where the all-ground state is adiabatically "
            "connected to |G> is supported (negative detuning crosses avoided crossings)"
        )
    if not t_final > 0:
        raise InvalidParameterError(f"t_final must be > 0, got {t_final}")
    if omega_final < 0:
        raise InvalidParameterError(f"omega_final must be >= 0, got {omega_final}")
    seg = Segment(t_final, Sin2Rise(omega_final), Sin2Fall(delta0), "ground_prep")
    return PulseSchedule((seg,))


def ground_target(L) -> StateVector:
    """Analytic ground state prod_k |->_k expressed in the lab frame."""
    return rotate_state(construct_state(L, FermionLabel.ground()), Frame.LAB)


def initial_vacuum(L) -> StateVector:
    """All sites in |P> (no Rydberg excitation), lab frame."""
    return StateVector.basis_state(L, 0, Frame.LAB)


@dataclass(frozen=True, eq=False)
class GroundPrepResult:
    propagation: PropagationResult
    fidelity: float
    schedule: PulseSchedule
    params: SystemParams


def prepare_ground(
    L, delta0=45.0, t_final=0.9, omega_final=DEFAULT_OMEGA_FINAL, beta=1.0, rel_tol=1e-10, n_checkpoints=10
) -> GroundPrepResult:
    params = SystemParams(L=L, omega=omega_final, delta=0.0, beta=beta)
    schedule = make_ground_prep_schedule(delta0, omega_final, t_final)
    res = propagate(initial_vacuum(L), schedule, params, rel_tol=rel_tol, n_checkpoints=n_checkpoints)
    return GroundPrepResult(res, fidelity(ground_target(L), res.final_state), schedule, params)


# --------------------------------------------------------------------------
# oscillating-detuning pi pulses
# --------------------------------------------------------------------------


def leakage_estimate(params: SystemParams) -> tuple[float, float]:
    """Second-order inter-manifold scales (delta^2/omega, beta^2/omega)."""
    if not params.omega > 0:
        raise InvalidParameterError("leakage rates are undefined for omega = 0")
    return params.delta**2 / params.omega, params.beta**2 / params.omega


@dataclass(frozen=True)
class Transition:
    source: FermionLabel
    target: FermionLabel
    e_from: float
    e_to: float
    matrix_element: float
    energy_source: str

    @property
    def frequency(self) -> float:
        return self.e_to - self.e_from


def sigma_x_matrix_element(L, source: FermionLabel, target: FermionLabel) -> float:
    """|<target| sum_k X_k |source>| on the constructed rotated-frame states.

    sum_k X_k = L - 2 dH/d(delta) in the rotated frame, so this is twice the
    detuning coupling between distinct states.
    """
    a = construct_state(L, source)
    b = construct_state(L, target)
    return float(abs(np.vdot(b.amplitudes, sigma_x_total(L) @ a.amplitudes)))


def pi_pulse_duration(matrix_element, delta_osc) -> float:
    """t_pi = pi / (2 Omega_eff), Omega_eff = |M| delta_osc / 2 (rotating-wave)."""
    coupling = abs(matrix_element) * delta_osc / 2
    if coupling == 0:
        raise ForbiddenTransitionError("zero coupling: no pi pulse exists")
    return math.pi / (2 * coupling)


def _check_regime(params, delta_osc):
    if not delta_osc < params.beta:
        warnings.warn(
            f"delta_osc={delta_osc} is not small against beta={params.beta}; neighbouring levels will be driven",
            RegimeWarning,
            stacklevel=3,
        )
    if not params.beta < params.omega:
        warnings.warn(
            f"beta={params.beta} is not small against omega={params.omega}; free-fermion picture is poor",
            RegimeWarning,
            stacklevel=3,
        )


def resolve_transition(params: SystemParams, source, target, energy_source="exact", matched=None) -> Transition:
    """Energies and detuning matrix element <target| dH/d(delta) |source>.

    ``energy_source="analytic"`` uses the closed-form states and energies
    (with perturbative corrections where they exist); ``"exact"`` uses the
    fully-symmetric eigenpairs of H_spin matched to the labels.
    """
    if abs(source.n_fermions - target.n_fermions) != 1:
        raise ForbiddenTransitionError(
            f"{source} -> {target}: the detuning flips one site, so only fermion-number changes of 1 are driven"
        )
    N = number_operator(params.L, Frame.LAB)
    if energy_source == "analytic":
        a = rotate_state(construct_state(params.L, source), Frame.LAB)
        b = rotate_state(construct_state(params.L, target), Frame.LAB)
        e_from = label_energy(params, source, corrected=True).value
        e_to = label_energy(params, target, corrected=True).value
    elif energy_source == "exact":
        matched = matched_eigenstates(params) if matched is None else matched
        a, b = matched[source].state, matched[target].state
        e_from, e_to = matched[source].energy, matched[target].energy
    else:
        raise InvalidParameterError(f"energy_source must be 'analytic' or 'exact', got {energy_source!r}")
    m = abs(np.vdot(b.amplitudes, N.apply(a)))
    if m < 1e-10:
        raise ForbiddenTransitionError(f"{source} -> {target}: vanishing matrix element ({m:.2e})")
    return Transition(source, target, float(e_from), float(e_to), float(m), energy_source)


def pi_pulse_schedule(transition: Transition, delta_osc, params: SystemParams) -> PulseSchedule:
    """One resonant DeltaCosine segment transferring population along ``transition``."""
    if not delta_osc > 0:
        raise InvalidParameterError(f"delta_osc must be > 0, got {delta_osc}")
    _check_regime(params, delta_osc)
    t_pi = pi_pulse_duration(transition.matrix_element, delta_osc)
    seg = delta_cosine(params.omega, delta_osc, transition.frequency, t_pi, delta_offset=params.delta)
    return PulseSchedule((seg,))


@dataclass(frozen=True, eq=False)
class ExcitationResult:
    target: FermionLabel
    propagation: PropagationResult
    transitions: list
    schedule: PulseSchedule
    target_fidelity: float
    target_population: float
    overlaps: dict
    populations: dict
    leakage: float

    @property
    def dominant(self) -> FermionLabel:
        return max(self.populations, key=self.populations.get)


def excitation_protocol(
    target: FermionLabel,
    params: SystemParams,
    delta_osc,
    energy_source="exact",
    rel_tol=1e-10,
    n_checkpoints=20,
    initial: StateVector | None = None,
) -> ExcitationResult:
    """Drive |G> to |1> (one pi pulse) or to |2_p> (two pi pulses).

    The system starts in the analytic |G> unless ``initial`` is given.
    ``overlaps`` are fidelities with the analytic states, ``populations``
    the weights on the matched exact eigenstates.
    """
    n = target.n_fermions
    if n not in (1, 2):
        raise UnsupportedTargetError(f"excitation protocol covers |1> and |2_p> only, got {target}")
    target.validate(params.L)
    matched = matched_eigenstates(params, all_labels(params.L, max_fermions=3))
    chain = [FermionLabel.ground(), FermionLabel.single()] + ([target] if n == 2 else [])
    transitions = [
        resolve_transition(params, a, b, energy_source, matched) for a, b in zip(chain[:-1], chain[1:])
    ]
    schedule = None
    for tr in transitions:
        piece = pi_pulse_schedule(tr, delta_osc, params)
        schedule = piece if schedule is None else schedule.then(piece)
    start = ground_target(params.L) if initial is None else initial
    res = propagate(start, schedule, params, rel_tol=rel_tol, n_checkpoints=n_checkpoints)
    final = res.final_state
    overlaps = {
        lab: fidelity(rotate_state(construct_state(params.L, lab), Frame.LAB), final) for lab in matched
    }
    populations = {lab: fidelity(m.state, final) for lab, m in matched.items()}
    leakage = float(sum(v for lab, v in populations.items() if lab != target))
    return ExcitationResult(
        target=target,
        propagation=res,
        transitions=transitions,
        schedule=schedule,
        target_fidelity=overlaps[target],
        target_population=populations[target],
        overlaps=overlaps,
        populations=populations,
        leakage=leakage,
    )


@dataclass(frozen=True, eq=False)
class RabiScan:
    times: np.ndarray
    populations: np.ndarray
    transition: Transition
    t_pi: float

    @property
    def peak_time(self) -> float:
        return float(self.times[int(np.argmax(self.populations))])

    @property
    def peak_population(self) -> float:
        return float(np.max(self.populations))


def rabi_scan(
    params: SystemParams,
    delta_osc,
    source=None,
    target=None,
    energy_source="exact",
    span=1.6,
    n_points=801,
    rel_tol=1e-10,
    initial: StateVector | None = None,
) -> RabiScan:
    """Population of ``target`` under a resonant drive kept on for ``span`` pi-times."""
    source = FermionLabel.ground() if source is None else source
    target = FermionLabel.single() if target is None else target
    matched = matched_eigenstates(params, all_labels(params.L, max_fermions=3))
    tr = resolve_transition(params, source, target, energy_source, matched)
    _check_regime(params, delta_osc)
    t_pi = pi_pulse_duration(tr.matrix_element, delta_osc)
    seg = delta_cosine(params.omega, delta_osc, tr.frequency, span * t_pi, delta_offset=params.delta)
    if initial is None:
        initial = (
            ground_target(params.L)
            if source == FermionLabel.ground()
            else rotate_state(construct_state(params.L, source), Frame.LAB)
        )
    ref = matched[target].state
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LifetimeWarning)
        res = propagate(
            initial,
            PulseSchedule((seg,)),
            params,
            rel_tol=rel_tol,
            checkpoint_times=np.linspace(0, span * t_pi, n_points),
        )
    pops = np.array([fidelity(ref, s) for s in res.states])
    return RabiScan(res.times, pops, tr, t_pi)

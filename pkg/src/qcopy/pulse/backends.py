"""Execution backends for pulse schedules on a transmon qutrit.

``ideal``       one exact subspace rotation per instruction.
``timedomain``  RK4 integration of the three-level RWA Schrodinger equation.
``lindblad``    RK4 integration of the master equation with T1/T2 relaxation.

The integrators work in the interaction picture of the bare transmon (each
level rotating at its own energy).  There a drive at carrier ``f`` and phase
``phase`` couples

    A-B with  Omega(t)/2 * exp(-1j*phase) * exp(1j*2pi*(f - f_ab)*t)
    B-C with  sqrt(2)*Omega(t)/2 * exp(-1j*phase) * exp(1j*2pi*(f - f_bc)*t)

with ``t`` the absolute schedule time, so carrier phase is continuous across
pulses and idle segments are the identity for closed evolution.  On resonance
this reproduces the ideal rotations exactly.
"""

from __future__ import annotations

import math
import warnings
from typing import Sequence

import numpy as np

from ..device import DeviceSpec
from ..qutrit import (
    QutritDensity,
    QutritState,
    Subspace,
    SubspaceRotation,
    apply,
    rotation_unitary,
)
from .schedule import PulseSchedule, calibrate_peak, gaussian_shape, same_timing

CARRIER_TOL = 1e-6  # GHz
TWO_PI_MHZ = 2 * math.pi * 1000.0  # GHz -> rad/us
# Phase advanced per step (|detuning| + sqrt(2)*peak Rabi rate, times step).
# Above MAX the run is refused; above ACCURATE the norm (1e-9) and positivity
# (1e-8) guarantees no longer hold and a StepAccuracyWarning is issued.
MAX_PHASE_PER_STEP = 1.0
ACCURATE_PHASE_PER_STEP = 0.1
SQRT2 = math.sqrt(2.0)


class UnknownCarrier(ValueError):
    pass


class StepTooLarge(ValueError):
    pass


class StepAccuracyWarning(UserWarning):
    pass


def _resonant_subspace(freq: float, dev: DeviceSpec) -> Subspace:
    if abs(freq - dev.omega_ab) <= CARRIER_TOL:
        return Subspace.AB
    if abs(freq - dev.omega_bc) <= CARRIER_TOL:
        return Subspace.BC
    raise UnknownCarrier(
        f"carrier {freq!r} GHz matches neither omega_ab={dev.omega_ab} nor omega_bc={dev.omega_bc}"
    )


def _nearest_subspace(freq: float, dev: DeviceSpec) -> Subspace:
    if abs(freq - dev.omega_ab) <= abs(freq - dev.omega_bc):
        return Subspace.AB
    return Subspace.BC


def run_ideal(sched: PulseSchedule, dev: DeviceSpec) -> QutritState:
    state = QutritState.ground()
    for p in sched:
        rot = SubspaceRotation(_resonant_subspace(p.carrier_freq, dev), p.envelope.area, p.phase)
        state = apply(rotation_unitary(rot), state)
    return state


def ideal_probabilities(schedules: Sequence[PulseSchedule], dev: DeviceSpec) -> np.ndarray:
    return np.array([np.abs(run_ideal(s, dev).vector) ** 2 for s in schedules]).reshape(-1, 3)


# -- time-domain machinery ---------------------------------------------------


class _Drive:
    """Batched Hamiltonian of one instruction slot across several schedules."""

    def __init__(self, instrs, dev: DeviceSpec):
        self.t0 = instrs[0].start_time
        self.duration = instrs[0].envelope.duration
        self.sigma = np.array([p.envelope.sigma for p in instrs])
        peak = []
        for p in instrs:
            omega = calibrate_peak(p.envelope)
            if _nearest_subspace(p.carrier_freq, dev) is Subspace.BC:
                omega /= SQRT2
            peak.append(omega)
        self.peak = np.array(peak)
        freq = np.array([p.carrier_freq for p in instrs])
        self.det_ab = TWO_PI_MHZ * (freq - dev.omega_ab)
        self.det_bc = TWO_PI_MHZ * (freq - dev.omega_bc)
        self.phasor = np.exp(-1j * np.array([p.phase for p in instrs]))

    def max_rate(self) -> float:
        det = np.maximum(np.abs(self.det_ab), np.abs(self.det_bc))
        return float(np.max(det + SQRT2 * self.peak))

    def hamiltonian(self, t: float) -> np.ndarray:
        omega = self.peak * gaussian_shape(t - self.t0, self.duration, self.sigma)
        c_ab = 0.5 * omega * self.phasor * np.exp(1j * self.det_ab * t)
        c_bc = SQRT2 * 0.5 * omega * self.phasor * np.exp(1j * self.det_bc * t)
        h = np.zeros((len(omega), 3, 3), dtype=complex)
        h[:, 0, 1] = c_ab
        h[:, 1, 0] = c_ab.conj()
        h[:, 1, 2] = c_bc
        h[:, 2, 1] = c_bc.conj()
        return h


def step_phase(schedules: Sequence[PulseSchedule], dev: DeviceSpec, dt: float) -> float:
    """Largest phase any pulse of ``schedules`` advances in one integration step."""
    worst = 0.0
    for sched in schedules:
        for p in sched:
            drive = _Drive([p], dev)
            n = max(1, math.ceil(drive.duration / dt - 1e-9))
            worst = max(worst, drive.duration / n * drive.max_rate())
    return worst


def _accurate(schedules, dev, dt) -> bool:
    phase = step_phase(schedules, dev, dt)
    if phase <= ACCURATE_PHASE_PER_STEP:
        return True
    warnings.warn(
        f"dt={dt!r} us advances {phase:.3g} rad per step (> {ACCURATE_PHASE_PER_STEP}); "
        "norm and positivity are not guaranteed to 1e-9/1e-8",
        StepAccuracyWarning,
        stacklevel=3,
    )
    return False


def _segments(schedules: Sequence[PulseSchedule], dev: DeviceSpec, dt: float):
    """Yield (t_start, n_steps, h, drive-or-None) covering [0, end of last pulse]."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    if not same_timing(schedules):
        raise ValueError("batched schedules must share pulse timing")
    t = 0.0
    for k in range(len(schedules[0])):
        instrs = [s.instructions[k] for s in schedules]
        drive = _Drive(instrs, dev)
        if drive.t0 > t:
            n = max(1, math.ceil((drive.t0 - t) / dt - 1e-9))
            yield t, n, (drive.t0 - t) / n, None
        n = max(1, math.ceil(drive.duration / dt - 1e-9))
        h = drive.duration / n
        if h * drive.max_rate() > MAX_PHASE_PER_STEP:
            raise StepTooLarge(
                f"dt={dt!r} us too large: {h * drive.max_rate():.3g} rad per step "
                f"exceeds {MAX_PHASE_PER_STEP} (need dt <= {MAX_PHASE_PER_STEP / drive.max_rate():.3g} us)"
            )
        yield drive.t0, n, h, drive
        t = drive.t0 + drive.duration


def _schrodinger_rhs(h: np.ndarray, psi: np.ndarray) -> np.ndarray:
    return -1j * (h @ psi[..., None])[..., 0]


def _integrate_states(schedules, dev, dt, check=False) -> np.ndarray:
    psi = np.zeros((len(schedules), 3), dtype=complex)
    psi[:, 0] = 1.0
    for t0, n, h, drive in _segments(schedules, dev, dt):
        if drive is None:
            continue  # bare evolution is the identity in this frame
        h_next = drive.hamiltonian(t0)
        for k in range(n):
            t = t0 + k * h
            h_start = h_next
            h_mid = drive.hamiltonian(t + 0.5 * h)
            h_next = drive.hamiltonian(t0 + (k + 1) * h)
            k1 = _schrodinger_rhs(h_start, psi)
            k2 = _schrodinger_rhs(h_mid, psi + 0.5 * h * k1)
            k3 = _schrodinger_rhs(h_mid, psi + 0.5 * h * k2)
            k4 = _schrodinger_rhs(h_next, psi + h * k3)
            psi = psi + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            if check:
                norm = np.sum(np.abs(psi) ** 2, axis=1)
                assert np.all(np.abs(norm - 1.0) < 1e-9), f"norm drift {norm}"
    return psi


def _batched(schedules, fn, *args, **kwargs):
    schedules = list(schedules)
    if not schedules:
        return []
    if same_timing(schedules):
        return list(fn(schedules, *args, **kwargs))
    return [fn([s], *args, **kwargs)[0] for s in schedules]


def run_timedomain(sched: PulseSchedule, dev: DeviceSpec, dt: float, check: bool = False) -> QutritState:
    if len(sched) == 0:
        if not dt > 0:
            raise ValueError("dt must be positive")
        return QutritState.ground()
    psi = _integrate_states([sched], dev, dt, check)[0]
    if _accurate([sched], dev, dt):
        return QutritState.from_vector(psi)
    return QutritState.from_vector(psi, tol=1e-5)


def timedomain_probabilities(schedules: Sequence[PulseSchedule], dev: DeviceSpec, dt: float,
                             check: bool = False) -> np.ndarray:
    """Final level populations, shape (n, 3); schedules sharing timing run as one batch."""
    schedules = list(schedules)
    if schedules and len(schedules[0]) == 0:
        return np.tile([1.0, 0.0, 0.0], (len(schedules), 1))
    psi = _batched(schedules, _integrate_states, dev, dt, check)
    _accurate(schedules, dev, dt)
    return (np.abs(np.array(psi)) ** 2).reshape(-1, 3)


# -- Lindblad -----------------------------------------------------------------


def collapse_operators(dev: DeviceSpec) -> list[np.ndarray]:
    """Decay B->A and C->B at 1/t1; pure dephasing of B and C.

    Dephasing operators sqrt(2*gamma_phi)|k><k| make the A-B coherence decay at
    1/(2*t1) + gamma_phi = 1/t2.
    """
    ops = []
    gamma1 = 1.0 / dev.t1
    gamma_phi = max(0.0, 1.0 / dev.t2 - 0.5 / dev.t1)
    for lo, hi in ((0, 1), (1, 2)):
        op = np.zeros((3, 3), dtype=complex)
        op[lo, hi] = math.sqrt(gamma1)
        ops.append(op)
    if gamma_phi > 0:
        for k in (1, 2):
            op = np.zeros((3, 3), dtype=complex)
            op[k, k] = math.sqrt(2 * gamma_phi)
            ops.append(op)
    return ops


class _Dissipator:
    """Time-independent part of the master equation for a fixed device."""

    def __init__(self, dev: DeviceSpec):
        ops = collapse_operators(dev)
        # vec(L rho L^dag) = kron(L, conj(L)) vec(rho) for row-major vec
        self.jump_map = sum((np.kron(op, op.conj()) for op in ops), np.zeros((9, 9), dtype=complex))
        self.decay = sum((op.conj().T @ op for op in ops), np.zeros((3, 3), dtype=complex))


def _lindblad_rhs(h, rho, diss: _Dissipator):
    h_eff = h - 0.5j * diss.decay
    out = -1j * (h_eff @ rho - rho @ h_eff.conj().swapaxes(-1, -2))
    jumps = (rho.reshape(-1, 9) @ diss.jump_map.T).reshape(rho.shape)
    return out + jumps


def _idle_rk4_map(diss: _Dissipator, h: float) -> np.ndarray:
    """One RK4 step of the drive-free master equation as a 9x9 matrix on vec(rho)."""
    basis = np.eye(9, dtype=complex).reshape(9, 3, 3)
    zero = np.zeros((9, 3, 3), dtype=complex)
    k1 = _lindblad_rhs(zero, basis, diss)
    k2 = _lindblad_rhs(zero, basis + 0.5 * h * k1, diss)
    k3 = _lindblad_rhs(zero, basis + 0.5 * h * k2, diss)
    k4 = _lindblad_rhs(zero, basis + h * k3, diss)
    out = basis + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return out.reshape(9, 9).T


def _integrate_density(schedules, dev, dt, check=False) -> np.ndarray:
    b = len(schedules)
    rho = np.zeros((b, 3, 3), dtype=complex)
    rho[:, 0, 0] = 1.0
    diss = _Dissipator(dev)
    for t0, n, h, drive in _segments(schedules, dev, dt):
        if drive is None:
            step = _idle_rk4_map(diss, h)
            prop = np.linalg.matrix_power(step, n)
            rho = (rho.reshape(b, 9) @ prop.T).reshape(b, 3, 3)
            continue
        ham = drive.hamiltonian
        h_next = ham(t0)
        for k in range(n):
            t = t0 + k * h
            h_start = h_next
            h_mid = ham(t + 0.5 * h)
            h_next = ham(t0 + (k + 1) * h)
            k1 = _lindblad_rhs(h_start, rho, diss)
            k2 = _lindblad_rhs(h_mid, rho + 0.5 * h * k1, diss)
            k3 = _lindblad_rhs(h_mid, rho + 0.5 * h * k2, diss)
            k4 = _lindblad_rhs(h_next, rho + h * k3, diss)
            rho = rho + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            if check:
                tr = np.trace(rho, axis1=1, axis2=2).real
                assert np.all(np.abs(tr - 1.0) < 1e-9), f"trace drift {tr}"
                assert all(np.linalg.eigvalsh(0.5 * (r + r.conj().T)).min() > -1e-8 for r in rho)
    return rho


def run_lindblad(sched: PulseSchedule, dev: DeviceSpec, dt: float, check: bool = False) -> QutritDensity:
    if len(sched) == 0:
        if not dt > 0:
            raise ValueError("dt must be positive")
        return QutritDensity.ground()
    rho = _integrate_density([sched], dev, dt, check)[0]
    if _accurate([sched], dev, dt):
        return QutritDensity(rho)
    return QutritDensity(rho, positivity_tol=1e-5)


def lindblad_populations(schedules: Sequence[PulseSchedule], dev: DeviceSpec, dt: float,
                         check: bool = False) -> np.ndarray:
    schedules = list(schedules)
    if schedules and len(schedules[0]) == 0:
        return np.tile([1.0, 0.0, 0.0], (len(schedules), 1))
    rho = _batched(schedules, _integrate_density, dev, dt, check)
    _accurate(schedules, dev, dt)
    return np.real(np.array([np.diag(r) for r in rho])).reshape(-1, 3)

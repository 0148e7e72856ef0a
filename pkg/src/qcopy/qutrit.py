"""Three-level state algebra for the transmon levels A (ground), B, C.

Drive rotations use the convention

    R(theta, phase) = [[cos(theta/2),                 -1j*exp(-1j*phase)*sin(theta/2)],
                       [-1j*exp(1j*phase)*sin(theta/2), cos(theta/2)]]

on the addressed two-level block (AB or BC) and identity on the spectator
level.  This is exp(-1j*theta/2*(cos(phase)*X + sin(phase)*Y)); only phase
differences between pulses are observable.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

NORM_TOL = 1e-12
# Integrated (time-domain) states are accepted at this looser tolerance.
STATE_TOL = 1e-9

LABELS = ("A", "B", "C")


def wrap_phase(phase: float) -> float:
    """Reduce an angle to the half-open interval (-pi, pi]."""
    wrapped = math.remainder(phase, 2 * math.pi)
    if wrapped <= -math.pi:
        wrapped += 2 * math.pi
    return wrapped


class Subspace(enum.Enum):
    AB = (0, 1)
    BC = (1, 2)


@dataclass(frozen=True)
class QutritState:
    amp_a: complex
    amp_b: complex
    amp_c: complex
    tol: float = field(default=STATE_TOL, repr=False, compare=False)

    def __post_init__(self):
        norm = abs(self.amp_a) ** 2 + abs(self.amp_b) ** 2 + abs(self.amp_c) ** 2
        if abs(norm - 1.0) > self.tol:
            raise ValueError(f"state not normalized (norm^2 = {norm!r})")

    @classmethod
    def ground(cls) -> "QutritState":
        return cls(1.0 + 0j, 0j, 0j)

    @classmethod
    def basis(cls, label: str) -> "QutritState":
        amps = [0j, 0j, 0j]
        amps[LABELS.index(label)] = 1.0 + 0j
        return cls(*amps)

    @classmethod
    def from_vector(cls, vec, tol: float = STATE_TOL) -> "QutritState":
        v = np.asarray(vec, dtype=complex).reshape(3)
        return cls(complex(v[0]), complex(v[1]), complex(v[2]), tol)

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.amp_a, self.amp_b, self.amp_c], dtype=complex)

    def density(self) -> "QutritDensity":
        v = self.vector
        return QutritDensity(np.outer(v, v.conj()))


class QutritDensity:
    """Density matrix of the qutrit; validated on construction."""

    def __init__(self, rho, tol: float = STATE_TOL, positivity_tol: float = 1e-8):
        rho = np.array(rho, dtype=complex).reshape(3, 3)
        if not np.allclose(rho, rho.conj().T, atol=tol, rtol=0):
            raise ValueError("density matrix is not Hermitian")
        tr = np.trace(rho).real
        if abs(tr - 1.0) > tol:
            raise ValueError(f"density matrix trace {tr!r} != 1")
        if np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min() < -positivity_tol:
            raise ValueError("density matrix has negative eigenvalues")
        rho.setflags(write=False)
        self.rho = rho

    @classmethod
    def ground(cls) -> "QutritDensity":
        rho = np.zeros((3, 3), dtype=complex)
        rho[0, 0] = 1.0
        return cls(rho)

    def populations(self) -> tuple[float, float, float]:
        d = np.real(np.diag(self.rho))
        return float(d[0]), float(d[1]), float(d[2])

    def __repr__(self):
        return f"QutritDensity({self.rho!r})"


class Unitary3:
    def __init__(self, u):
        u = np.array(u, dtype=complex).reshape(3, 3)
        if not np.allclose(u.conj().T @ u, np.eye(3), atol=NORM_TOL, rtol=0):
            raise ValueError("matrix is not unitary")
        u.setflags(write=False)
        self.u = u

    def __matmul__(self, other: "Unitary3") -> "Unitary3":
        return Unitary3(self.u @ other.u)

    def __repr__(self):
        return f"Unitary3({self.u!r})"


@dataclass(frozen=True)
class SubspaceRotation:
    subspace: Subspace
    theta: float
    phase: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.theta <= 2 * math.pi:
            raise ValueError(f"rotation angle {self.theta!r} outside [0, 2pi]")
        object.__setattr__(self, "phase", wrap_phase(self.phase))


def rotation_unitary(rot: SubspaceRotation) -> Unitary3:
    i, j = rot.subspace.value
    c = math.cos(rot.theta / 2)
    s = math.sin(rot.theta / 2)
    u = np.eye(3, dtype=complex)
    u[i, i] = c
    u[j, j] = c
    u[i, j] = -1j * np.exp(-1j * rot.phase) * s
    u[j, i] = -1j * np.exp(1j * rot.phase) * s
    return Unitary3(u)


def apply(u: Unitary3, s: QutritState) -> QutritState:
    return QutritState.from_vector(u.u @ s.vector)


def probabilities(s: QutritState) -> tuple[float, float, float]:
    p = np.abs(s.vector) ** 2
    return float(p[0]), float(p[1]), float(p[2])


def ramsey_closed_form(amp_scale: float, phi: float) -> tuple[float, float]:
    """Transmission/absorption after pi/2 (AB), scaled pulse at phase phi (AB), pi (BC).

    With theta2 = amp_scale*pi/2 the ground-state population is
    (1 - sin(theta2)*cos(phi))/2; everything else ends in C and counts as absorbed.
    """
    if not 0.0 <= amp_scale <= 1.0:
        raise ValueError(f"amp_scale {amp_scale!r} outside [0, 1]")
    p_transmit = 0.5 * (1.0 - math.sin(amp_scale * math.pi / 2) * math.cos(phi))
    return p_transmit, 1.0 - p_transmit

"""Analytic single-photon model of the interferometer with a thin lossy film.

Kept free of any transmon code so that it can serve as an independent check on
the pulse simulation.  Losses are collected in one aggregated environment
mode, which is all that single-photon detection probabilities need.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

_TOL = 1e-12


@dataclass(frozen=True)
class PhotonModeState:
    amp_pa: complex
    amp_pb: complex
    amp_loss: complex = 0j

    def __post_init__(self):
        norm = abs(self.amp_pa) ** 2 + abs(self.amp_pb) ** 2 + abs(self.amp_loss) ** 2
        if abs(norm - 1.0) > _TOL:
            raise ValueError(f"photon state not normalized (norm^2 = {norm!r})")


@dataclass(frozen=True)
class AbsorberParams:
    """Amplitude transmission ``t`` and reflection ``r`` of the film.

    The ideal coherent absorber is ``t = 0.5, r = -0.5``: 25% transmission and
    reflection, 50% traveling-wave absorption, with the symmetric mode fully
    absorbed.
    """

    t: complex
    r: complex

    def __post_init__(self):
        for name, mode in (("symmetric", self.t + self.r), ("anti-symmetric", self.t - self.r)):
            if abs(mode) ** 2 > 1.0 + _TOL:
                raise ValueError(
                    f"absorber is not passive: {name} eigenmode gain {abs(mode) ** 2:.6g} > 1"
                )

    @classmethod
    def ideal(cls) -> "AbsorberParams":
        return cls(0.5, -0.5)

    @property
    def traveling_wave_absorption(self) -> float:
        return 1.0 - abs(self.t) ** 2 - abs(self.r) ** 2


def beamsplitter_phase(phi: float) -> PhotonModeState:
    """Photon after the 1:1 beamsplitter and a phase delay ``phi`` in arm B."""
    h = 1.0 / math.sqrt(2.0)
    return PhotonModeState(h + 0j, h * cmath.exp(1j * phi), 0j)


def eigenmode_amplitudes(absorber: AbsorberParams) -> tuple[complex, complex]:
    """Survival amplitudes (symmetric, anti-symmetric) of the standing-wave modes."""
    t, r = complex(absorber.t), complex(absorber.r)
    return t + r, t - r


def film_scatter(absorber: AbsorberParams, s: PhotonModeState) -> PhotonModeState:
    t, r = complex(absorber.t), complex(absorber.r)
    pa = t * s.amp_pa + r * s.amp_pb
    pb = t * s.amp_pb + r * s.amp_pa
    lost = (abs(s.amp_pa) ** 2 + abs(s.amp_pb) ** 2) - (abs(pa) ** 2 + abs(pb) ** 2)
    loss_prob = abs(s.amp_loss) ** 2 + max(lost, 0.0)
    return PhotonModeState(pa, pb, complex(math.sqrt(loss_prob)))


def detector_probabilities(absorber: AbsorberParams, phi: float) -> tuple[float, float, float]:
    """Probabilities (SPD-A click, SPD-B click, absorbed) at interferometer phase ``phi``."""
    out = film_scatter(absorber, beamsplitter_phase(phi))
    return abs(out.amp_pa) ** 2, abs(out.amp_pb) ** 2, abs(out.amp_loss) ** 2


def fringe_visibility(absorber: AbsorberParams) -> float:
    """Visibility (max-min)/(max+min) of total transmission versus phase.

    Total transmission is |sigma_s|^2 cos^2(phi/2) + |sigma_a|^2 sin^2(phi/2).
    """
    sigma_s, sigma_a = eigenmode_amplitudes(absorber)
    ps, pa = abs(sigma_s) ** 2, abs(sigma_a) ** 2
    if ps + pa == 0.0:
        raise ValueError("film absorbs both eigenmodes; visibility undefined")
    return abs(pa - ps) / (pa + ps)


def fringe_transmission(visibility: float, phi: float) -> float:
    """Normalized transmission fringe (1 - V cos(phi))/2 with minimum at phi = 0."""
    if not 0.0 <= visibility <= 1.0:
        raise ValueError(f"visibility {visibility!r} outside [0, 1]")
    return 0.5 * (1.0 - visibility * math.cos(phi))


def visibility_to_amp_scale(v: float) -> float:
    """Second-pulse amplitude scale whose transmon fringe has visibility ``v``."""
    if not 0.0 <= v <= 1.0:
        raise ValueError(f"visibility {v!r} outside [0, 1]")
    return 2.0 * math.asin(v) / math.pi

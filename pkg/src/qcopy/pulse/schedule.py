"""Pulse-schedule intermediate representation.

Envelopes are Gaussians centred in their window and truncated at the window
edges (+-3 sigma for the default sigma = duration/6).  Times are in
microseconds, carriers in GHz, angles in radians.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Iterable

import numpy as np


@dataclass(frozen=True)
class GaussianEnvelope:
    duration: float
    sigma: float
    area: float

    def __post_init__(self):
        if not self.duration > 0:
            raise ValueError("pulse duration must be positive")
        if not self.sigma > 0:
            raise ValueError("pulse sigma must be positive")
        if not 0.0 <= self.area <= 2 * math.pi:
            raise ValueError(f"pulse area {self.area!r} outside [0, 2pi]")


def gaussian_shape(t, duration: float, sigma: float):
    """Unit-peak envelope at time ``t`` measured from the pulse start; zero outside."""
    t = np.asarray(t, dtype=float)
    x = t - duration / 2
    inside = (t >= 0) & (t <= duration)
    return np.where(inside, np.exp(-0.5 * (x / sigma) ** 2), 0.0)


def _unit_area(duration: float, sigma: float) -> float:
    # Integral of the unit-peak truncated Gaussian over its window.
    half = duration / 2
    return sigma * math.sqrt(2 * math.pi) * math.erf(half / (sigma * math.sqrt(2)))


def pulse_area(env: GaussianEnvelope, peak: float) -> float:
    """Resonant rotation angle produced by ``env`` driven at Rabi amplitude ``peak``."""
    return peak * _unit_area(env.duration, env.sigma)


def calibrate_peak(env: GaussianEnvelope) -> float:
    """Peak Rabi amplitude (rad/us) whose time-integral equals ``env.area``."""
    return env.area / _unit_area(env.duration, env.sigma)


@dataclass(frozen=True)
class PulseInstruction:
    carrier_freq: float
    envelope: GaussianEnvelope
    phase: float = 0.0
    start_time: float = 0.0

    def __post_init__(self):
        if self.start_time < 0:
            raise ValueError("start_time must be non-negative")

    @property
    def end_time(self) -> float:
        return self.start_time + self.envelope.duration


@dataclass(frozen=True)
class PulseSchedule:
    instructions: tuple[PulseInstruction, ...] = ()

    def __post_init__(self):
        instrs = tuple(self.instructions)
        object.__setattr__(self, "instructions", instrs)
        for prev, cur in zip(instrs, instrs[1:]):
            if cur.start_time < prev.start_time:
                raise ValueError("instructions must be sorted by start_time")
            if cur.start_time < prev.end_time - 1e-12:
                raise ValueError(
                    f"pulses overlap at t={cur.start_time!r}: single drive channel"
                )

    def __len__(self):
        return len(self.instructions)

    def __iter__(self):
        return iter(self.instructions)

    @property
    def duration(self) -> float:
        return max((p.end_time for p in self.instructions), default=0.0)


_LINE = re.compile(r"^pulse((?:\s+\w+=\S+)+)\s*$")
_FIELDS = ("freq", "area", "phase", "t0", "dur", "sigma")


def _instruction_line(p: PulseInstruction) -> str:
    e = p.envelope
    return (
        f"pulse freq={p.carrier_freq!r} area={e.area!r} phase={p.phase!r} "
        f"t0={p.start_time!r} dur={e.duration!r} sigma={e.sigma!r}"
    )


def serialize_schedule(sched: PulseSchedule) -> str:
    """One ``pulse ...`` line per instruction; floats in shortest round-trip form."""
    return "".join(_instruction_line(p) + "\n" for p in sched)


def parse_schedule(text: str) -> PulseSchedule:
    instrs = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _LINE.match(line)
        if not m:
            raise ValueError(f"line {lineno}: expected 'pulse key=value ...'")
        kv = dict(item.split("=", 1) for item in m.group(1).split())
        if sorted(kv) != sorted(_FIELDS):
            raise ValueError(f"line {lineno}: need exactly the fields {', '.join(_FIELDS)}")
        v = {k: float(x) for k, x in kv.items()}
        instrs.append(
            PulseInstruction(
                carrier_freq=v["freq"],
                envelope=GaussianEnvelope(v["dur"], v["sigma"], v["area"]),
                phase=v["phase"],
                start_time=v["t0"],
            )
        )
    return PulseSchedule(tuple(instrs))


def same_timing(schedules: Iterable[PulseSchedule]) -> bool:
    """True if all schedules share pulse count, start times and durations."""
    keys = {tuple((p.start_time, p.envelope.duration) for p in s) for s in schedules}
    return len(keys) <= 1
